"""Colour image segmentation with one threshold vector shared by R, G and B.

Thresholds are found by multi-objective swarm search (MOPSO, MSSA) over
Otsu / Kapur vector objectives, with exhaustive oracles for small cases.
"""

from .histio import Histogram256, RgbImage, channel_histogram, channel_histograms, histogram_3d, load_rgb_image
from .objectives import (
    ObjectiveKind,
    VectorObjective,
    decode_position,
    eval_j1,
    eval_j2,
    eval_j3,
    eval_j4,
    kapur_score,
    otsu_score,
)
from .optimizers import SwarmConfig, run_batch, run_mopso, run_mssa
from .pareto import ParetoArchive, Solution, dominates

__version__ = "0.1.0"

__all__ = [
    "Histogram256",
    "ObjectiveKind",
    "ParetoArchive",
    "RgbImage",
    "Solution",
    "SwarmConfig",
    "VectorObjective",
    "channel_histogram",
    "channel_histograms",
    "decode_position",
    "dominates",
    "eval_j1",
    "eval_j2",
    "eval_j3",
    "eval_j4",
    "histogram_3d",
    "kapur_score",
    "load_rgb_image",
    "otsu_score",
    "run_batch",
    "run_mopso",
    "run_mssa",
]
