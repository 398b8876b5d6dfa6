"""Apply one threshold vector to all three channels of an image.

Channels are labelled independently, so a pixel's R, G and B components may
fall in different classes. Classes are recoloured with their per-channel
mean intensity (rounded half away from zero).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ClassOutOfRange
from .histio import CHANNELS, LEVELS, RgbImage, channel_histogram, channel_index
from .objectives import ThresholdVector, as_thresholds, class_labels, class_stats


@dataclass(frozen=True)
class LabelMaps:
    """Class index per pixel and channel, stored as ``(3, height, width)``."""

    labels: np.ndarray
    thresholds: ThresholdVector

    @property
    def n_classes(self) -> int:
        return len(self.thresholds) + 1

    def channel(self, channel: Union[str, int]) -> np.ndarray:
        return self.labels[channel_index(channel)]


def apply_thresholds(image: RgbImage, t: Sequence[int]) -> LabelMaps:
    t = as_thresholds(t)
    lut = class_labels(t).astype(np.uint16)
    labels = np.moveaxis(lut[image.pixels], 2, 0)
    return LabelMaps(np.ascontiguousarray(labels), t)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def class_representatives(image: RgbImage, t: Sequence[int]) -> np.ndarray:
    """``(3, m + 1)`` rounded class means; empty classes map to 0."""
    t = as_thresholds(t)
    reps = np.empty((3, len(t) + 1), dtype=np.int64)
    for c in range(3):
        stats = class_stats(channel_histogram(image, c), t)
        reps[c] = _round_half_away(stats.mu).astype(np.int64)
    return reps


def quantize(image: RgbImage, t: Sequence[int]) -> RgbImage:
    t = as_thresholds(t)
    lut = class_labels(t)
    reps = class_representatives(image, t)
    out = np.empty_like(image.pixels)
    for c in range(3):
        out[:, :, c] = reps[c][lut][image.pixels[:, :, c]]
    return RgbImage(out)


def class_mask(labels: LabelMaps, channel: Union[str, int], j: int) -> np.ndarray:
    """uint8 mask: 255 where the channel's label equals ``j``, 0 elsewhere."""
    if not 0 <= j < labels.n_classes:
        raise ClassOutOfRange(f"class {j} outside [0, {labels.n_classes - 1}]")
    return np.where(labels.channel(channel) == j, 255, 0).astype(np.uint8)


def segment_histogram_rows(image: RgbImage, t: Sequence[int]):
    """``(channel, intensity, class, count)`` for every occupied intensity."""
    t = as_thresholds(t)
    lut = class_labels(t)
    rows = []
    for c, name in enumerate(CHANNELS):
        counts = np.bincount(image.pixels[:, :, c].ravel(), minlength=LEVELS)
        for i in np.flatnonzero(counts).tolist():
            rows.append((name, i, int(lut[i]), int(counts[i])))
    return rows


def write_segment_histogram_csv(image: RgbImage, t: Sequence[int], path: Union[str, Path]) -> int:
    rows = segment_histogram_rows(image, t)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["channel", "intensity", "class", "count"])
        writer.writerows(rows)
    return len(rows)


def output_stem(stem: str, t: Sequence[int], algorithm: str, objective: str) -> str:
    return f"{stem}_T{len(t)}_{algorithm}_{objective.upper()}"
