"""Deterministic synthetic test images.

Each channel is built from a target intensity density: pixel counts are
apportioned to the 256 levels by largest remainder, then laid out along a
smooth spatial field so the result looks like an image rather than noise.
No random numbers are involved, so the fixtures are identical everywhere.
"""

from __future__ import annotations

from typing import Dict, Sequence, Tuple

import numpy as np

from .histio import LEVELS, RgbImage

FIXTURE_SIZE = 64

Mixture = Sequence[Tuple[float, float, float]]  # (weight, mean, std)


def apportion(density: np.ndarray, total: int) -> np.ndarray:
    """Integer counts summing to ``total`` that follow ``density`` (largest remainder)."""
    density = np.asarray(density, dtype=np.float64)
    share = density / density.sum() * total
    counts = np.floor(share).astype(np.int64)
    short = total - int(counts.sum())
    # ties in the remainder resolve to the lower level
    order = np.lexsort((np.arange(len(share)), -(share - counts)))
    counts[order[:short]] += 1
    return counts


def mixture_density(components: Mixture) -> np.ndarray:
    levels = np.arange(LEVELS, dtype=np.float64)
    dens = np.zeros(LEVELS)
    for weight, mean, std in components:
        dens += weight * np.exp(-0.5 * ((levels - mean) / std) ** 2) / std
    return dens


def _field(size: int, angle: float, ripple: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size
    base = np.cos(angle) * xx + np.sin(angle) * yy
    return base + ripple * np.sin(6.0 * xx + 4.0 * yy) * np.cos(5.0 * yy - 3.0 * xx)


def channel_from_counts(counts: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Assign sorted intensities to pixels ranked by ``field`` (stable ranking)."""
    values = np.repeat(np.arange(LEVELS, dtype=np.uint8), counts)
    order = np.argsort(field.ravel(), kind="stable")
    out = np.empty(field.size, dtype=np.uint8)
    out[order] = values
    return out.reshape(field.shape)


def image_from_mixtures(mixtures: Sequence[Mixture], size: int = FIXTURE_SIZE) -> RgbImage:
    total = size * size
    fields = [_field(size, 0.3, 0.15), _field(size, 1.2, 0.25), _field(size, 2.4, 0.2)]
    channels = [
        channel_from_counts(apportion(mixture_density(mix), total), fields[c])
        for c, mix in enumerate(mixtures)
    ]
    return RgbImage(np.stack(channels, axis=2))


RGB_MIXTURES = (
    ((0.6, 60.0, 15.0), (0.4, 170.0, 20.0)),
    ((0.5, 90.0, 20.0), (0.5, 200.0, 15.0)),
    ((0.3, 40.0, 10.0), (0.7, 130.0, 25.0)),
)

GRAY_MIXTURE = ((0.35, 70.0, 22.0), (0.4, 150.0, 25.0), (0.25, 215.0, 15.0))


def synthetic_rgb(size: int = FIXTURE_SIZE) -> RgbImage:
    """Distinct bimodal histogram per channel."""
    return image_from_mixtures(RGB_MIXTURES, size)


def grayscale(size: int = FIXTURE_SIZE) -> RgbImage:
    """R = G = B, smooth trimodal histogram."""
    img = image_from_mixtures((GRAY_MIXTURE,) * 3, size)
    gray = img.pixels[:, :, 0]
    return RgbImage(np.stack([gray] * 3, axis=2))


def two_spike(size: int = FIXTURE_SIZE) -> RgbImage:
    """Each channel holds two intensities; no single threshold splits two channels."""
    spikes = ((20, 70), (100, 140), (180, 230))
    half = size * size // 2
    channels = []
    for c, (lo, hi) in enumerate(spikes):
        counts = np.zeros(LEVELS, dtype=np.int64)
        counts[lo] = half
        counts[hi] = size * size - half
        channels.append(channel_from_counts(counts, _field(size, 0.4 + c, 0.2)))
    return RgbImage(np.stack(channels, axis=2))


FIXTURES = {
    "synthetic_rgb": synthetic_rgb,
    "grayscale": grayscale,
    "two_spike": two_spike,
}


def all_fixtures() -> Dict[str, RgbImage]:
    return {name: build() for name, build in FIXTURES.items()}


def bundled_path(name: str):
    """Path of the PNG copy of fixture ``name`` shipped with the package."""
    from importlib.resources import files

    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    return files("pareto_thresh") / "data" / f"{name}.png"
