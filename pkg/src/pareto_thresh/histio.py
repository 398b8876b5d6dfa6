"""Image ingestion, per-channel histograms and sparse 3D histogram export.

Only two containers are accepted: PNG with 8-bit RGB(A) samples and binary
PPM (``P6``) with maxval 255. Anything else is rejected rather than converted.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

import numpy as np
from PIL import Image

from .errors import CorruptImage, UnsupportedFormat

PathLike = Union[str, Path]

CHANNELS = ("R", "G", "B")
LEVELS = 256

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

# PNG colour types from the IHDR chunk.
_PNG_RGB = 2
_PNG_RGBA = 6


@dataclass(frozen=True)
class RgbImage:
    """An 8-bit RGB raster, stored as a ``(height, width, 3)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must have at least one pixel")
        if px.dtype != np.uint8:
            if np.issubdtype(px.dtype, np.integer) and px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("pixel components must lie in [0, 255]")
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError(f"pixel components must be integers, got {px.dtype}")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def channel(self, channel: Union[str, int]) -> np.ndarray:
        return self.pixels[:, :, channel_index(channel)]

    @classmethod
    def from_pixels(cls, pixels: Iterable[Tuple[int, int, int]], width: int, height: int) -> "RgbImage":
        """Build an image from a row-major sequence of ``(r, g, b)`` triples."""
        arr = np.asarray(list(pixels), dtype=np.int64).reshape(height, width, 3)
        return cls(arr)


@dataclass(frozen=True)
class Histogram256:
    """Normalized 256-bin intensity distribution of one channel.

    ``counts`` keeps the exact integer tallies so probabilities can always be
    traced back to pixel counts.
    """

    counts: np.ndarray
    pixel_count: int
    probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (LEVELS,):
            raise ValueError(f"histogram needs {LEVELS} bins, got shape {counts.shape}")
        if counts.min() < 0:
            raise ValueError("negative bin count")
        total = int(counts.sum())
        if total != self.pixel_count or total == 0:
            raise ValueError(f"bin counts sum to {total}, expected pixel_count={self.pixel_count}")
        counts.setflags(write=False)
        probs = counts / float(total)
        probs.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_counts(cls, counts) -> "Histogram256":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(counts, int(counts.sum()))

    @classmethod
    def from_probabilities(cls, probs, pixel_count: int) -> "Histogram256":
        """Rebuild a histogram from probabilities that are exact count ratios."""
        p = np.asarray(probs, dtype=np.float64)
        counts = np.rint(p * pixel_count)
        if not np.allclose(counts, p * pixel_count, rtol=0, atol=1e-9):
            raise ValueError("probabilities are not count ratios for this pixel_count")
        return cls(counts.astype(np.int64), pixel_count)


class Sparse3DHistogram(Dict[Tuple[int, int, int], int]):
    """Occurrence count per distinct ``(r, g, b)`` triple; zero counts are never stored."""

    @property
    def pixel_count(self) -> int:
        return sum(self.values())

    def sorted_items(self):
        return sorted(self.items())


def channel_index(channel: Union[str, int]) -> int:
    if isinstance(channel, str):
        try:
            return CHANNELS.index(channel.upper())
        except ValueError:
            raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}") from None
    if channel not in (0, 1, 2):
        raise ValueError(f"channel index must be 0, 1 or 2, got {channel}")
    return int(channel)


def load_rgb_image(path: PathLike) -> RgbImage:
    """Read a PNG or binary PPM file into an :class:`RgbImage`.

    Raises ``FileNotFoundError`` for missing files, :class:`UnsupportedFormat`
    for anything other than 8-bit RGB, and :class:`CorruptImage` for truncated
    or malformed data.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    data = path.read_bytes()
    if data.startswith(_PNG_MAGIC):
        return _load_png(path, data)
    if data[:2] == b"P6":
        return _parse_ppm(data)
    if data[:2] in (b"P1", b"P2", b"P3", b"P4", b"P5"):
        raise UnsupportedFormat(f"{path}: only binary RGB PPM (P6) is supported, got {data[:2].decode()}")
    raise UnsupportedFormat(f"{path}: not a PNG or PPM file")


def _load_png(path: Path, data: bytes) -> RgbImage:
    if len(data) < 33 or data[12:16] != b"IHDR":
        raise CorruptImage(f"{path}: missing PNG header chunk")
    width, height, bit_depth, colour_type = struct.unpack(">IIBB", data[16:26])
    if bit_depth != 8:
        raise UnsupportedFormat(f"{path}: PNG bit depth {bit_depth}, only 8-bit is supported")
    if colour_type not in (_PNG_RGB, _PNG_RGBA):
        raise UnsupportedFormat(f"{path}: PNG colour type {colour_type} is not RGB")
    try:
        with Image.open(path) as im:
            im.load()
            arr = np.asarray(im)
    except (OSError, SyntaxError, ValueError, struct.error) as exc:
        raise CorruptImage(f"{path}: {exc}") from exc
    if arr.ndim != 3 or arr.shape[:2] != (height, width):
        raise CorruptImage(f"{path}: decoded shape {arr.shape} disagrees with header")
    if arr.shape[2] == 4:
        warnings.warn(f"{path}: ignoring alpha channel", stacklevel=3)
        arr = arr[:, :, :3]
    return RgbImage(arr)


def _ppm_tokens(data: bytes, count: int) -> Tuple[list, int]:
    """Pull ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise CorruptImage("truncated PPM header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise CorruptImage("truncated PPM header")
    return tokens, pos + 1


def _parse_ppm(data: bytes) -> RgbImage:
    tokens, offset = _ppm_tokens(data, 4)
    try:
        width, height, maxval = (int(tok) for tok in tokens[1:])
    except ValueError:
        raise CorruptImage("non-numeric PPM header field") from None
    if width < 1 or height < 1:
        raise CorruptImage(f"invalid PPM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormat(f"PPM maxval {maxval}, only 8-bit (255) is supported")
    expected = width * height * 3
    raster = data[offset:offset + expected]
    if len(raster) < expected:
        raise CorruptImage(f"PPM raster truncated: {len(raster)} of {expected} bytes")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(arr.copy())


def save_ppm(image: RgbImage, path: PathLike) -> None:
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes())


def save_png(pixels: np.ndarray, path: PathLike) -> None:
    """Write an 8-bit RGB or single-channel array as PNG."""
    if isinstance(pixels, RgbImage):
        pixels = pixels.pixels
    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(path, format="PNG")


def channel_histogram(image: RgbImage, channel: Union[str, int]) -> Histogram256:
    counts = np.bincount(image.channel(channel).ravel(), minlength=LEVELS)
    return Histogram256(counts.astype(np.int64), image.pixel_count)


def channel_histograms(image: RgbImage) -> Tuple[Histogram256, Histogram256, Histogram256]:
    return tuple(channel_histogram(image, c) for c in CHANNELS)  # type: ignore[return-value]


def histogram_3d(image: RgbImage) -> Sparse3DHistogram:
    px = image.pixels.reshape(-1, 3).astype(np.int64)
    packed = (px[:, 0] << 16) | (px[:, 1] << 8) | px[:, 2]
    keys, counts = np.unique(packed, return_counts=True)
    hist = Sparse3DHistogram()
    for key, count in zip(keys.tolist(), counts.tolist()):
        hist[(key >> 16, (key >> 8) & 0xFF, key & 0xFF)] = count
    return hist


def write_histogram_3d_csv(hist: Sparse3DHistogram, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "g", "b", "count"])
        for (r, g, b), count in hist.sorted_items():
            writer.writerow([r, g, b, count])
