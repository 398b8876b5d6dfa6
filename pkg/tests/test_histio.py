import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from pareto_thresh.errors import CorruptImage, UnsupportedFormat
from pareto_thresh.histio import (
    Histogram256,
    RgbImage,
    channel_histogram,
    channel_histograms,
    histogram_3d,
    load_rgb_image,
    save_png,
    save_ppm,
    write_histogram_3d_csv,
)

pixel_arrays = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda hw: arrays(np.uint8, (hw[0], hw[1], 3))
)


# -- loading ------------------------------------------------------------------


def test_load_minimal_ppm(tmp_path):
    path = tmp_path / "tiny.ppm"
    path.write_bytes(b"P6\n2 1\n255\n" + bytes([0, 0, 0, 255, 255, 255]))
    img = load_rgb_image(path)
    assert (img.width, img.height, img.pixel_count) == (2, 1, 2)
    assert img.pixels.tolist() == [[[0, 0, 0], [255, 255, 255]]]


def test_ppm_header_comments(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n# made by hand\n1 1\n# depth\n255\n" + bytes([1, 2, 3]))
    assert load_rgb_image(path).pixels.tolist() == [[[1, 2, 3]]]


def test_ppm_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    img = RgbImage(rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8))
    save_ppm(img, tmp_path / "a.ppm")
    assert np.array_equal(load_rgb_image(tmp_path / "a.ppm").pixels, img.pixels)


def test_png_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    px = rng.integers(0, 256, size=(4, 9, 3), dtype=np.uint8)
    save_png(px, tmp_path / "a.png")
    img = load_rgb_image(tmp_path / "a.png")
    assert (img.width, img.height) == (9, 4)
    assert np.array_equal(img.pixels, px)


def test_grayscale_png_rejected(tmp_path):
    Image.fromarray(np.zeros((3, 3), dtype=np.uint8)).save(tmp_path / "g.png")
    with pytest.raises(UnsupportedFormat):
        load_rgb_image(tmp_path / "g.png")


def test_sixteen_bit_png_rejected(tmp_path):
    Image.fromarray(np.zeros((3, 3), dtype=np.uint16)).save(tmp_path / "d.png")
    with pytest.raises(UnsupportedFormat):
        load_rgb_image(tmp_path / "d.png")


def test_paletted_png_rejected(tmp_path):
    Image.new("P", (4, 4)).save(tmp_path / "p.png")
    with pytest.raises(UnsupportedFormat):
        load_rgb_image(tmp_path / "p.png")


def test_rgba_png_drops_alpha_with_warning(tmp_path):
    px = np.zeros((2, 2, 4), dtype=np.uint8)
    px[..., 0] = 9
    px[..., 3] = 128
    Image.fromarray(px).save(tmp_path / "a.png")
    with pytest.warns(UserWarning, match="alpha"):
        img = load_rgb_image(tmp_path / "a.png")
    assert img.pixels[..., 0].tolist() == [[9, 9], [9, 9]]
    assert img.pixels.shape == (2, 2, 3)


def test_truncated_ppm_is_corrupt(tmp_path):
    path = tmp_path / "t.ppm"
    path.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
    with pytest.raises(CorruptImage):
        load_rgb_image(path)


def test_truncated_ppm_header_is_corrupt(tmp_path):
    path = tmp_path / "h.ppm"
    path.write_bytes(b"P6\n4 ")
    with pytest.raises(CorruptImage):
        load_rgb_image(path)


def test_truncated_png_is_corrupt(tmp_path):
    save_png(np.full((20, 20, 3), 7, dtype=np.uint8), tmp_path / "full.png")
    data = (tmp_path / "full.png").read_bytes()
    (tmp_path / "cut.png").write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptImage):
        load_rgb_image(tmp_path / "cut.png")


def test_ppm_other_depth_rejected(tmp_path):
    path = tmp_path / "w.ppm"
    path.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
    with pytest.raises(UnsupportedFormat):
        load_rgb_image(path)


@pytest.mark.parametrize("magic", [b"P3", b"P5"])
def test_non_rgb_binary_pnm_rejected(tmp_path, magic):
    path = tmp_path / "x.pnm"
    path.write_bytes(magic + b"\n1 1\n255\n" + bytes(3))
    with pytest.raises(UnsupportedFormat):
        load_rgb_image(path)


def test_unknown_format_rejected(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"GIF89a....")
    with pytest.raises(UnsupportedFormat):
        load_rgb_image(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_rgb_image(tmp_path / "nope.png")


def test_rgb_image_rejects_bad_shapes():
    with pytest.raises(ValueError):
        RgbImage(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        RgbImage(np.zeros((0, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        RgbImage(np.full((1, 1, 3), 300))


# -- channel histograms ---------------------------------------------------------


def test_single_colour_histogram():
    img = RgbImage(np.tile(np.array([10, 20, 30], dtype=np.uint8), (5, 4, 1)))
    h = channel_histogram(img, "R")
    assert h.probs[10] == 1.0
    assert np.count_nonzero(h.probs) == 1


def test_hand_counted_histogram():
    img = RgbImage.from_pixels([(0, 1, 1), (0, 1, 1), (128, 1, 1), (255, 1, 1)], width=4, height=1)
    h = channel_histogram(img, "R")
    assert h.probs[0] == 0.5 and h.probs[128] == 0.25 and h.probs[255] == 0.25
    assert h.probs.sum() == 1.0


def test_ramp_histogram_is_uniform(ramp_image):
    h = channel_histogram(ramp_image, 0)
    # counting oracle
    expected = np.array([np.sum(ramp_image.pixels[..., 0] == i) for i in range(256)]) / 256
    assert np.array_equal(h.probs, expected)
    assert np.all(h.probs == 1 / 256)


def test_histogram_keeps_counts():
    h = Histogram256.from_counts(np.r_[np.full(128, 3), np.zeros(128, dtype=int)])
    assert h.pixel_count == 384
    assert np.array_equal(np.rint(h.probs * h.pixel_count), h.counts)
    again = Histogram256.from_probabilities(h.probs, h.pixel_count)
    assert np.array_equal(again.counts, h.counts)
    with pytest.raises(ValueError):
        Histogram256.from_probabilities(np.full(256, 1 / 256), 100)


@settings(max_examples=60, deadline=None)
@given(pixel_arrays)
def test_histogram_invariants(px):
    img = RgbImage(px)
    for h in channel_histograms(img):
        assert np.all(h.probs >= 0)
        assert abs(h.probs.sum() - 1.0) <= 1e-12
        scaled = h.probs * h.pixel_count
        assert np.all(np.abs(scaled - np.rint(scaled)) <= 1e-9)
    assert sum(histogram_3d(img).values()) == img.width * img.height


@settings(max_examples=60, deadline=None)
@given(pixel_arrays, st.randoms(use_true_random=False))
def test_histogram_permutation_invariant(px, rnd):
    flat = px.reshape(-1, 3)
    order = list(range(len(flat)))
    rnd.shuffle(order)
    shuffled = RgbImage(flat[order].reshape(px.shape))
    for a, b in zip(channel_histograms(RgbImage(px)), channel_histograms(shuffled)):
        assert a.probs.tobytes() == b.probs.tobytes()


# -- 3D histogram -------------------------------------------------------------


def test_hist3d_single_colour():
    img = RgbImage(np.tile(np.array([10, 20, 30], dtype=np.uint8), (10, 10, 1)))
    assert dict(histogram_3d(img)) == {(10, 20, 30): 100}


def test_hist3d_two_black_pixels():
    img = RgbImage.from_pixels([(0, 0, 0), (0, 0, 0)], 2, 1)
    assert dict(histogram_3d(img)) == {(0, 0, 0): 2}


def test_hist3d_hand_count():
    img = RgbImage.from_pixels([(1, 2, 3), (1, 2, 3), (4, 5, 6)], 3, 1)
    hist = histogram_3d(img)
    assert dict(hist) == {(1, 2, 3): 2, (4, 5, 6): 1}
    assert hist.pixel_count == 3


@settings(max_examples=40, deadline=None)
@given(pixel_arrays)
def test_hist3d_matches_counting(px):
    expected = {}
    for r, g, b in px.reshape(-1, 3).tolist():
        expected[(r, g, b)] = expected.get((r, g, b), 0) + 1
    hist = histogram_3d(RgbImage(px))
    assert dict(hist) == expected
    assert all(v > 0 for v in hist.values())


def test_hist3d_csv_sorted(tmp_path):
    img = RgbImage.from_pixels([(4, 5, 6), (1, 2, 3), (1, 2, 3), (1, 0, 9)], 2, 2)
    path = tmp_path / "h.csv"
    write_histogram_3d_csv(histogram_3d(img), path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "g", "b", "count"]
    assert rows[1:] == [["1", "0", "9", "1"], ["1", "2", "3", "2"], ["4", "5", "6", "1"]]
