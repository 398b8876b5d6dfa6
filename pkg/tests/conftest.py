import numpy as np
import pytest

from pareto_thresh.histio import Histogram256, RgbImage


def counts_hist(pairs, total=None):
    """Histogram from ``{intensity: count}``."""
    counts = np.zeros(256, dtype=np.int64)
    for i, c in pairs.items():
        counts[i] = c
    return Histogram256.from_counts(counts)


@pytest.fixture
def uniform():
    return Histogram256.from_counts(np.ones(256, dtype=np.int64))


@pytest.fixture
def spikes():
    return counts_hist({50: 1, 200: 1})


@pytest.fixture
def point_mass():
    return counts_hist({77: 10})


@pytest.fixture
def ramp_image():
    """16x16 image, every channel a ramp 0..255 (R = G = B)."""
    ramp = np.arange(256, dtype=np.uint8).reshape(16, 16)
    return RgbImage(np.stack([ramp] * 3, axis=2))


def random_hist(rng, max_levels=256, sparse=True):
    counts = np.zeros(256, dtype=np.int64)
    k = int(rng.integers(1, max_levels + 1))
    idx = rng.choice(256, size=k, replace=False)
    counts[idx] = rng.integers(1 if not sparse else 0, 1000, size=k)
    if counts.sum() == 0:
        counts[idx[0]] = 1
    return Histogram256.from_counts(counts)


def random_thresholds(rng, max_t=12):
    m = int(rng.integers(0, max_t + 1))
    return tuple(sorted(int(v) for v in rng.integers(0, 256, size=m)))


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = []


@pytest.fixture
def report_criterion(capsys):
    """Record one acceptance verdict and echo it immediately."""

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
