import time

import numpy as np
import pytest

from pareto_thresh.errors import EmptyArchive
from pareto_thresh.metrics import mmwr, mwr, raw_mwr, time_run
from pareto_thresh.pareto import ParetoArchive, Solution


def archive_of(points, raws=None):
    arch = ParetoArchive(capacity=max(len(points), 1))
    for i, p in enumerate(points):
        raw = None if raws is None else np.asarray(raws[i], dtype=float)
        arch.insert(Solution(np.zeros(1), (i,), np.asarray(p, dtype=float), raw))
    return arch


def test_mwr_example():
    assert mwr(archive_of([[0.2, 0.4], [0.4, 0.2]])) == pytest.approx([0.3, 0.3], abs=1e-15)


def test_singleton_mwr_is_its_objective():
    v = [0.123, 0.456, 0.789]
    arch = archive_of([v])
    assert mwr(arch).tolist() == v
    assert mmwr(arch) == np.mean(v)


def test_mwr_order_invariant():
    rng = np.random.default_rng(30)
    pts = rng.random((40, 3))
    pts /= pts.sum(axis=1, keepdims=True)
    a = mwr(archive_of(pts.tolist()))
    b = mwr(archive_of(pts[rng.permutation(40)].tolist()))
    assert np.allclose(a, b, rtol=0, atol=1e-15)


def test_mwr_of_plain_list():
    sols = [Solution(np.zeros(1), (0,), np.array(p)) for p in ([0.1, 0.3], [0.3, 0.1])]
    assert mwr(sols) == pytest.approx([0.2, 0.2])


@pytest.mark.parametrize("values,expected", [([0.3, 0.3], 0.3), ([1, 1, 1], 1.0), ([0.1, 0.2, 0.3], 0.2)])
def test_mmwr_examples(values, expected):
    assert mmwr(archive_of([values])) == pytest.approx(expected, abs=1e-15)


def test_mmwr_is_mean_of_mwr():
    rng = np.random.default_rng(31)
    for d in (2, 3, 6):
        pts = rng.random((25, d))
        pts /= pts.sum(axis=1, keepdims=True)
        arch = archive_of(pts.tolist())
        assert abs(mmwr(arch) - np.mean(mwr(arch))) <= 1e-15


def test_union_of_equal_archives():
    rng = np.random.default_rng(32)
    a = rng.random((10, 2))
    a[:, 1] = 1 - a[:, 0]
    b = rng.random((10, 2)) * 0.5
    b[:, 1] = 0.5 - b[:, 0]
    union = mwr([Solution(np.zeros(1), (0,), p) for p in np.vstack([a, b])])
    assert union == pytest.approx((mwr(archive_of(a.tolist())) + mwr(archive_of(b.tolist()))) / 2, abs=1e-15)


def test_components_in_unit_interval():
    pts = [[1.0, 0.01], [0.5, 0.5], [0.01, 1.0]]
    m = mwr(archive_of(pts))
    assert np.all(m > 0) and np.all(m <= 1)


def test_raw_mwr():
    arch = archive_of([[0.2, 0.4], [0.4, 0.2]], raws=[[4.0, 1.5], [1.5, 4.0]])
    assert raw_mwr(arch).tolist() == [2.75, 2.75]
    with pytest.raises(ValueError):
        raw_mwr(archive_of([[0.2, 0.4]]))


def test_empty_archive():
    for fn in (mwr, mmwr, raw_mwr):
        with pytest.raises(EmptyArchive):
            fn(ParetoArchive())


def test_time_run_noop():
    t = time_run(lambda: None)
    assert 0 <= t < 0.01


def test_time_run_resolution():
    t = time_run(lambda: time.sleep(0.02))
    assert 0.015 <= t < 0.5
    assert round(t, 3) == t
