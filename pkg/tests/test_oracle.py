import itertools
import math

import numpy as np
import pytest

from conftest import random_hist
from pareto_thresh import fixtures
from pareto_thresh.errors import KindMismatch, TooManyThresholds
from pareto_thresh.histio import channel_histograms
from pareto_thresh.objectives import VectorObjective, kapur_score, otsu_score, to_minimization
from pareto_thresh.oracle import (
    coverage_trials,
    exhaustive_pareto_front,
    exhaustive_scalar_optimum,
    front_archive,
    front_coverage,
)
from pareto_thresh.pareto import ParetoArchive, Solution, dominates

SCORERS = {"otsu": otsu_score, "kapur": kapur_score}


def brute_force(hist, T, method):
    """Argmax by evaluating every candidate with the per-bin scorer."""
    score = SCORERS[method]
    best_t, best = None, -math.inf
    for t in itertools.combinations(range(256), T):
        s = score(hist, t)
        if s > best + 1e-9:
            best_t, best = t, s
    return best_t, best


# -- scalar optimum -------------------------------------------------------------


def test_two_spike_otsu_tie_break(spikes):
    t, score = exhaustive_scalar_optimum(spikes, 1, "otsu")
    assert t == (51,)
    assert score == 5625.0


def test_single_intensity_otsu(point_mass):
    assert exhaustive_scalar_optimum(point_mass, 1, "otsu") == ((0,), 0.0)


def test_uniform_kapur(uniform):
    t, score = exhaustive_scalar_optimum(uniform, 1, "kapur")
    assert t == (128,)
    assert abs(score - 2 * math.log(128)) <= 1e-12
    assert kapur_score(uniform, [127]) < score and kapur_score(uniform, [129]) < score


def test_no_thresholds(uniform):
    assert exhaustive_scalar_optimum(uniform, 0, "kapur") == ((), kapur_score(uniform, ()))


def test_too_many_thresholds(uniform):
    with pytest.raises(TooManyThresholds):
        exhaustive_scalar_optimum(uniform, 4, "otsu")
    with pytest.raises(ValueError):
        exhaustive_scalar_optimum(uniform, 1, "variance")


@pytest.mark.parametrize("method", ["otsu", "kapur"])
def test_scalar_matches_brute_force_t1(method):
    rng = np.random.default_rng(20)
    for _ in range(5):
        h = random_hist(rng)
        t, score = exhaustive_scalar_optimum(h, 1, method)
        bt, bs = brute_force(h, 1, method)
        assert score == pytest.approx(bs, rel=1e-12, abs=1e-12)
        assert SCORERS[method](h, t) == score


@pytest.mark.parametrize("method", ["otsu", "kapur"])
def test_scalar_matches_brute_force_t2(method):
    h = channel_histograms(fixtures.synthetic_rgb())[0]
    t, score = exhaustive_scalar_optimum(h, 2, method)
    _, best = brute_force(h, 2, method)
    assert score == pytest.approx(best, rel=1e-12)


@pytest.mark.parametrize("method", ["otsu", "kapur"])
def test_scalar_t3_beats_sampled_candidates(method):
    h = channel_histograms(fixtures.grayscale())[0]
    t, score = exhaustive_scalar_optimum(h, 3, method)
    assert len(t) == 3 and t[0] < t[1] < t[2]
    rng = np.random.default_rng(21)
    local = [tuple(sorted(np.clip(np.array(t) + rng.integers(-3, 4, 3), 0, 255))) for _ in range(300)]
    sampled = [tuple(sorted(rng.choice(256, 3, replace=False))) for _ in range(2000)]
    for cand in local + sampled:
        assert SCORERS[method](h, cand) <= score + 1e-9


def test_scalar_monotone_in_T():
    rng = np.random.default_rng(22)
    for _ in range(3):
        h = random_hist(rng)
        for method in ("otsu", "kapur"):
            scores = [exhaustive_scalar_optimum(h, T, method)[1] for T in range(4)]
            assert all(b >= a - 1e-12 for a, b in zip(scores, scores[1:]))


# -- exact fronts -------------------------------------------------------------------


@pytest.mark.parametrize("kind,method", [("j1", "kapur"), ("j2", "otsu")])
@pytest.mark.parametrize("T", [1, 2])
def test_grayscale_front_is_scalar_optimum(kind, method, T):
    hists = channel_histograms(fixtures.grayscale())
    front = exhaustive_pareto_front(hists, T, kind)
    assert len(front) == 1
    _, best = exhaustive_scalar_optimum(hists[0], T, method)
    assert front[0].objective == pytest.approx(to_minimization([best] * 3), abs=1e-12)


@pytest.mark.parametrize("kind", ["j3", "j4"])
def test_grayscale_front_single_point_any_kind(kind):
    front = exhaustive_pareto_front(channel_histograms(fixtures.grayscale()), 1, kind)
    assert len({tuple(s.objective) for s in front}) == len(front)
    assert all(len(s.thresholds) == 1 for s in front)


def test_two_spike_front_holds_each_channel_optimum():
    hists = channel_histograms(fixtures.two_spike())
    front = exhaustive_pareto_front(hists, 1, "j2")
    assert len(front) > 1
    points = np.array([s.objective for s in front])
    for c, h in enumerate(hists):
        _, best = exhaustive_scalar_optimum(h, 1, "otsu")
        assert np.any(np.isclose(points[:, c], 1 / (1 + best), rtol=0, atol=1e-15))


@pytest.mark.parametrize("kind", ["j1", "j2", "j3", "j4"])
def test_front_self_consistency(kind):
    hists = channel_histograms(fixtures.synthetic_rgb())
    front = exhaustive_pareto_front(hists, 1, kind)
    assert len(front) <= 256
    pts = [s.objective for s in front]
    for a in pts:
        assert not any(dominates(b, a) for b in pts)
    objective = VectorObjective(hists, kind)
    for t in range(256):
        v, _ = objective((t,))
        assert any(np.array_equal(v, p) or dominates(p, v) for p in pts)


def test_front_too_many_thresholds():
    hists = channel_histograms(fixtures.two_spike())
    with pytest.raises(TooManyThresholds):
        exhaustive_pareto_front(hists, 3, "j2")


# -- coverage ------------------------------------------------------------------------


def _front(points):
    return [Solution(np.zeros(1), (i,), np.asarray(p, dtype=float)) for i, p in enumerate(points)]


def test_coverage_examples():
    exact = _front([[0.1, 0.9], [0.9, 0.1]])
    assert front_coverage(front_archive(exact), exact) == 1.0
    assert front_coverage(ParetoArchive(capacity=5), exact) == 0.0
    half = ParetoArchive(capacity=5)
    half.insert(exact[0])
    assert front_coverage(half, exact) == 0.5


def test_coverage_tolerance():
    exact = _front([[0.5, 0.5]])
    near = ParetoArchive(capacity=5)
    near.insert(_front([[0.5 + 5e-10, 0.5]])[0])
    assert front_coverage(near, exact) == 1.0
    far = ParetoArchive(capacity=5)
    far.insert(_front([[0.5 + 1e-6, 0.5]])[0])
    assert front_coverage(far, exact) == 0.0


def test_coverage_kind_mismatch():
    hists = channel_histograms(fixtures.two_spike())
    exact = exhaustive_pareto_front(hists, 1, "j2")
    arch = ParetoArchive(capacity=10, kind="j1")
    arch.insert(exact[0])
    with pytest.raises(KindMismatch):
        front_coverage(arch, exact, kind="j2")
    j4 = ParetoArchive(capacity=10)
    j4.insert(_front([[0.5, 0.5]])[0])
    with pytest.raises(KindMismatch):
        front_coverage(j4, exact)


def test_coverage_trials_grayscale():
    hists = channel_histograms(fixtures.grayscale())
    trials = coverage_trials(hists, 1, "mopso", "j2", seeds=[0, 1], population=20, iterations=60)
    assert [tr.seed for tr in trials] == [0, 1]
    assert all(tr.coverage == 1.0 and tr.archive_size == 1 for tr in trials)
