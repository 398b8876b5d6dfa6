"""Exhaustive ground truth for small threshold counts.

The scalar search scores every class ``[a, b)`` once from cumulative sums and
then adds class contributions over all strictly increasing threshold tuples,
which keeps the 2.7M-candidate ``T = 3`` case to a fraction of a second. That
route shares no code with the per-bin evaluation in :mod:`objectives`, so the
two check each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import KindMismatch, TooManyThresholds
from .histio import LEVELS
from .objectives import (
    HistLike,
    ObjectiveKind,
    ThresholdVector,
    VectorObjective,
    _probs,
    kapur_score,
    otsu_score,
)
from .optimizers import SwarmConfig, run_single
from .pareto import ParetoArchive, Solution, nondominated_indices

MAX_SCALAR_T = 3
MAX_FRONT_T = 2
COVERAGE_TOL = 1e-9


def class_score_table(hist: HistLike, method: str) -> np.ndarray:
    """``C[a, b]`` = contribution of the class spanning levels ``a .. b-1``.

    Entries with ``b <= a`` or zero mass are 0.
    """
    p = _probs(hist)
    method = method.lower()
    cum_p = np.concatenate([[0.0], np.cumsum(p)])
    omega = cum_p[None, :] - cum_p[:, None]
    valid = np.triu(np.ones((LEVELS + 1, LEVELS + 1), dtype=bool), k=1) & (omega > 0)
    # tiny positive differences from cancellation over empty runs of bins
    valid &= omega > 1e-15
    if method == "otsu":
        levels = np.arange(LEVELS, dtype=np.float64)
        cum_m = np.concatenate([[0.0], np.cumsum(levels * p)])
        first = cum_m[None, :] - cum_m[:, None]
        mu_t = cum_m[-1]
        safe = np.where(valid, omega, 1.0)
        table = np.where(valid, first * first / safe - 2.0 * mu_t * first + mu_t * mu_t * omega, 0.0)
    elif method == "kapur":
        plogp = np.zeros_like(p)
        np.multiply(p, np.log(p, where=p > 0, out=np.zeros_like(p)), out=plogp, where=p > 0)
        cum_e = np.concatenate([[0.0], np.cumsum(plogp)])
        ent = cum_e[None, :] - cum_e[:, None]
        safe = np.where(valid, omega, 1.0)
        table = np.where(valid, np.log(safe) - ent / safe, 0.0)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'otsu' or 'kapur'")
    return table


def exhaustive_scalar_optimum(hist: HistLike, T: int, method: str) -> Tuple[ThresholdVector, float]:
    """Best ``T``-threshold vector for Otsu or Kapur by full enumeration.

    Candidates are strictly increasing tuples over 0..255. The lexicographically
    smallest maximizer wins ties. The returned score is re-evaluated with the
    per-bin scorer so it compares bitwise with swarm results.
    """
    if T > MAX_SCALAR_T:
        raise TooManyThresholds(f"exhaustive scalar search supports T <= {MAX_SCALAR_T}, got {T}")
    if T < 0:
        raise ValueError("threshold count must be non-negative")
    C = class_score_table(hist, method)
    L = LEVELS
    if T == 0:
        best: ThresholdVector = ()
    elif T == 1:
        scores = C[0, :L] + C[:L, L]
        best = (int(np.argmax(scores)),)
    elif T == 2:
        scores = C[0, :L][:, None] + C[:L, :L] + C[:L, L][None, :]
        scores = np.where(np.triu(np.ones((L, L), dtype=bool), k=1), scores, -np.inf)
        t1, t2 = np.unravel_index(int(np.argmax(scores)), scores.shape)
        best = (int(t1), int(t2))
    else:
        upper = np.triu(np.ones((L, L), dtype=bool), k=1)
        tail = C[:L, :L] + C[:L, L][None, :]  # classes [t2, t3) and [t3, 256)
        best_score = -np.inf
        best = ()
        for t1 in range(L - 2):
            s = C[0, t1] + C[t1, :L][:, None] + tail
            mask = upper.copy()
            mask[: t1 + 1, :] = False
            s = np.where(mask, s, -np.inf)
            k = int(np.argmax(s))
            if s.flat[k] > best_score:
                best_score = s.flat[k]
                t2, t3 = np.unravel_index(k, s.shape)
                best = (t1, int(t2), int(t3))
    score = otsu_score(hist, best) if method.lower() == "otsu" else kapur_score(hist, best)
    return best, score


def _combinations(T: int):
    return itertools.combinations(range(LEVELS), T)


def exhaustive_pareto_front(
    hists: Sequence[HistLike], T: int, kind: Union[str, ObjectiveKind]
) -> List[Solution]:
    """Exact non-dominated set over every strictly increasing ``T``-tuple.

    One solution is kept per distinct objective point (the lexicographically
    smallest threshold vector), matching the archive's duplicate rule.
    """
    if T > MAX_FRONT_T:
        raise TooManyThresholds(f"exhaustive front supports T <= {MAX_FRONT_T}, got {T}")
    if T < 1:
        raise ValueError("threshold count must be at least 1")
    objective = VectorObjective(hists, kind)
    candidates = list(_combinations(T))
    values = np.empty((len(candidates), objective.dim))
    raws = np.empty_like(values)
    for i, t in enumerate(candidates):
        values[i], raws[i] = objective(t)
    front = []
    for i in nondominated_indices(values):
        t = candidates[i]
        front.append(Solution(np.asarray(t, dtype=np.float64), t, values[i], raws[i]))
    return front


def front_coverage(
    archive, exact: Sequence[Solution], tol: float = COVERAGE_TOL, kind=None
) -> float:
    """Fraction of exact-front points matched or weakly dominated by the archive.

    A point counts as covered when some archive member is componentwise no
    larger than it up to ``tol``. ``kind`` names the objective the exact front
    was computed for and is checked against the archive's own kind.
    """
    archive_kind = getattr(archive, "kind", None)
    if kind is not None and archive_kind is not None:
        if ObjectiveKind.parse(kind) is not ObjectiveKind.parse(archive_kind):
            raise KindMismatch(f"archive holds {archive_kind} solutions, exact front is {kind}")
    members = list(archive)
    exact_pts = np.array([np.asarray(s.objective, dtype=np.float64) for s in exact])
    arch_pts = np.array([np.asarray(s.objective, dtype=np.float64) for s in members])
    if len(exact_pts) == 0:
        return 1.0
    if len(arch_pts) == 0:
        return 0.0
    if arch_pts.shape[1] != exact_pts.shape[1]:
        raise KindMismatch(
            f"archive has {arch_pts.shape[1]} objectives, exact front has {exact_pts.shape[1]}"
        )
    covered = np.all(arch_pts[None, :, :] <= exact_pts[:, None, :] + tol, axis=2).any(axis=1)
    return float(covered.mean())


def front_archive(front: Sequence[Solution], kind=None) -> ParetoArchive:
    """Wrap an exact front in an unbounded-enough archive for reporting."""
    archive = ParetoArchive(capacity=max(len(front), 1), kind=kind)
    archive.extend(front)
    return archive


@dataclass
class CoverageTrial:
    algorithm: str
    kind: str
    seed: int
    coverage: float
    archive_size: int
    wall_clock: float


def coverage_trials(
    hists: Sequence[HistLike],
    T: int,
    algorithm: str,
    kind: Union[str, ObjectiveKind],
    seeds: Sequence[int],
    population: int = 30,
    iterations: int = 500,
    archive_capacity: int = 100,
    exact: Optional[Sequence[Solution]] = None,
) -> List[CoverageTrial]:
    """Run the swarm once per seed and score each archive against the exact front."""
    if T > MAX_FRONT_T:
        raise TooManyThresholds(f"oracle comparison supports T <= {MAX_FRONT_T}, got {T}")
    kind = ObjectiveKind.parse(kind)
    if exact is None:
        exact = exhaustive_pareto_front(hists, T, kind)
    objective = VectorObjective(hists, kind)
    trials = []
    for seed in seeds:
        cfg = SwarmConfig(
            dims=T,
            algorithm=algorithm,
            objective_kind=kind.value,
            population=population,
            iterations=iterations,
            repeats=1,
            seed=seed,
            archive_capacity=archive_capacity,
        )
        report = run_single(objective, cfg)
        trials.append(
            CoverageTrial(
                algorithm, kind.value, seed, front_coverage(report.archive, exact, kind=kind),
                len(report.archive), report.wall_clock,
            )
        )
    return trials
