"""Pareto dominance, the bounded non-dominated archive and leader selection.

All objectives are minimized. The archive keeps an adaptive hypergrid over
objective space (7 divisions per dimension over the member bounds, inflated
by 10%); cells are addressed sparsely so 6-objective problems stay cheap.
The grid drives both eviction (most crowded cell loses a member) and leader
selection (sparse cells are favoured).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, EmptyArchive
from .schemas import archive_header

DEFAULT_CAPACITY = 100
GRID_DIVISIONS = 7
GRID_INFLATION = 0.1
LEADER_PRESSURE = 10.0


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and better somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare objectives of shape {a.shape} and {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_indices(points) -> List[int]:
    """Indices of the non-dominated rows of ``points``, first of each duplicate group.

    Rows are swept in lexicographic order; a dominating point always precedes
    the points it dominates in that order, so each row only needs checking
    against the front accumulated so far. Ties keep the lowest original index.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array of objective vectors, got shape {pts.shape}")
    n = pts.shape[0]
    if n == 0:
        return []
    # lexsort is stable, so equal rows stay in original index order
    order = np.lexsort(pts.T[::-1])
    front = np.empty_like(pts)
    kept: List[int] = []
    for idx in order:
        p = pts[idx]
        if kept:
            f = front[: len(kept)]
            if np.any(np.all(f <= p, axis=1)):
                continue
        front[len(kept)] = p
        kept.append(int(idx))
    return sorted(kept)


@dataclass
class Solution:
    position: np.ndarray
    thresholds: Tuple[int, ...]
    objective: np.ndarray
    raw: Optional[np.ndarray] = None


class InsertOutcome(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED_DOMINATED = "rejected_dominated"
    ACCEPTED_WITH_EVICTION = "accepted_with_eviction"

    @property
    def accepted(self) -> bool:
        return self is not InsertOutcome.REJECTED_DOMINATED


@dataclass
class ParetoArchive:
    """Bounded set of mutually non-dominated solutions.

    ``rng`` is only consulted when a member must be evicted; pass the run's
    generator to keep runs reproducible.
    """

    capacity: int = DEFAULT_CAPACITY
    dim: Optional[int] = None
    kind: Optional[str] = None
    rng: Optional[np.random.Generator] = None
    divisions: int = GRID_DIVISIONS
    inflation: float = GRID_INFLATION
    members: List[Solution] = field(default_factory=list, init=False)
    lower: Optional[np.ndarray] = field(default=None, init=False)
    upper: Optional[np.ndarray] = field(default=None, init=False)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("archive capacity must be positive")
        self._objs = np.empty((0, self.dim or 0))
        self._cells: Optional[np.ndarray] = None
        self._keys: set = set()

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def objectives(self) -> np.ndarray:
        """``(n, d)`` matrix of member objective vectors (read-only view)."""
        view = self._objs.view()
        view.setflags(write=False)
        return view

    def _check_dim(self, obj: np.ndarray) -> None:
        if obj.ndim != 1:
            raise DimensionMismatch(f"objective must be a vector, got shape {obj.shape}")
        if self.dim is None:
            self.dim = obj.shape[0]
            self._objs = np.empty((0, self.dim))
        elif obj.shape[0] != self.dim:
            raise DimensionMismatch(f"archive holds {self.dim}-objective solutions, got {obj.shape[0]}")

    def insert(self, solution: Solution) -> InsertOutcome:
        obj = np.asarray(solution.objective, dtype=np.float64)
        self._check_dim(obj)
        key = obj.tobytes()
        if key in self._keys:
            return InsertOutcome.REJECTED_DOMINATED
        objs = self._objs
        if len(objs):
            weakly_better = np.all(objs <= obj, axis=1)
            # weakly better everywhere covers both domination and exact duplicates
            if np.any(weakly_better):
                return InsertOutcome.REJECTED_DOMINATED
            beaten = np.all(obj <= objs, axis=1) & np.any(obj < objs, axis=1)
            if np.any(beaten):
                keep = ~beaten
                self.members = [m for m, k in zip(self.members, keep) if k]
                objs = objs[keep]
                self._keys = {o.tobytes() for o in objs}
        solution.objective = obj
        self.members.append(solution)
        self._keys.add(key)
        self._objs = np.vstack([objs, obj[None, :]])
        self._cells = None
        if self.lower is None or np.any(obj < self.lower) or np.any(obj > self.upper):
            self._rebuild_grid()
        if len(self.members) > self.capacity:
            self._evict()
            return InsertOutcome.ACCEPTED_WITH_EVICTION
        return InsertOutcome.ACCEPTED

    def extend(self, solutions: Iterable[Solution]) -> None:
        for s in solutions:
            self.insert(s)

    def _rebuild_grid(self) -> None:
        lo = self._objs.min(axis=0)
        hi = self._objs.max(axis=0)
        span = hi - lo
        # degenerate spans get a margin relative to the value itself
        pad = np.where(span > 0, self.inflation * span, self.inflation * np.maximum(np.abs(hi), 1e-12))
        self.lower = lo - pad
        self.upper = hi + pad
        self._cells = None

    def cell_indices(self) -> np.ndarray:
        """Integer grid coordinates of every member, shape ``(n, d)``."""
        if self._cells is None:
            width = (self.upper - self.lower) / self.divisions
            idx = np.floor((self._objs - self.lower) / width).astype(np.int64)
            self._cells = np.clip(idx, 0, self.divisions - 1)
        return self._cells

    def cell_groups(self) -> Dict[Tuple[int, ...], List[int]]:
        """Occupied cells mapped to member indices, in first-occupant order."""
        groups: Dict[Tuple[int, ...], List[int]] = {}
        for i, cell in enumerate(map(tuple, self.cell_indices().tolist())):
            groups.setdefault(cell, []).append(i)
        return groups

    def _rng(self) -> np.random.Generator:
        if self.rng is None:
            self.rng = np.random.default_rng()
        return self.rng

    def _evict(self) -> None:
        groups = list(self.cell_groups().values())
        crowd = max(len(g) for g in groups)
        crowded = [g for g in groups if len(g) == crowd]
        rng = self._rng()
        cell = crowded[int(rng.integers(len(crowded)))] if len(crowded) > 1 else crowded[0]
        victim = cell[int(rng.integers(len(cell)))]
        del self.members[victim]
        self._keys.discard(self._objs[victim].tobytes())
        self._objs = np.delete(self._objs, victim, axis=0)
        self._cells = None

    def select_leader(self, rng: np.random.Generator) -> Solution:
        return self.select_leaders(rng, 1)[0]

    def select_leaders(self, rng: np.random.Generator, count: int) -> List[Solution]:
        """Roulette over occupied cells (weight 10 / occupancy), then uniform within the cell."""
        if not self.members:
            raise EmptyArchive("cannot select a leader from an empty archive")
        if len(self.members) == 1:
            return [self.members[0]] * count
        groups = list(self.cell_groups().values())
        weights = np.array([LEADER_PRESSURE / len(g) for g in groups])
        cumulative = np.cumsum(weights / weights.sum())
        picks = np.minimum(np.searchsorted(cumulative, rng.random(count), side="right"), len(groups) - 1)
        within = rng.random(count)
        leaders = []
        for k, u in zip(picks.tolist(), within.tolist()):
            cell = groups[k]
            leaders.append(self.members[cell[int(u * len(cell))]])
        return leaders

    def is_mutually_nondominated(self) -> bool:
        return len(nondominated_indices(self._objs)) == len(self.members)

    def sorted_members(self) -> List[Solution]:
        return sorted(self.members, key=lambda s: (s.thresholds, tuple(s.objective)))


def archive_insert(archive: ParetoArchive, solution: Solution) -> InsertOutcome:
    return archive.insert(solution)


def select_leader(archive: ParetoArchive, rng: np.random.Generator) -> Solution:
    return archive.select_leader(rng)


def objective_matrix(solutions: Sequence[Solution]) -> np.ndarray:
    if not solutions:
        return np.empty((0, 0))
    return np.vstack([np.asarray(s.objective, dtype=np.float64) for s in solutions])


def write_archive_csv(solutions: Iterable[Solution], path, source: str = "archive") -> int:
    """Dump solutions as ``t_1..t_m, obj_1..obj_d, raw_1..raw_k, source``, sorted by thresholds."""
    rows = sorted(solutions, key=lambda s: (tuple(s.thresholds), tuple(np.asarray(s.objective).tolist())))
    if not rows:
        raise EmptyArchive("nothing to write")
    m = len(rows[0].thresholds)
    d = len(rows[0].objective)
    k = 0 if rows[0].raw is None else len(rows[0].raw)
    header = archive_header(m, d, k)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for s in rows:
            raw = [] if s.raw is None else [repr(float(v)) for v in s.raw]
            writer.writerow(
                [int(v) for v in s.thresholds] + [repr(float(v)) for v in s.objective] + raw + [source]
            )
    return len(rows)
