"""Archive summary metrics (MWR / MMWR) and wall-clock capture."""

from __future__ import annotations

import time
from typing import Callable, Iterable, Tuple, TypeVar

import numpy as np

from .errors import EmptyArchive
from .pareto import Solution

R = TypeVar("R")


def _members(archive) -> list:
    members = list(archive)
    if not members:
        raise EmptyArchive("metrics are undefined for an empty archive")
    return members


def mwr(archive: Iterable[Solution]) -> np.ndarray:
    """Componentwise mean of the members' (minimization-domain) objective vectors."""
    objs = getattr(archive, "objectives", None)
    if objs is not None:
        if len(objs) == 0:
            raise EmptyArchive("metrics are undefined for an empty archive")
        return objs.mean(axis=0)
    members = _members(archive)
    return np.mean(np.vstack([m.objective for m in members]), axis=0)


def raw_mwr(archive: Iterable[Solution]) -> np.ndarray:
    """Same mean taken over the untransformed (maximization-domain) scores."""
    members = _members(archive)
    if any(m.raw is None for m in members):
        raise ValueError("archive members carry no raw scores")
    return np.mean(np.vstack([m.raw for m in members]), axis=0)


def mmwr(archive: Iterable[Solution]) -> float:
    return float(np.mean(mwr(archive)))


def time_run(f: Callable[[], object]) -> float:
    """Monotonic wall time of ``f()`` in seconds, at millisecond resolution."""
    return timed_call(f)[1]


def timed_call(f: Callable[[], R]) -> Tuple[R, float]:
    start = time.perf_counter()
    result = f()
    return result, round(time.perf_counter() - start, 3)
