"""MOPSO and MSSA drivers over threshold-position space, plus the batch protocol.

Both optimizers search continuous positions in ``[0, 255]^m``; every position
is decoded to an integer threshold vector before evaluation, and every
evaluated solution is offered to the run's Pareto archive.

Randomness comes from a PCG64 ``SeedSequence`` rooted at the run seed. Child
stream 0 drives archive eviction and leader selection; child stream ``i + 1``
belongs to particle (or salp) ``i``. Draw order is fixed, so a config and
seed always reproduce the same archive regardless of how many runs execute
concurrently.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigInvalid
from .metrics import mmwr, mwr, raw_mwr, timed_call
from .objectives import ObjectiveKind, ThresholdVector, decode_positions
from .pareto import DEFAULT_CAPACITY, ParetoArchive, Solution

ALGORITHMS = ("mopso", "mssa")
RESERVED_ALGORITHMS = ("mogwo", "moalo")

LOWER_BOUND = 0.0
UPPER_BOUND = 255.0

INERTIA = 0.4
COGNITIVE = 2.0
SOCIAL = 2.0

Evaluator = Callable[[ThresholdVector], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class SwarmConfig:
    dims: int
    algorithm: str = "mopso"
    objective_kind: str = "j2"
    population: int = 30
    iterations: int = 500
    repeats: int = 30
    seed: int = 0
    archive_capacity: int = DEFAULT_CAPACITY

    def validate(self) -> "SwarmConfig":
        problems = []
        if self.population < 2:
            problems.append(f"population must be >= 2 (got {self.population})")
        if self.iterations < 1:
            problems.append(f"iterations must be >= 1 (got {self.iterations})")
        if self.dims < 1:
            problems.append(f"dims must be >= 1 (got {self.dims})")
        if self.repeats < 1:
            problems.append(f"repeats must be >= 1 (got {self.repeats})")
        if self.archive_capacity < 1:
            problems.append(f"archive_capacity must be >= 1 (got {self.archive_capacity})")
        if not 0 <= self.seed < 2**64:
            problems.append(f"seed must be a 64-bit unsigned integer (got {self.seed})")
        if self.algorithm not in ALGORITHMS:
            problems.append(f"unknown algorithm {self.algorithm!r}; supported: {', '.join(ALGORITHMS)}")
        try:
            ObjectiveKind.parse(self.objective_kind)
        except ValueError as exc:
            problems.append(str(exc))
        if problems:
            raise ConfigInvalid("; ".join(problems))
        return self

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class RunReport:
    archive: ParetoArchive
    mwr: np.ndarray
    raw_mwr: np.ndarray
    mmwr: float
    wall_clock: float
    seed: int
    config: SwarmConfig
    evaluations: int
    mmwr_history: List[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "mwr": [float(v) for v in self.mwr],
            "raw_mwr": [float(v) for v in self.raw_mwr],
            "mmwr": float(self.mmwr),
            "archive_size": len(self.archive),
            "evaluations": self.evaluations,
            "wall_clock_s": self.wall_clock,
        }


@dataclass
class BatchReport:
    config: SwarmConfig
    runs: List[RunReport]

    @property
    def mean_mwr(self) -> np.ndarray:
        return np.mean(np.vstack([r.mwr for r in self.runs]), axis=0)

    @property
    def mean_raw_mwr(self) -> np.ndarray:
        return np.mean(np.vstack([r.raw_mwr for r in self.runs]), axis=0)

    @property
    def mean_mmwr(self) -> float:
        return float(np.mean([r.mmwr for r in self.runs]))

    @property
    def mean_wall_clock(self) -> float:
        return round(float(np.mean([r.wall_clock for r in self.runs])), 3)

    def to_dict(self, image: str = "") -> Dict[str, object]:
        return {
            "image": image,
            "T": self.config.dims,
            "algorithm": self.config.algorithm,
            "objective": ObjectiveKind.parse(self.config.objective_kind).value,
            "population": self.config.population,
            "iterations": self.config.iterations,
            "archive_capacity": self.config.archive_capacity,
            "per_run": [r.to_dict() for r in self.runs],
            "mean_mwr": [float(v) for v in self.mean_mwr],
            "mean_raw_mwr": [float(v) for v in self.mean_raw_mwr],
            "mean_mmwr": self.mean_mmwr,
            "mean_wall_clock_s": self.mean_wall_clock,
        }


class _MemoObjective:
    """Per-run cache keyed by decoded threshold vector; counts every request."""

    def __init__(self, objective: Evaluator):
        self.objective = objective
        self.cache: Dict[ThresholdVector, Tuple[np.ndarray, np.ndarray]] = {}
        self.evaluations = 0

    def __call__(self, t: ThresholdVector) -> Tuple[np.ndarray, np.ndarray]:
        self.evaluations += 1
        hit = self.cache.get(t)
        if hit is None:
            values, raw = self.objective(t)
            hit = (np.asarray(values, dtype=np.float64), np.asarray(raw, dtype=np.float64))
            self.cache[t] = hit
        return hit


class _Swarm:
    """State shared by both drivers: streams, archive, memoized evaluation."""

    def __init__(self, objective: Evaluator, cfg: SwarmConfig):
        self.cfg = cfg
        streams = np.random.SeedSequence(cfg.seed).spawn(cfg.population + 1)
        self.control = np.random.Generator(np.random.PCG64(streams[0]))
        self.agents = [np.random.Generator(np.random.PCG64(s)) for s in streams[1:]]
        self.archive = ParetoArchive(
            capacity=cfg.archive_capacity,
            kind=ObjectiveKind.parse(cfg.objective_kind).value,
            rng=self.control,
        )
        self.objective = _MemoObjective(objective)
        self.history: List[float] = []

    def initial_positions(self) -> np.ndarray:
        m = self.cfg.dims
        return np.stack([g.uniform(LOWER_BOUND, UPPER_BOUND, m) for g in self.agents])

    def evaluate(self, positions: np.ndarray) -> List[Solution]:
        solutions = []
        for x, t in zip(positions, decode_positions(positions)):
            values, raw = self.objective(t)
            solutions.append(Solution(x.copy(), t, values, raw))
        return solutions

    def offer(self, solutions: Sequence[Solution]) -> None:
        for s in solutions:
            self.archive.insert(s)
        self.history.append(mmwr(self.archive))

    def report(self, wall_clock: float) -> RunReport:
        return RunReport(
            archive=self.archive,
            mwr=mwr(self.archive),
            raw_mwr=raw_mwr(self.archive),
            mmwr=mmwr(self.archive),
            wall_clock=wall_clock,
            seed=self.cfg.seed,
            config=self.cfg,
            evaluations=self.objective.evaluations,
            mmwr_history=self.history,
        )


def _dominates_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.all(a <= b, axis=1) & np.any(a < b, axis=1)


def _clamp(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    outside = (x < LOWER_BOUND) | (x > UPPER_BOUND)
    return np.clip(x, LOWER_BOUND, UPPER_BOUND), outside


def run_mopso(objective: Evaluator, cfg: SwarmConfig) -> RunReport:
    """Multi-objective PSO with a grid-archive leader and dominance-based personal bests."""
    cfg = replace(cfg, algorithm="mopso").validate()

    def body() -> _Swarm:
        swarm = _Swarm(objective, cfg)
        n, m = cfg.population, cfg.dims
        x = swarm.initial_positions()
        v = np.zeros_like(x)
        current = swarm.evaluate(x)
        swarm.offer(current)
        pbest = x.copy()
        pbest_obj = np.vstack([s.objective for s in current])

        for _ in range(cfg.iterations):
            leaders = swarm.archive.select_leaders(swarm.control, n)
            guide = np.stack([s.position for s in leaders])
            r1 = np.stack([g.random(m) for g in swarm.agents])
            r2 = np.stack([g.random(m) for g in swarm.agents])
            v = INERTIA * v + COGNITIVE * r1 * (pbest - x) + SOCIAL * r2 * (guide - x)
            x, clamped = _clamp(x + v)
            v[clamped] = 0.0
            current = swarm.evaluate(x)
            swarm.offer(current)
            new_obj = np.vstack([s.objective for s in current])
            better = _dominates_rows(new_obj, pbest_obj)
            worse = _dominates_rows(pbest_obj, new_obj)
            for i in np.flatnonzero(~better & ~worse).tolist():
                # mutually non-dominated (or equal): coin flip on the particle's own stream
                better[i] = swarm.agents[i].random() < 0.5
            pbest[better] = x[better]
            pbest_obj[better] = new_obj[better]
        return swarm

    swarm, elapsed = timed_call(body)
    return swarm.report(elapsed)


def ssa_c1(iteration: int, max_iterations: int) -> float:
    """Exploration coefficient of the salp leaders, decaying from 2 toward 0."""
    return 2.0 * math.exp(-((4.0 * iteration / max_iterations) ** 2))


def run_mssa(objective: Evaluator, cfg: SwarmConfig) -> RunReport:
    """Multi-objective salp swarm: leaders orbit an archive food source, followers chain."""
    cfg = replace(cfg, algorithm="mssa").validate()
    span = UPPER_BOUND - LOWER_BOUND

    def body() -> _Swarm:
        swarm = _Swarm(objective, cfg)
        n, m = cfg.population, cfg.dims
        n_leaders = n // 2
        x = swarm.initial_positions()
        swarm.offer(swarm.evaluate(x))

        for l in range(cfg.iterations):
            c1 = ssa_c1(l, cfg.iterations)
            food = swarm.archive.select_leader(swarm.control).position
            for i in range(n):
                if i < n_leaders:
                    g = swarm.agents[i]
                    c2 = g.random(m)
                    c3 = g.random(m)
                    step = c1 * (span * c2 + LOWER_BOUND)
                    x[i] = np.where(c3 >= 0.5, food + step, food - step)
                else:
                    x[i] = (x[i] + x[i - 1]) / 2.0
                x[i] = np.clip(x[i], LOWER_BOUND, UPPER_BOUND)
            swarm.offer(swarm.evaluate(x))
        return swarm

    swarm, elapsed = timed_call(body)
    return swarm.report(elapsed)


RUNNERS = {"mopso": run_mopso, "mssa": run_mssa}


def run_single(objective: Evaluator, cfg: SwarmConfig) -> RunReport:
    if cfg.algorithm in RESERVED_ALGORITHMS:
        raise NotImplementedError(
            f"{cfg.algorithm} is not implemented; supported algorithms: {', '.join(ALGORITHMS)}"
        )
    cfg.validate()
    return RUNNERS[cfg.algorithm](objective, cfg)


def run_batch(objective: Evaluator, cfg: SwarmConfig, threads: Optional[int] = 1) -> BatchReport:
    """``cfg.repeats`` independent runs seeded ``seed + k``, reported in seed order."""
    if cfg.algorithm in RESERVED_ALGORITHMS:
        run_single(objective, cfg)
    cfg.validate()
    configs = [replace(cfg, seed=cfg.seed + k) for k in range(cfg.repeats)]
    for c in configs:
        c.validate()
    workers = max(1, int(threads or 1))
    if workers == 1 or len(configs) == 1:
        runs = [run_single(objective, c) for c in configs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda c: run_single(objective, c), configs))
    return BatchReport(config=cfg, runs=runs)
