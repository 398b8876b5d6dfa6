"""Otsu and Kapur threshold scores and the vector objectives built on them.

A threshold vector ``t = (t_1, ..., t_m)`` splits the 256 intensity levels into
``m + 1`` classes; class ``j`` holds every level ``i`` with
``t_{j-1} <= i <= t_j - 1`` where the implicit sentinels are ``t_0 = 0`` and
``t_{m+1} = 256``. The same ``t`` is applied to the R, G and B channels.

Every score is finite for every threshold vector: an empty class (zero
probability mass, e.g. from a duplicated threshold) contributes nothing to
either sum, and ``0 * ln 0`` is taken as 0.

The four vector objectives are minimization problems; each raw score ``f``
is mapped through ``1 / (1 + f)``:

* ``J1``: per-channel Kapur entropy (3 components)
* ``J2``: per-channel Otsu between-class variance (3 components)
* ``J3``: Otsu R, G, B followed by Kapur R, G, B (6 components)
* ``J4``: Euclidean norms of the Otsu and Kapur 3-vectors (2 components)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .histio import LEVELS, Histogram256

ThresholdVector = Tuple[int, ...]
HistLike = Union[Histogram256, np.ndarray, Sequence[float]]

_LEVEL_INDEX = np.arange(LEVELS, dtype=np.float64)


class ObjectiveKind(str, enum.Enum):
    J1 = "j1"
    J2 = "j2"
    J3 = "j3"
    J4 = "j4"

    @property
    def dim(self) -> int:
        return {"j1": 3, "j2": 3, "j3": 6, "j4": 2}[self.value]

    @classmethod
    def parse(cls, value: Union[str, "ObjectiveKind"]) -> "ObjectiveKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown objective {value!r}; expected one of {names}") from None


@dataclass(frozen=True)
class ClassStats:
    """Probability mass ``omega`` and mean intensity ``mu`` of each class."""

    omega: np.ndarray
    mu: np.ndarray


def as_thresholds(t: Sequence[int]) -> ThresholdVector:
    """Validate an explicit threshold vector: integers in [0, 255], sorted."""
    out = tuple(int(v) for v in t)
    if any(float(a) != float(b) for a, b in zip(out, t)):
        raise ValueError(f"thresholds must be integers: {list(t)}")
    if any(v < 0 or v > LEVELS - 1 for v in out):
        raise ValueError(f"thresholds must lie in [0, {LEVELS - 1}]: {list(out)}")
    if any(a > b for a, b in zip(out, out[1:])):
        raise ValueError(f"thresholds must be sorted: {list(out)}")
    return out


def decode_position(x: Sequence[float]) -> ThresholdVector:
    """Map a continuous swarm position onto a valid threshold vector.

    Clamp to [0, 255], round half away from zero, sort. Duplicates are kept.
    """
    arr = np.clip(np.asarray(x, dtype=np.float64), 0.0, LEVELS - 1.0)
    # non-negative after clamping, so floor(v + 0.5) is half-away-from-zero
    return tuple(int(v) for v in np.sort(np.floor(arr + 0.5)))


def decode_positions(X: np.ndarray) -> list:
    """Row-wise :func:`decode_position` for a whole population."""
    arr = np.clip(np.asarray(X, dtype=np.float64), 0.0, LEVELS - 1.0)
    decoded = np.sort(np.floor(arr + 0.5), axis=1).astype(np.int64)
    return [tuple(row) for row in decoded.tolist()]


def _probs(hist: HistLike) -> np.ndarray:
    if isinstance(hist, Histogram256):
        return hist.probs
    p = np.asarray(hist, dtype=np.float64)
    if p.shape != (LEVELS,):
        raise ValueError(f"histogram needs {LEVELS} bins, got shape {p.shape}")
    return p


def _stack(hists: Sequence[HistLike]) -> np.ndarray:
    return np.stack([_probs(h) for h in hists])


def class_labels(t: Sequence[int]) -> np.ndarray:
    """Class index of each intensity level 0..255 under threshold vector ``t``."""
    return np.searchsorted(np.asarray(t, dtype=np.int64), np.arange(LEVELS), side="right")


class ScoreTable:
    """Per-channel Otsu and Kapur evaluation for a stack of histograms.

    Holds the ``(channels, 256)`` probability matrix and the precomputed
    per-channel total means so repeated evaluations only pay for the class
    sums. Evaluation is reentrant.
    """

    def __init__(self, probs: np.ndarray):
        probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
        if probs.shape[1] != LEVELS:
            raise ValueError(f"histograms need {LEVELS} bins, got shape {probs.shape}")
        self.probs = probs
        self.n_channels = probs.shape[0]
        self.weighted = probs * _LEVEL_INDEX
        self.total_mean = self.weighted.sum(axis=1)
        self._flat_p = probs.ravel()
        self._flat_w = self.weighted.ravel()
        nonzero = probs > 0
        self._log_p = np.log(probs, out=np.zeros_like(probs), where=nonzero)

    def _class_sums(self, t: Sequence[int]):
        labels = class_labels(t)
        n_classes = len(t) + 1
        offsets = (np.arange(self.n_channels) * n_classes)[:, None]
        flat_labels = (labels[None, :] + offsets).ravel()
        size = self.n_channels * n_classes
        omega = np.bincount(flat_labels, weights=self._flat_p, minlength=size)
        first = np.bincount(flat_labels, weights=self._flat_w, minlength=size)
        return labels, flat_labels, omega.reshape(self.n_channels, n_classes), first.reshape(
            self.n_channels, n_classes
        )

    def class_stats(self, t: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        _, _, omega, first = self._class_sums(t)
        mu = np.divide(first, omega, out=np.zeros_like(first), where=omega > 0)
        return omega, mu

    def scores(self, t: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(otsu, kapur)`` arrays with one entry per channel."""
        otsu, entropies = self._scores_by_class(t)
        return otsu.sum(axis=1), entropies.sum(axis=1)

    def _scores_by_class(self, t: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        labels, flat_labels, omega, first = self._class_sums(t)
        occupied = omega > 0
        safe_omega = np.where(occupied, omega, 1.0)
        mu = np.where(occupied, first / safe_omega, 0.0)
        between = np.where(occupied, omega * (mu - self.total_mean[:, None]) ** 2, 0.0)

        # q_i ln q_i with q_i = p_i / omega_j, written as q_i (ln p_i - ln omega_j);
        # zero-probability bins have q_i = 0 and ln p_i stored as 0, so they add 0
        inv_omega = np.where(occupied, 1.0 / safe_omega, 0.0)[:, labels]
        log_omega = np.log(safe_omega)[:, labels]
        plogp = self.probs * inv_omega * (self._log_p - log_omega)
        entropies = -np.bincount(flat_labels, weights=plogp.ravel(), minlength=omega.size)
        return between, entropies.reshape(omega.shape)

    def class_entropies(self, t: Sequence[int]) -> np.ndarray:
        return self._scores_by_class(t)[1]


def class_stats(hist: HistLike, t: Sequence[int]) -> ClassStats:
    omega, mu = ScoreTable(_probs(hist)).class_stats(t)
    return ClassStats(omega=omega[0], mu=mu[0])


def total_mean(hist: HistLike) -> float:
    return float(ScoreTable(_probs(hist)).total_mean[0])


def otsu_score(hist: HistLike, t: Sequence[int]) -> float:
    """Between-class variance of one channel."""
    return float(ScoreTable(_probs(hist)).scores(t)[0][0])


def kapur_score(hist: HistLike, t: Sequence[int]) -> float:
    """Sum of the within-class Shannon entropies (natural log) of one channel."""
    return float(ScoreTable(_probs(hist)).scores(t)[1][0])


def class_entropies(hist: HistLike, t: Sequence[int]) -> np.ndarray:
    return ScoreTable(_probs(hist)).class_entropies(t)[0]


def otsu_vector(hists: Sequence[HistLike], t: Sequence[int]) -> np.ndarray:
    return ScoreTable(_stack(hists)).scores(t)[0]


def kapur_vector(hists: Sequence[HistLike], t: Sequence[int]) -> np.ndarray:
    return ScoreTable(_stack(hists)).scores(t)[1]


def to_minimization(raw) -> np.ndarray:
    return 1.0 / (1.0 + np.asarray(raw, dtype=np.float64))


def raw_components(kind: Union[str, ObjectiveKind], otsu: np.ndarray, kapur: np.ndarray) -> np.ndarray:
    """Maximization-domain values behind each component of objective ``kind``."""
    kind = ObjectiveKind.parse(kind)
    if kind is ObjectiveKind.J1:
        return np.array(kapur, dtype=np.float64)
    if kind is ObjectiveKind.J2:
        return np.array(otsu, dtype=np.float64)
    if kind is ObjectiveKind.J3:
        return np.concatenate([otsu, kapur])
    return np.array([math.hypot(*otsu), math.hypot(*kapur)])


class VectorObjective:
    """Callable evaluating one of J1..J4 for a fixed RGB histogram triple.

    ``objective(t)`` returns ``(values, raw)`` where ``values`` are the
    minimization components in (0, 1] and ``raw`` the untransformed scores.
    """

    def __init__(self, hists: Sequence[HistLike], kind: Union[str, ObjectiveKind]):
        if len(hists) != 3:
            raise ValueError(f"expected R, G, B histograms, got {len(hists)}")
        self.kind = ObjectiveKind.parse(kind)
        self.dim = self.kind.dim
        self.table = ScoreTable(_stack(hists))

    def __call__(self, t: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        otsu, kapur = self.table.scores(t)
        raw = raw_components(self.kind, otsu, kapur)
        return to_minimization(raw), raw


def eval_j1(hists: Sequence[HistLike], t: Sequence[int]) -> np.ndarray:
    return VectorObjective(hists, ObjectiveKind.J1)(t)[0]


def eval_j2(hists: Sequence[HistLike], t: Sequence[int]) -> np.ndarray:
    return VectorObjective(hists, ObjectiveKind.J2)(t)[0]


def eval_j3(hists: Sequence[HistLike], t: Sequence[int]) -> np.ndarray:
    return VectorObjective(hists, ObjectiveKind.J3)(t)[0]


def eval_j4(hists: Sequence[HistLike], t: Sequence[int]) -> np.ndarray:
    return VectorObjective(hists, ObjectiveKind.J4)(t)[0]


EVALUATORS = {
    ObjectiveKind.J1: eval_j1,
    ObjectiveKind.J2: eval_j2,
    ObjectiveKind.J3: eval_j3,
    ObjectiveKind.J4: eval_j4,
}
