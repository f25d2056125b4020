"""Rolling TopN accuracy curves and replicate aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch, SizeMismatch

DOS = 1


@dataclass(frozen=True)
class RollingTopNCurve:
    values: np.ndarray
    n_total: int
    n_positive: int

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class CurveBand:
    mean: np.ndarray
    sigma: np.ndarray
    n_replicates: int
    upper: np.ndarray
    lower: np.ndarray


def priority_order(scores, priority: str = "high") -> np.ndarray:
    """Row indices from highest to lowest triage priority, ties by index.

    ``priority="high"`` treats large scores as most DoS-like (descending
    sort); ``"low"`` treats small scores as most DoS-like.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    if priority == "high":
        key = -s
    elif priority == "low":
        key = s
    else:
        raise ValueError(f"priority must be 'high' or 'low', not {priority!r}")
    return np.argsort(key, kind="stable")


def rolling_topn(scores, truth, positive=DOS, priority: str = "high") -> RollingTopNCurve:
    scores = np.asarray(scores).ravel()
    truth = np.asarray(truth).ravel()
    if scores.shape != truth.shape or scores.size == 0:
        raise SizeMismatch("scores and truth must have equal, nonzero length")
    hits = (truth[priority_order(scores, priority)] == positive).astype(np.int64)
    values = np.cumsum(hits) / np.arange(1, hits.size + 1)
    return RollingTopNCurve(values, int(hits.size), int(hits.sum()))


def top100(curve: RollingTopNCurve, n: int = 100) -> tuple[np.ndarray, bool]:
    """First ``n`` curve values and a flag set when the curve is shorter than ``n``."""
    return curve.values[:n].copy(), len(curve.values) < n


def top100_accuracy(curve: RollingTopNCurve, n: int = 100) -> float:
    """Fraction of DoS among the ``n`` highest-priority rows (the curve value at ``n``)."""
    return float(curve.values[min(n, len(curve.values)) - 1])


def bound_curves(n_total: int, n_positive: int) -> tuple[np.ndarray, np.ndarray]:
    """Perfect-ranking (upper) and all-positives-last (lower) curves."""
    n = np.arange(1, n_total + 1)
    upper = np.minimum(n, n_positive) / n
    lower = np.maximum(0, n - (n_total - n_positive)) / n
    return upper, lower


def aggregate_replicates(curves) -> CurveBand:
    curves = list(curves)
    if not curves:
        raise EmptyInput("no curves to aggregate")
    first = curves[0]
    if any(len(c) != len(first) or c.n_positive != first.n_positive for c in curves):
        raise LengthMismatch("replicate curves must share length and positive count")
    stack = np.vstack([c.values for c in curves])
    upper, lower = bound_curves(first.n_total, first.n_positive)
    return CurveBand(stack.mean(axis=0), stack.std(axis=0), len(curves), upper, lower)
