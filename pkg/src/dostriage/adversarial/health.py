"""Training-health verdicts from congruence and ListMLE loss traces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyTrace
from ..stats import DEFAULT_LEVELS


@dataclass(frozen=True)
class HealthConfig:
    cm_window: int = 500
    cm_slope_max: float = 0.0
    loss_spike_ratio: float = 1.5
    loss_tail_window: int = 500
    # congruence is judged from the first record after the ListMLE loss has
    # fallen by this fraction; before that the embedding is still forming
    onset_drop: float = 0.1

    def __post_init__(self):
        if self.cm_window < 2 or self.loss_tail_window < 2:
            raise ValueError("health windows must be >= 2")
        if not 0.0 <= self.onset_drop < 1.0:
            raise ValueError("onset_drop must lie in [0, 1)")


@dataclass(frozen=True)
class HealthVerdict:
    accepted: bool
    reasons: tuple = ()


@dataclass
class CongruenceTrace:
    iterations: list = field(default_factory=list)
    levels: tuple = DEFAULT_LEVELS
    values: list = field(default_factory=list)  # one row of len(levels) per iteration

    def append(self, iteration: int, row) -> None:
        self.iterations.append(int(iteration))
        self.values.append(np.asarray(row, dtype=np.float64))

    def matrix(self) -> np.ndarray:
        if not self.values:
            return np.zeros((0, len(self.levels)))
        return np.vstack(self.values)

    def __len__(self):
        return len(self.iterations)


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    return float(xc @ (y - y.mean()) / (xc @ xc))


def ranking_onset(loss, drop: float) -> int | None:
    """Iteration count after which the loss first sits ``drop`` below its start, or None."""
    loss = np.asarray(loss, dtype=np.float64).ravel()
    below = np.flatnonzero(loss <= (1.0 - drop) * loss[0])
    return int(below[0]) + 1 if below.size else None


def health_check(cm: CongruenceTrace, loss, cfg: HealthConfig = HealthConfig()) -> HealthVerdict:
    """Accept a replicate when every congruence level trends down and the loss tail is calm.

    ``loss`` is the per-iteration ListMLE loss.  The congruence trend is
    measured from the first record at or after the ranking onset (see
    :func:`ranking_onset`).  Each failed criterion adds a reason naming the
    offending quantile level, the stalled loss or the spike ratio.
    """
    loss = np.asarray(loss, dtype=np.float64).ravel()
    if len(cm) == 0 or loss.size == 0:
        raise EmptyTrace("health_check needs non-empty congruence and loss traces")
    reasons = []
    its = np.asarray(cm.iterations, dtype=np.float64)
    values = cm.matrix()
    onset = ranking_onset(loss, cfg.onset_drop) if np.all(np.isfinite(loss)) else None
    if onset is None:
        reasons.append(f"listmle loss: never fell {cfg.onset_drop:g} below its initial value")
        start = 0
    else:
        start = int(np.searchsorted(its, onset))
    its, values = its[start:], values[start:]
    if len(its) < 2:
        reasons.append("congruence trace has fewer than 2 points after the ranking onset")
    else:
        for j, c in enumerate(cm.levels):
            col = values[:, j]
            slope = _slope(its, col)
            if not np.isfinite(slope) or slope > cfg.cm_slope_max:
                reasons.append(f"cm level {c:g}: slope {slope:.3g} above {cfg.cm_slope_max:g}")
            if col[-1] > col[0]:
                reasons.append(f"cm level {c:g}: final {col[-1]:.4g} above initial {col[0]:.4g}")
    if not np.all(np.isfinite(loss)):
        reasons.append("listmle loss: non-finite values")
    else:
        tail = loss[-cfg.loss_tail_window :]
        med = float(np.median(tail))
        peak = float(tail.max())
        if peak > cfg.loss_spike_ratio * med:
            ratio = peak / med if med > 0 else float("inf")
            reasons.append(
                f"listmle loss: tail spike {ratio:.3g}x median exceeds {cfg.loss_spike_ratio:g}x"
            )
    return HealthVerdict(not reasons, tuple(reasons))
