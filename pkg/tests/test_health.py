import numpy as np
import pytest

from dostriage.adversarial.health import CongruenceTrace, HealthConfig, health_check, ranking_onset
from dostriage.errors import EmptyTrace

LEVELS = (0.1, 0.5, 0.9)


def _trace(rows, iterations=None):
    t = CongruenceTrace(levels=LEVELS)
    its = iterations if iterations is not None else range(0, 500 * len(rows), 500)
    for it, row in zip(its, rows):
        t.append(it, row)
    return t


def _learning_loss(n=3000, tail=None):
    loss = 800.0 * np.exp(-np.arange(n) / 300.0) + 600.0
    if tail is not None:
        loss[-tail[0]] = tail[1]
    return loss


def test_decreasing_is_accepted():
    rows = np.linspace(0.5, 0.01, 7)[:, None] * np.ones(3)
    v = health_check(_trace(rows), _learning_loss())
    assert v.accepted and v.reasons == ()


def test_rising_level_is_named():
    rows = np.linspace(0.5, 0.01, 7)[:, None] * np.ones(3)
    rows[:, 1] = np.linspace(0.01, 0.3, 7)
    v = health_check(_trace(rows), _learning_loss())
    assert not v.accepted
    assert any(r.startswith("cm level 0.5: slope") for r in v.reasons)
    assert any(r.startswith("cm level 0.5: final") for r in v.reasons)
    assert not any("level 0.1" in r or "level 0.9" in r for r in v.reasons)


def test_tail_spike_rejected():
    rows = np.linspace(0.5, 0.01, 7)[:, None] * np.ones(3)
    v = health_check(_trace(rows), _learning_loss(tail=(10, 2.0 * 600.0)))
    assert not v.accepted and v.reasons[0].startswith("listmle loss: tail spike")


def test_stalled_loss_rejected():
    rows = np.linspace(0.5, 0.01, 7)[:, None] * np.ones(3)
    v = health_check(_trace(rows), np.full(3000, 810.0))
    assert not v.accepted and "never fell" in v.reasons[0]


def test_trend_measured_from_onset():
    # the embedding forms during the first records; only what follows counts
    rows = np.array([[0.0] * 3, [0.0] * 3, [0.4] * 3, [0.2] * 3, [0.1] * 3, [0.05] * 3])
    loss = np.concatenate([np.full(1000, 800.0), np.full(2000, 600.0)])
    assert ranking_onset(loss, 0.1) == 1001
    v = health_check(_trace(rows), loss)
    assert v.accepted
    v = health_check(_trace(rows), loss, HealthConfig(onset_drop=0.0))
    assert not v.accepted


def test_non_finite_loss():
    rows = np.linspace(0.5, 0.01, 7)[:, None] * np.ones(3)
    loss = _learning_loss()
    loss[5] = np.nan
    v = health_check(_trace(rows), loss)
    assert "listmle loss: non-finite values" in v.reasons


def test_short_trace():
    v = health_check(_trace(np.ones((1, 3))), _learning_loss())
    assert not v.accepted and "fewer than 2 points" in v.reasons[-1]


def test_errors():
    with pytest.raises(EmptyTrace):
        health_check(_trace([]), [1.0])
    with pytest.raises(EmptyTrace):
        health_check(_trace(np.ones((2, 3))), [])
    with pytest.raises(ValueError):
        HealthConfig(cm_window=1)
    with pytest.raises(ValueError):
        HealthConfig(onset_drop=1.0)
