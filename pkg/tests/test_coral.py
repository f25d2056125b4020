import numpy as np
import pytest

from dostriage.coral import CoralTransform, coral_apply, coral_fit
from dostriage.errors import DimensionMismatch, TooFewRows


def _rel_frob(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def _pair(seed, n=5000, d=7):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, d)) @ rng.standard_normal((d, d))
    b = rng.standard_normal((n, d)) @ rng.standard_normal((d, d)) + 3.0
    return a, b


@pytest.mark.parametrize("seed", range(5))
def test_covariance_matched(seed):
    a, b = _pair(seed)
    out = coral_apply(coral_fit(a, b), a)
    assert _rel_frob(np.cov(out, rowvar=False), np.cov(b, rowvar=False)) < 1e-3
    np.testing.assert_allclose(out.mean(axis=0), b.mean(axis=0), atol=1e-10)


def test_identity_when_covariances_equal():
    a, _ = _pair(7)
    t = coral_fit(a, a[np.random.default_rng(0).permutation(len(a))])
    assert np.abs(t.t_matrix - np.eye(7)).max() < 1e-8


def test_scalar_example():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(400)
    a = (2.0 * (x - x.mean()) / x.std(ddof=1))[:, None]  # variance exactly 4
    y = rng.standard_normal(300)
    b = (3.0 * (y - y.mean()) / y.std(ddof=1))[:, None]  # variance exactly 9
    t = coral_fit(a, b, lam=0.0)
    assert t.t_matrix[0, 0] == pytest.approx(1.5, abs=1e-12)
    assert np.var(coral_apply(t, a), ddof=1) == pytest.approx(9.0, abs=1e-9)


def test_identity_apply():
    x = np.random.default_rng(1).random((20, 3))
    t = CoralTransform(np.eye(3), np.full(3, 0.5), np.full(3, 2.0), align_means=False)
    np.testing.assert_allclose(coral_apply(t, x), x, atol=1e-15)
    shifted = coral_apply(CoralTransform(np.eye(3), x.mean(axis=0), np.full(3, 2.0)), x)
    np.testing.assert_allclose(shifted.mean(axis=0), 2.0, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_never_worsens_mismatch(seed):
    a, b = _pair(seed, n=300, d=4)
    ca, cb = np.cov(a, rowvar=False), np.cov(b, rowvar=False)
    t = coral_fit(a, b, lam=0.0).t_matrix
    assert np.linalg.norm(t.T @ ca @ t - cb) <= np.linalg.norm(ca - cb)


def test_save_load(tmp_path):
    t = coral_fit(*_pair(3, n=100))
    t.save(tmp_path / "c.txt")
    u = CoralTransform.load(tmp_path / "c.txt")
    np.testing.assert_array_equal(t.t_matrix, u.t_matrix)
    assert (u.lam, u.align_means) == (t.lam, t.align_means)


def test_errors():
    with pytest.raises(TooFewRows):
        coral_fit(np.ones((3, 7)), np.ones((10, 7)))
    with pytest.raises(DimensionMismatch):
        coral_fit(np.ones((10, 7)), np.ones((10, 6)))
    t = coral_fit(*_pair(0, n=50))
    with pytest.raises(DimensionMismatch):
        coral_apply(t, np.ones((2, 6)))
