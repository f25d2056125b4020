import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dostriage.errors import DimensionMismatch, TooFewRows
from dostriage.preprocess import PreprocessParams, apply_preprocessor, fit_preprocessor


def _col(values):
    return np.asarray(values, dtype=float)[:, None]


def test_constant_column_is_degenerate():
    p = fit_preprocessor(_col([5, 5, 5, 5]))
    assert p.degenerate[0] and p.lo_clamp[0] == p.hi_clamp[0] == 5
    assert apply_preprocessor(p, _col([5, 7, -1])).tolist() == [[0.0], [0.0], [0.0]]


@pytest.mark.parametrize("n, lo, hi", [(10, 0.009, 8.991), (1000, 0.999, 998.001)])
def test_clamp_quantiles(n, lo, hi):
    p = fit_preprocessor(_col(range(n)))
    assert p.lo_clamp[0] == pytest.approx(lo, abs=1e-12)
    assert p.hi_clamp[0] == pytest.approx(hi, abs=1e-12)


def test_saturation_and_midpoint():
    p = PreprocessParams(
        np.array([0.0]), np.array([100.0]), np.array([2.0]), np.array([10.0]), np.array([False])
    )
    out = apply_preprocessor(p, _col([-5, 1, 6, 10, 50]))
    assert out.ravel().tolist() == [0.0, 0.0, 0.5, 1.0, 1.0]


def test_fitted_max_maps_to_one():
    x = np.random.default_rng(0).lognormal(size=(500, 3))
    p = fit_preprocessor(x)
    out = apply_preprocessor(p, x)
    assert out.min() == 0.0 and out.max() == 1.0


def test_errors():
    with pytest.raises(TooFewRows):
        fit_preprocessor(np.ones((1, 7)))
    p = fit_preprocessor(np.random.default_rng(0).random((10, 7)))
    with pytest.raises(DimensionMismatch):
        apply_preprocessor(p, np.ones((3, 6)))


def test_foreign_domain_is_logged(caplog):
    p = fit_preprocessor(np.random.default_rng(0).random((10, 7)), domain="a")
    apply_preprocessor(p, np.ones((2, 7)), domain="b")
    assert "applying 'a' preprocessor to 'b' data" in caplog.text


def test_save_load_round_trip(tmp_path):
    p = fit_preprocessor(np.random.default_rng(0).lognormal(size=(100, 7)), domain="d")
    p.save(tmp_path / "p.txt")
    q = PreprocessParams.load(tmp_path / "p.txt")
    for a, b in zip(
        (p.lo_clamp, p.hi_clamp, p.min_val, p.max_val, p.degenerate),
        (q.lo_clamp, q.hi_clamp, q.min_val, q.max_val, q.degenerate),
    ):
        np.testing.assert_array_equal(a, b)
    assert q.domain == "d" and q.feature_names == p.feature_names


_mat = arrays(
    np.float64,
    st.tuples(st.integers(2, 40), st.integers(1, 4)),
    elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
)


@given(_mat, _mat)
def test_output_in_unit_interval(train, x):
    if train.shape[1] != x.shape[1]:
        x = np.resize(x, (x.shape[0], train.shape[1]))
    out = apply_preprocessor(fit_preprocessor(train), x)
    assert np.all((out >= 0) & (out <= 1))


@given(_mat, st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=20))
def test_monotone_per_column(train, values):
    p = fit_preprocessor(train)
    v = np.sort(np.asarray(values))
    x = np.repeat(v[:, None], train.shape[1], axis=1)
    out = apply_preprocessor(p, x)
    assert np.all(np.diff(out, axis=0) >= 0)


@given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 3)), elements=st.floats(0, 1)))
def test_idempotent_on_unit_data(x):
    # pin the clamps at 0 and 1 so the fitted quantiles are exactly the range
    x = np.vstack([np.zeros((2000, x.shape[1])), x, np.ones((2000, x.shape[1]))])
    p = fit_preprocessor(x)
    np.testing.assert_allclose(apply_preprocessor(p, x), x, atol=1e-12)
