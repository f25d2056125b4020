"""CORrelation ALignment: whiten the source covariance and recolour with the target's."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteCovariance, TooFewRows
from .textio import read_matrix_blocks, write_matrix_blocks


@dataclass(frozen=True)
class CoralTransform:
    t_matrix: np.ndarray
    source_mean: np.ndarray
    target_mean: np.ndarray
    lam: float = 1e-6
    align_means: bool = True

    @property
    def dim(self) -> int:
        return self.t_matrix.shape[0]

    def save(self, path) -> None:
        write_matrix_blocks(
            path,
            [
                ("t_matrix", self.t_matrix),
                ("source_mean", self.source_mean[None, :]),
                ("target_mean", self.target_mean[None, :]),
                ("lambda", np.array([[self.lam]])),
                ("align_means", np.array([[float(self.align_means)]])),
            ],
        )

    @classmethod
    def load(cls, path) -> "CoralTransform":
        b = dict(read_matrix_blocks(path))
        return cls(
            b["t_matrix"],
            b["source_mean"].ravel(),
            b["target_mean"].ravel(),
            float(b["lambda"][0, 0]),
            bool(b["align_means"][0, 0]),
        )


def _sym_power(c: np.ndarray, lam: float, power: float) -> np.ndarray:
    w, v = np.linalg.eigh(c)
    w = np.maximum(w, 0.0) + lam
    return (v * w**power) @ v.T


def _covariance(x: np.ndarray) -> np.ndarray:
    c = np.cov(x, rowvar=False, ddof=1)
    c = np.atleast_2d(c)
    if not np.all(np.isfinite(c)):
        raise NonFiniteCovariance("covariance has non-finite entries")
    return 0.5 * (c + c.T)


def coral_fit(source, target, lam: float = 1e-6, align_means: bool = True) -> CoralTransform:
    xs = np.asarray(source, dtype=np.float64)
    xt = np.asarray(target, dtype=np.float64)
    if xs.ndim != 2 or xt.ndim != 2 or xs.shape[1] != xt.shape[1]:
        raise DimensionMismatch(f"source {xs.shape} and target {xt.shape} disagree")
    d = xs.shape[1]
    if xs.shape[0] < d + 1 or xt.shape[0] < d + 1:
        raise TooFewRows(f"need at least {d + 1} rows per domain")
    cs, ct = _covariance(xs), _covariance(xt)
    t = _sym_power(cs, lam, -0.5) @ _sym_power(ct, lam, 0.5)
    if not np.all(np.isfinite(t)):
        raise NonFiniteCovariance("transfer matrix is not finite; raise lambda")
    return CoralTransform(t, xs.mean(axis=0), xt.mean(axis=0), lam, align_means)


def coral_apply(t: CoralTransform, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != t.dim:
        raise DimensionMismatch(f"expected {t.dim} columns, got shape {x.shape}")
    shift = t.target_mean if t.align_means else t.source_mean
    return (x - t.source_mean) @ t.t_matrix + shift
