"""Quantile clamping followed by min-max scaling, fitted per domain on a training split."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InputError, TooFewRows
from .flows import FEATURES

log = logging.getLogger(__name__)

LOW_QUANTILE = 0.001
HIGH_QUANTILE = 0.999


@dataclass(frozen=True)
class PreprocessParams:
    lo_clamp: np.ndarray
    hi_clamp: np.ndarray
    min_val: np.ndarray
    max_val: np.ndarray
    degenerate: np.ndarray
    domain: str | None = None
    feature_names: tuple = FEATURES

    @property
    def n_features(self) -> int:
        return len(self.lo_clamp)

    def save(self, path) -> None:
        lines = ["# feature = lo_clamp hi_clamp min_val max_val degenerate"]
        if self.domain is not None:
            lines.append(f"domain = {self.domain}")
        for j, name in enumerate(self.feature_names):
            vals = " ".join(
                repr(float(a[j])) for a in (self.lo_clamp, self.hi_clamp, self.min_val, self.max_val)
            )
            lines.append(f"{name} = {vals} {int(self.degenerate[j])}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PreprocessParams":
        from .textio import read_kv

        kv = read_kv(path)
        domain = kv.pop("domain", None)
        names = tuple(kv)
        try:
            cols = np.array([[float(v) for v in kv[n].split()] for n in names]).reshape(len(names), 5)
        except ValueError as exc:
            raise InputError(f"{path}: malformed preprocessor file") from exc
        return cls(cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3], cols[:, 4].astype(bool), domain, names)


def fit_preprocessor(train, domain: str | None = None) -> PreprocessParams:
    """Fit clamp quantiles (linear interpolation) and post-clamp min/max per column."""
    x = np.asarray(train, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewRows("need at least 2 training rows")
    lo = np.quantile(x, LOW_QUANTILE, axis=0, method="linear")
    hi = np.quantile(x, HIGH_QUANTILE, axis=0, method="linear")
    clamped = np.clip(x, lo, hi)
    mn, mx = clamped.min(axis=0), clamped.max(axis=0)
    names = FEATURES if x.shape[1] == len(FEATURES) else tuple(f"x{j}" for j in range(x.shape[1]))
    return PreprocessParams(lo, hi, mn, mx, mx == mn, domain, names)


def apply_preprocessor(params: PreprocessParams, x, domain: str | None = None) -> np.ndarray:
    """Clamp into the fitted quantile range and scale to [0, 1].

    Values outside the fitted range saturate at 0 or 1; degenerate columns
    map to 0.  Applying parameters fitted on another domain is allowed but
    logged.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.n_features:
        raise DimensionMismatch(f"expected {params.n_features} columns, got shape {x.shape}")
    if domain is not None and params.domain is not None and domain != params.domain:
        log.warning("applying %r preprocessor to %r data", params.domain, domain)
    span = np.where(params.degenerate, 1.0, params.max_val - params.min_val)
    out = (np.clip(x, params.lo_clamp, params.hi_clamp) - params.min_val) / span
    out = np.clip(out, 0.0, 1.0)
    out[:, params.degenerate] = 0.0
    return out
