"""Exact k-nearest-neighbour baseline and F-measure scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KTooLarge, SizeMismatch

DOS = 1


@dataclass(frozen=True)
class KnnModel:
    store: np.ndarray
    labels: np.ndarray
    k: int = 1

    @property
    def sq_norms(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.store, self.store)


def knn_fit(x, y, k: int = 1) -> KnnModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise SizeMismatch(f"{x.shape[0] if x.ndim else 0} rows but {y.shape[0]} labels")
    if k < 1 or k > x.shape[0]:
        raise KTooLarge(f"k={k} must lie in [1, {x.shape[0]}]")
    return KnnModel(x.copy(), y.copy(), int(k))


def _neighbours(m: KnnModel, q: np.ndarray, sq_store: np.ndarray) -> np.ndarray:
    """Indices of the k nearest store rows for each query row.

    Candidates are screened with the expanded squared distance, then the
    short list is re-ranked on exactly computed distances so ties resolve to
    the lower store index.
    """
    approx = (q * q).sum(axis=1)[:, None] - 2.0 * q @ m.store.T + sq_store[None, :]
    k = m.k
    kth = np.partition(approx, k - 1, axis=1)[:, k - 1]
    # bound on rounding error of the expanded form
    tol = 1e-9 * ((q * q).sum(axis=1) + sq_store.max() + 1.0)
    out = np.empty((q.shape[0], k), dtype=np.int64)
    for r in range(q.shape[0]):
        cand = np.flatnonzero(approx[r] <= kth[r] + tol[r])
        diff = m.store[cand] - q[r]
        exact = np.einsum("ij,ij->i", diff, diff)
        order = np.lexsort((cand, exact))[:k]
        out[r] = cand[order]
    return out


def knn_predict(m: KnnModel, x, chunk: int | None = None) -> np.ndarray:
    """Majority label among the k nearest stored rows (vote ties go to DoS)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.store.shape[1]:
        raise DimensionMismatch(f"expected {m.store.shape[1]} columns, got shape {x.shape}")
    sq_store = m.sq_norms
    chunk = chunk or max(16, 4_000_000 // m.store.shape[0])
    pred = np.empty(x.shape[0], dtype=m.labels.dtype)
    for start in range(0, x.shape[0], chunk):
        idx = _neighbours(m, x[start : start + chunk], sq_store)
        votes = m.labels[idx]
        if m.k == 1:
            pred[start : start + chunk] = votes[:, 0]
            continue
        n_dos = (votes == DOS).sum(axis=1)
        pred[start : start + chunk] = np.where(2 * n_dos >= m.k, DOS, 0)
    return pred


def f_measure(pred, truth, positive=DOS) -> float:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape or pred.size == 0:
        raise SizeMismatch("pred and truth must have equal, nonzero length")
    p = pred == positive
    t = truth == positive
    tp = int(np.sum(p & t))
    if tp == 0:
        return 0.0
    precision = tp / int(p.sum())
    recall = tp / int(t.sum())
    return 2 * precision * recall / (precision + recall)
