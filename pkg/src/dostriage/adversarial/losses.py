"""ListMLE (Plackett-Luce) ranking loss and the Siamese contrastive loss."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyInput, NegativeDistance


def listmle_loss(scores, top_k: int | None = None, strict: bool = False) -> tuple[float, np.ndarray]:
    """Negative Plackett-Luce log-likelihood of the given order, best item first.

    Only the first ``top_k`` positions contribute a term; each term's
    normaliser runs over the items at or after that position (``strict``
    drops the item itself from its own normaliser, and a position with an
    empty normaliser is skipped).  Returns the loss and d(loss)/d(scores).
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    n = s.size
    if n == 0:
        raise EmptyInput("listmle_loss needs at least one score")
    k = n if top_k is None else int(top_k)
    if not 1 <= k <= n:
        raise ValueError(f"top_k={k} must lie in [1, {n}]")
    # suffix log-sum-exp: lse[i] = log sum_{j >= i} exp(s_j)
    lse = np.logaddexp.accumulate(s[::-1])[::-1]
    if strict:
        norm = np.append(lse[1:], -np.inf)[:k]
        valid = np.isfinite(norm)
    else:
        norm = lse[:k]
        valid = np.ones(k, dtype=bool)
    loss = float(np.sum(norm[valid] - s[:k][valid]))
    # d/ds_j of sum_i norm_i = sum over contributing i whose normaliser holds j
    #   of exp(s_j - norm_i) = exp(s_j + log sum_i exp(-norm_i))
    neg = np.full(n, -np.inf)
    neg[:k][valid] = -norm[valid]
    if strict:
        # normaliser i covers j > i, so shift contributions one slot right
        neg = np.concatenate([[-np.inf], neg[:-1]])
    cum = np.logaddexp.accumulate(neg)
    grad = np.exp(s + cum)
    grad[:k][valid] -= 1.0
    return loss, grad


def contrastive_loss(d, y, margin: float = 2.0):
    """0.5 * ((1 - Y) * d + Y * max(0, m - d)) and its derivative in ``d``.

    Works elementwise on arrays; scalars in give scalars out.
    """
    d_arr = np.asarray(d, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    if np.any(d_arr < 0):
        raise NegativeDistance("squared distance must be non-negative")
    if margin <= 0:
        raise ValueError("margin must be positive")
    hinge = np.maximum(0.0, margin - d_arr)
    loss = 0.5 * ((1.0 - y_arr) * d_arr + y_arr * hinge)
    grad = 0.5 * (1.0 - y_arr) - 0.5 * y_arr * (d_arr < margin)
    if np.ndim(loss) == 0:
        return float(loss), float(grad)
    return loss, grad
