"""Joint ListMLE + reversed-gradient Siamese training of the shared embedding."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import MissingClass
from ..stats import DEFAULT_LEVELS, congruence_profile
from .health import CongruenceTrace, HealthConfig, HealthVerdict, health_check
from .losses import contrastive_loss, listmle_loss
from .network import (
    MlpParams,
    backprop_layers,
    forward_embed,
    init_model,
    pad_features,
    run_layers,
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    iterations: int = 5000
    rank_batch: int = 300
    pair_batch: int = 128
    margin: float = 2.0
    top_k: int = 150
    adv_weight: float = 1.0
    quantile_levels: tuple = DEFAULT_LEVELS
    rng_seed: int = 0
    health: HealthConfig = field(default_factory=HealthConfig)
    cm_sample: int = 5000
    listmle_strict: bool = False

    def __post_init__(self):
        for name in ("rank_batch", "pair_batch", "top_k", "cm_sample"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.top_k > self.rank_batch:
            raise ValueError("top_k cannot exceed rank_batch")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class RankingBatch:
    """Rows in ground-truth priority order (DoS block first) with targets y_i = i/N."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @classmethod
    def from_classes(cls, x_dos, x_normal) -> "RankingBatch":
        x = np.vstack([x_dos, x_normal])
        return cls(x, np.arange(x.shape[0]) / x.shape[0])


@dataclass(frozen=True)
class PairBatch:
    """Row pairs with Y = 1 for cross-domain pairs and 0 for same-domain pairs."""

    xa: np.ndarray
    xb: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class StepGradients:
    listmle: float
    contrastive: float
    rank: list  # (dW, db) per embedding + head layer
    pair: list  # (dW, db) per embedding layer
    combined: list  # (dW, db) per embedding + head layer


def step_gradients(model: MlpParams, rb: RankingBatch, pb: PairBatch, cfg: TrainConfig) -> StepGradients:
    """Gradients of both losses and their combination with the reversed discriminator term."""
    n_embed = len(model.embed)

    e_acts = run_layers(model.embed, pad_features(rb.x))
    h_acts = run_layers(model.head, e_acts[-1])
    loss_l, g_scores = listmle_loss(h_acts[-1][:, 0], cfg.top_k, cfg.listmle_strict)
    head_g, g_embed = backprop_layers(model.head, h_acts, g_scores[:, None])
    embed_g, _ = backprop_layers(model.embed, e_acts, g_embed)
    rank = embed_g + head_g

    n_pairs = pb.xa.shape[0]
    p_acts = run_layers(model.embed, pad_features(np.vstack([pb.xa, pb.xb])))
    emb = p_acts[-1]
    diff = emb[:n_pairs] - emb[n_pairs:]
    d = np.einsum("ij,ij->i", diff, diff)
    per_pair, g_d = contrastive_loss(d, pb.y, cfg.margin)
    g_ea = 2.0 * diff * g_d[:, None]
    pair, _ = backprop_layers(model.embed, p_acts, np.vstack([g_ea, -g_ea]))

    w = cfg.adv_weight
    combined = [(gw - w * pw, gb - w * pb_) for (gw, gb), (pw, pb_) in zip(rank[:n_embed], pair)]
    combined += rank[n_embed:]
    return StepGradients(loss_l, float(per_pair.sum()), rank, pair, combined)


def apply_gradients(model: MlpParams, grads, learning_rate: float) -> MlpParams:
    new = model.copy()
    for layer, (gw, gb) in zip(new.layers, grads):
        layer.weight -= learning_rate * gw
        layer.bias -= learning_rate * gb
    return new


def train_step(model: MlpParams, rb: RankingBatch, pb: PairBatch, cfg: TrainConfig):
    """One combined update; returns ``(new_model, (listmle_loss, contrastive_loss))``.

    Both passes are computed on the current weights before any update.
    """
    g = step_gradients(model, rb, pb, cfg)
    return apply_gradients(model, g.combined, cfg.learning_rate), (g.listmle, g.contrastive)


# --- sampling ---------------------------------------------------------------


def _pick(rng, n_rows: int, size: int) -> np.ndarray:
    if n_rows >= size:
        return rng.choice(n_rows, size=size, replace=False)
    return rng.integers(0, n_rows, size=size)


def sample_ranking_batch(rng, x_dos, x_normal, size: int) -> RankingBatch:
    half = size // 2
    d = x_dos[_pick(rng, x_dos.shape[0], size - half)]
    n = x_normal[_pick(rng, x_normal.shape[0], half)]
    return RankingBatch.from_classes(d, n)


def sample_pair_batch(rng, xa, xb, size: int) -> PairBatch:
    """Half same-domain pairs (split between the domains), half cross-domain."""
    n_same = size // 2
    n_aa = n_same // 2
    n_bb = n_same - n_aa
    n_ab = size - n_same
    left = np.vstack(
        [xa[rng.integers(0, len(xa), n_aa)], xb[rng.integers(0, len(xb), n_bb)], xa[rng.integers(0, len(xa), n_ab)]]
    )
    right = np.vstack(
        [xa[rng.integers(0, len(xa), n_aa)], xb[rng.integers(0, len(xb), n_bb)], xb[rng.integers(0, len(xb), n_ab)]]
    )
    y = np.concatenate([np.zeros(n_same), np.ones(n_ab)])
    return PairBatch(left, right, y)


# --- replicate --------------------------------------------------------------


@dataclass
class ReplicateResult:
    model: MlpParams
    cm_trace: CongruenceTrace
    listmle_trace: np.ndarray
    contrastive_trace: np.ndarray
    verdict: HealthVerdict
    seed: int = 0


def _record_cm(trace, model, rng, xa, xb, cfg, iteration):
    ia = _pick(rng, len(xa), min(cfg.cm_sample, len(xa)))
    ib = _pick(rng, len(xb), min(cfg.cm_sample, len(xb)))
    ea = forward_embed(model, xa[ia])
    eb = forward_embed(model, xb[ib])
    trace.append(iteration, congruence_profile(ea, eb, trace.levels))


def train_replicate(x_labeled, y_labeled, x_unlabeled, cfg: TrainConfig) -> ReplicateResult:
    """Train one replicate from a labelled domain and label-free rows of another.

    The unlabelled domain enters only through pair batches and congruence
    monitoring, so its class labels are never needed.
    """
    x_labeled = np.asarray(x_labeled, dtype=np.float64)
    y_labeled = np.asarray(y_labeled).ravel()
    x_unlabeled = np.asarray(x_unlabeled, dtype=np.float64)
    x_dos = x_labeled[y_labeled == 1]
    x_normal = x_labeled[y_labeled == 0]
    if len(x_dos) == 0 or len(x_normal) == 0:
        raise MissingClass("labelled domain needs both DoS and Normal rows")
    if len(x_unlabeled) == 0:
        raise MissingClass("unlabelled domain is empty")

    model = init_model(cfg.rng_seed)
    trace = CongruenceTrace(levels=tuple(cfg.quantile_levels))
    if cfg.iterations == 0:
        empty = np.zeros(0)
        return ReplicateResult(model, trace, empty, empty, HealthVerdict(False, ("no training",)), cfg.rng_seed)

    batch_rng, cm_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.rng_seed).spawn(2))
    window = cfg.health.cm_window
    listmle = np.empty(cfg.iterations)
    contrast = np.empty(cfg.iterations)
    _record_cm(trace, model, cm_rng, x_labeled, x_unlabeled, cfg, 0)
    for it in range(cfg.iterations):
        rb = sample_ranking_batch(batch_rng, x_dos, x_normal, cfg.rank_batch)
        pb = sample_pair_batch(batch_rng, x_labeled, x_unlabeled, cfg.pair_batch)
        model, (listmle[it], contrast[it]) = train_step(model, rb, pb, cfg)
        if (it + 1) % window == 0 or it + 1 == cfg.iterations:
            _record_cm(trace, model, cm_rng, x_labeled, x_unlabeled, cfg, it + 1)
    verdict = health_check(trace, listmle, cfg.health)
    return ReplicateResult(model, trace, listmle, contrast, verdict, cfg.rng_seed)


def with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    return replace(cfg, rng_seed=int(seed))
