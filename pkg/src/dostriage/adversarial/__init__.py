"""Shared sigmoid embedding, ListMLE ranking head and reversed-gradient Siamese discriminator."""

from .health import CongruenceTrace, HealthConfig, HealthVerdict, health_check
from .losses import contrastive_loss, listmle_loss
from .network import (
    Layer,
    MlpParams,
    forward_embed,
    forward_rank,
    init_model,
    score,
    siamese_distance,
)
from .training import (
    PairBatch,
    RankingBatch,
    ReplicateResult,
    TrainConfig,
    step_gradients,
    train_replicate,
    train_step,
)

__all__ = [
    "CongruenceTrace",
    "HealthConfig",
    "HealthVerdict",
    "Layer",
    "MlpParams",
    "PairBatch",
    "RankingBatch",
    "ReplicateResult",
    "TrainConfig",
    "contrastive_loss",
    "forward_embed",
    "forward_rank",
    "health_check",
    "init_model",
    "listmle_loss",
    "score",
    "siamese_distance",
    "step_gradients",
    "train_replicate",
    "train_step",
]
