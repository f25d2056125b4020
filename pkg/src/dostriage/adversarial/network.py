"""Sigmoid MLP for the shared embedding and ranking head, with hand-written backprop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, InputError, NonFiniteActivation
from ..textio import read_matrix_blocks, write_matrix_blocks

N_INPUT_FEATURES = 7
# The embedding's input layer is 11 wide; features are zero-padded into it.
EMBED_SIZES = (11, 10, 9, 7, 7)
HEAD_SIZES = (7, 14, 1)


@dataclass
class Layer:
    weight: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)
    activation: str  # "sigmoid" or "linear"

    def copy(self) -> "Layer":
        return Layer(self.weight.copy(), self.bias.copy(), self.activation)


@dataclass
class MlpParams:
    embed: list[Layer]
    head: list[Layer]

    @property
    def layers(self) -> list[Layer]:
        return self.embed + self.head

    def copy(self) -> "MlpParams":
        return MlpParams([l.copy() for l in self.embed], [l.copy() for l in self.head])

    def arrays(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend((layer.weight, layer.bias))
        return out

    def equals(self, other: "MlpParams") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))

    def save(self, path) -> None:
        blocks = []
        for part, layers in (("embed", self.embed), ("head", self.head)):
            for i, layer in enumerate(layers):
                blocks.append((f"{part}.{i}.{layer.activation}.weight", layer.weight))
                blocks.append((f"{part}.{i}.{layer.activation}.bias", layer.bias[None, :]))
        write_matrix_blocks(path, blocks)

    @classmethod
    def load(cls, path) -> "MlpParams":
        parts: dict[str, list[Layer]] = {"embed": [], "head": []}
        blocks = read_matrix_blocks(path)
        if len(blocks) % 2:
            raise InputError(f"{path}: odd number of parameter blocks")
        for (wname, w), (_, b) in zip(blocks[::2], blocks[1::2]):
            part, _, act, _ = wname.split(".")
            parts[part].append(Layer(w, b.ravel(), act))
        return cls(parts["embed"], parts["head"])


def _glorot(rng, fan_in, fan_out, gain):
    bound = gain * np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


SIGMOID_GAIN = 4.0


def init_model(rng_seed, gain: float = SIGMOID_GAIN) -> MlpParams:
    """Glorot-uniform weights scaled by ``gain`` (4 suits logistic units), zero biases."""
    rng = np.random.default_rng(rng_seed)
    embed = [
        Layer(_glorot(rng, a, b, gain), np.zeros(b), "sigmoid")
        for a, b in zip(EMBED_SIZES[:-1], EMBED_SIZES[1:])
    ]
    acts = ["sigmoid"] * (len(HEAD_SIZES) - 2) + ["linear"]
    head = [
        Layer(_glorot(rng, a, b, gain), np.zeros(b), act)
        for (a, b), act in zip(zip(HEAD_SIZES[:-1], HEAD_SIZES[1:]), acts)
    ]
    return MlpParams(embed, head)


def zero_model() -> MlpParams:
    m = init_model(0)
    for layer in m.layers:
        layer.weight[:] = 0.0
    return m


def _sigmoid(z):
    # split form avoids overflow warnings for large |z|
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def pad_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != N_INPUT_FEATURES:
        raise DimensionMismatch(f"expected {N_INPUT_FEATURES} feature columns, got shape {x.shape}")
    out = np.zeros((x.shape[0], EMBED_SIZES[0]))
    out[:, :N_INPUT_FEATURES] = x
    return out


def run_layers(layers: list[Layer], x: np.ndarray) -> list[np.ndarray]:
    """Forward pass returning the input followed by each layer's activation."""
    acts = [x]
    for layer in layers:
        z = acts[-1] @ layer.weight + layer.bias
        acts.append(_sigmoid(z) if layer.activation == "sigmoid" else z)
    if not np.all(np.isfinite(acts[-1])):
        raise NonFiniteActivation("non-finite activation in forward pass")
    return acts


def backprop_layers(layers: list[Layer], acts: list[np.ndarray], grad_out: np.ndarray):
    """Gradients of a scalar loss w.r.t. each layer's (weight, bias) and the input.

    ``grad_out`` is dLoss/d(final activation); ``acts`` comes from
    :func:`run_layers` on the same layers.
    """
    grads = [None] * len(layers)
    g = grad_out
    for i in range(len(layers) - 1, -1, -1):
        layer = layers[i]
        if layer.activation == "sigmoid":
            a = acts[i + 1]
            g = g * a * (1.0 - a)
        grads[i] = (acts[i].T @ g, g.sum(axis=0))
        g = g @ layer.weight.T
    return grads, g


def forward_embed(m: MlpParams, x) -> np.ndarray:
    return run_layers(m.embed, pad_features(x))[-1]


def forward_rank(m: MlpParams, e) -> np.ndarray:
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 2 or e.shape[1] != HEAD_SIZES[0]:
        raise DimensionMismatch(f"expected embedding width {HEAD_SIZES[0]}, got shape {e.shape}")
    return run_layers(m.head, e)[-1][:, 0]


def score(m: MlpParams, x) -> np.ndarray:
    """Triage scores for raw feature rows; larger means more DoS-like."""
    return forward_rank(m, forward_embed(m, x))


def siamese_distance(m: MlpParams, xa, xb) -> np.ndarray | float:
    """Squared Euclidean distance between embeddings of paired rows."""
    ea = forward_embed(m, xa)
    eb = forward_embed(m, xb)
    if ea.shape != eb.shape:
        raise DimensionMismatch("paired inputs must have the same row count")
    d = ((ea - eb) ** 2).sum(axis=1)
    return float(d[0]) if np.ndim(xa) == 1 else d
