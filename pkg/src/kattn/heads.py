"""Classification heads and channel integration.

Two integration strategies live here: multi-channel attention, which
blends per-channel hidden vectors with learned softmax weights, and
softmax interpolation, which convexly mixes the class distributions of
two independent classifiers.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .config import ConfigError
from .tensor import Tensor


def _glorot(rng, rows, cols):
    bound = math.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-bound, bound, size=(rows, cols)),
                  requires_grad=True)


class Affine:
    """y = W^T x + b on column vectors."""

    def __init__(self, d_in: int, d_out: int, rng, prefix: str):
        self.w = _glorot(rng, d_in, d_out)
        self.b = Tensor(np.zeros((d_out, 1)), requires_grad=True)
        self.prefix = prefix

    def __call__(self, x: Tensor) -> Tensor:
        return T.add(T.matmul(T.transpose(self.w), x), self.b)

    def named(self):
        return {f"{self.prefix}.w": self.w, f"{self.prefix}.b": self.b}


class MultiChannelAttention:
    """Per-channel hidden maps plus a shared scoring context vector."""

    def __init__(self, channel_dims, hidden: int, rng, prefix="mca"):
        if not channel_dims:
            raise ConfigError("multi-channel attention needs >= 1 channel")
        self.maps = [Affine(d, hidden, rng, f"{prefix}.ch{j}")
                     for j, d in enumerate(channel_dims)]
        self.context = _glorot(rng, hidden, 1)
        self.prefix = prefix

    def named(self):
        out = {f"{self.prefix}.context": self.context}
        for m in self.maps:
            out.update(m.named())
        return out


def mca_combine(features, params: MultiChannelAttention,
                return_weights=False):
    """h_j = ReLU(affine(f_j)); weights softmax(h_j . c); r = sum w_j h_j."""
    if not features:
        raise ConfigError("empty feature list")
    if len(features) != len(params.maps):
        raise ConfigError(
            f"{len(features)} features for {len(params.maps)} channels")
    hidden = [T.relu(m(f)) for m, f in zip(params.maps, features)]
    scores = T.concat_cols([T.matmul(T.transpose(h), params.context)
                            for h in hidden])  # (1, J)
    weights = T.softmax_rows(scores)
    stacked = T.concat_cols(hidden)  # (hidden_dim, J)
    combined = T.matmul(stacked, T.transpose(weights))  # (hidden_dim, 1)
    if return_weights:
        return combined, weights.data.reshape(-1)
    return combined


def interpolate(p1: np.ndarray, p2: np.ndarray, beta: float) -> np.ndarray:
    """beta * p1 + (1 - beta) * p2 over class distributions."""
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta={beta} outside [0, 1]")
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape:
        raise T.ShapeError(f"distribution shapes differ: {p1.shape} vs {p2.shape}")
    return beta * p1 + (1.0 - beta) * p2


def argmax_class(distribution) -> int:
    """Prediction with lowest-index tie-break (np.argmax's convention)."""
    return int(np.argmax(distribution))


class ClassifierHead:
    """Fully connected ReLU layer followed by an affine map to C logits."""

    def __init__(self, d_in: int, fc_dim: int, n_classes: int, rng,
                 prefix="clf"):
        self.fc = Affine(d_in, fc_dim, rng, f"{prefix}.fc")
        self.out = Affine(fc_dim, n_classes, rng, f"{prefix}.out")
        self.prefix = prefix

    def __call__(self, feature: Tensor) -> Tensor:
        """Column feature vector -> (1, C) logits row."""
        return T.transpose(self.out(T.relu(self.fc(feature))))

    def named(self):
        return {**self.fc.named(), **self.out.named()}
