"""Position binning and position-aware attention pooling."""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .tensor import DataError, Tensor


def bin_position(offset: int) -> int:
    """Logarithmic compression of token-entity offsets.

    Identity for |offset| <= 2, else sign(offset) * ceil(log2|offset| + 1).
    """
    if abs(offset) <= 2:
        return offset
    sign = 1 if offset > 0 else -1
    return sign * math.ceil(math.log2(abs(offset)) + 1)


class PositionAwareAttention:
    """Scores every token from its encoder output and its subject/object
    relative-position embeddings, then pools by the softmax weights."""

    def __init__(self, d_in: int, d_pos: int, d_attn: int, rng, prefix="pool"):
        def glorot(rows, cols):
            bound = math.sqrt(6.0 / (rows + cols))
            return Tensor(rng.uniform(-bound, bound, size=(rows, cols)),
                          requires_grad=True)

        self.w_out = glorot(d_in, d_attn)
        self.w_pos = glorot(d_pos, d_attn)
        # random init: a zero context vector has no gradient path into
        # w_out / w_pos (scores are identically zero)
        self.context = glorot(d_attn, 1)
        self.prefix = prefix

    def named(self):
        return {f"{self.prefix}.w_out": self.w_out,
                f"{self.prefix}.w_pos": self.w_pos,
                f"{self.prefix}.context": self.context}


def position_aware_pool(outputs: Tensor, positions: Tensor,
                        params: PositionAwareAttention, pad_mask,
                        return_weights=False):
    """f = O^T softmax(tanh(O W_o + P W_p) c), padding masked pre-softmax.

    Returns f as a (d, 1) column; optionally also the (n,) weight vector.
    """
    pad_mask = np.asarray(pad_mask, dtype=bool)
    if pad_mask.all():
        raise DataError("every position is padding; nothing to pool")
    hidden = T.tanh(T.add(T.matmul(outputs, params.w_out),
                          T.matmul(positions, params.w_pos)))
    scores = T.transpose(T.matmul(hidden, params.context))  # (1, n)
    weights = T.transpose(T.softmax_rows(scores, masked_cols=pad_mask))
    pooled = T.matmul(T.transpose(outputs), weights)  # (d, 1)
    if return_weights:
        return pooled, weights.data.reshape(-1)
    return pooled


def mean_pool(outputs: Tensor, pad_mask, return_weights=False):
    """Diagnostic pooling for the relative-positions ablation: uniform
    weights over non-pad positions."""
    pad_mask = np.asarray(pad_mask, dtype=bool)
    keep = ~pad_mask
    n_real = int(keep.sum())
    if n_real == 0:
        raise DataError("every position is padding; nothing to pool")
    w = keep.astype(np.float64).reshape(-1, 1) / n_real
    pooled = T.matmul(T.transpose(outputs), Tensor(w))
    if return_weights:
        return pooled, w.reshape(-1)
    return pooled
