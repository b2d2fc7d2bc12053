"""Sequence encoders: knowledge-attention, self-attention, and the
per-head combination of both. Each maps (n, d_k) -> (n, d_k).

Knowledge-attention uses the input tokens as queries and the relation
indicator matrix as both keys and values, sharing one projection for
queries and keys per head, and subtracts the indicator value mean from
the attended output. Self-attention is scaled dot-product attention with
clipped relative-position embeddings added to the key scores. All
encoders use a single residual connection from the layer input to the
feed-forward output and zero the rows of padding positions.
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


class FeedForward:
    def __init__(self, d: int, inner: int, rng, prefix: str):
        self.w1 = _glorot(rng, d, inner)
        self.b1 = Tensor(np.zeros((1, inner)), requires_grad=True)
        self.w2 = _glorot(rng, inner, d)
        self.b2 = Tensor(np.zeros((1, d)), requires_grad=True)
        self.prefix = prefix

    def __call__(self, x: Tensor) -> Tensor:
        h = T.relu(T.add(T.matmul(x, self.w1), self.b1))
        return T.add(T.matmul(h, self.w2), self.b2)

    def named(self):
        p = self.prefix
        return {f"{p}.w1": self.w1, f"{p}.b1": self.b1,
                f"{p}.w2": self.w2, f"{p}.b2": self.b2}


class KnowledgeHeads:
    """Per-head projections with one shared matrix for queries AND keys."""

    def __init__(self, d_k: int, heads: int, rng, prefix: str):
        if d_k % heads != 0:
            raise ConfigError(f"d_k={d_k} not divisible by heads={heads}")
        d_head = d_k // heads
        self.w_q = [_glorot(rng, d_k, d_head) for _ in range(heads)]
        self.w_v = [_glorot(rng, d_k, d_head) for _ in range(heads)]
        self.heads = heads
        self.prefix = prefix

    def named(self):
        out = {}
        for i in range(self.heads):
            out[f"{self.prefix}.h{i}.w_q"] = self.w_q[i]
            out[f"{self.prefix}.h{i}.w_v"] = self.w_v[i]
        return out


class SelfHeads:
    def __init__(self, d_k: int, heads: int, rel_dim: int, rel_clip: int,
                 rng, prefix: str):
        if d_k % heads != 0:
            raise ConfigError(f"d_k={d_k} not divisible by heads={heads}")
        d_head = d_k // heads
        self.w_q = [_glorot(rng, d_k, d_head) for _ in range(heads)]
        self.w_k = [_glorot(rng, d_k, d_head) for _ in range(heads)]
        self.w_v = [_glorot(rng, d_k, d_head) for _ in range(heads)]
        # one shared relative-position table, projected per head into
        # the head dimension
        self.rel_emb = _glorot(rng, 2 * rel_clip + 1, rel_dim)
        self.rel_proj = [_glorot(rng, rel_dim, d_head) for _ in range(heads)]
        self.heads = heads
        self.rel_clip = rel_clip
        self.prefix = prefix

    def named(self):
        out = {f"{self.prefix}.rel_emb": self.rel_emb}
        for i in range(self.heads):
            out[f"{self.prefix}.h{i}.w_q"] = self.w_q[i]
            out[f"{self.prefix}.h{i}.w_k"] = self.w_k[i]
            out[f"{self.prefix}.h{i}.w_v"] = self.w_v[i]
            out[f"{self.prefix}.h{i}.rel_proj"] = self.rel_proj[i]
        return out


class EncoderLayer:
    """Shared output projection + feed-forward wrapper around a head set.

    ``kind`` selects which sub-attentions run: "knwl", "self", or "kisa"
    (per-head sum of both).
    """

    def __init__(self, kind: str, d_k: int, heads: int, ffn_dim: int,
                 rel_dim: int, rel_clip: int, rng, prefix: str):
        self.kind = kind
        self.d_k = d_k
        self.heads = heads
        self.knwl = (KnowledgeHeads(d_k, heads, rng, f"{prefix}.knwl")
                     if kind in ("knwl", "kisa") else None)
        self.self_ = (SelfHeads(d_k, heads, rel_dim, rel_clip, rng,
                                f"{prefix}.self")
                      if kind in ("self", "kisa") else None)
        self.w_o = _glorot(rng, d_k, d_k)
        self.ffn = FeedForward(d_k, ffn_dim, rng, f"{prefix}.ffn")
        self.prefix = prefix

    def named(self):
        out = {f"{self.prefix}.w_o": self.w_o}
        out.update(self.ffn.named())
        if self.knwl is not None:
            out.update(self.knwl.named())
        if self.self_ is not None:
            out.update(self.self_.named())
        return out


def knowledge_attention(q: Tensor, k: Tensor, v: Tensor,
                        subtract_mean=True, attn_dropout=None) -> Tensor:
    """softmax(QK^T / sqrt(d)) V minus the value-set mean (broadcast).

    ``attn_dropout`` is an optional (rate, rng) pair applied to the
    attention weights during training.
    """
    m = k.shape[0]
    if m < 1:
        raise ConfigError("knowledge attention requires at least one indicator")
    if v.shape[0] != m:
        raise T.ShapeError(f"key rows {m} != value rows {v.shape[0]}")
    d = q.shape[1]
    scores = T.scale(T.matmul(q, T.transpose(k)), 1.0 / math.sqrt(d))
    weights = T.softmax_rows(scores)
    if attn_dropout is not None:
        rate, rng = attn_dropout
        weights = T.dropout(weights, rate, train=True, rng=rng)
    hidden = T.matmul(weights, v)
    if subtract_mean:
        return T.sub(hidden, T.mean_rows(v))
    return hidden


def _self_head(x: Tensor, heads: SelfHeads, i: int, pad_mask,
               relative_positions=True, attn_dropout=None) -> Tensor:
    qh = T.matmul(x, heads.w_q[i])
    kh = T.matmul(x, heads.w_k[i])
    vh = T.matmul(x, heads.w_v[i])
    d_head = qh.shape[1]
    scores = T.matmul(qh, T.transpose(kh))
    if relative_positions:
        n = x.shape[0]
        c = heads.rel_clip
        offsets = np.clip(np.arange(n)[None, :] - np.arange(n)[:, None],
                          -c, c) + c
        rel = T.matmul(heads.rel_emb, heads.rel_proj[i])  # (2c+1, d_head)
        per_offset = T.matmul(qh, T.transpose(rel))  # (n, 2c+1)
        scores = T.add(scores, T.select_cols_per_row(per_offset, offsets))
    scores = T.scale(scores, 1.0 / math.sqrt(d_head))
    weights = T.softmax_rows(scores, masked_cols=np.asarray(pad_mask, bool))
    if attn_dropout is not None:
        rate, rng = attn_dropout
        weights = T.dropout(weights, rate, train=True, rng=rng)
    return T.matmul(weights, vh)


def _knwl_head(x: Tensor, k: Tensor, heads: KnowledgeHeads, i: int,
               mean_subtraction=True, mean_variant="projected_values",
               attn_dropout=None) -> Tensor:
    qh = T.matmul(x, heads.w_q[i])
    kh = T.matmul(k, heads.w_q[i])  # same projection as queries
    vh = T.matmul(k, heads.w_v[i])
    out = knowledge_attention(qh, kh, vh, subtract_mean=False,
                              attn_dropout=attn_dropout)
    if mean_subtraction:
        ref = vh if mean_variant == "projected_values" else kh
        out = T.sub(out, T.mean_rows(ref))
    return out


def _finish_layer(head_outputs, x: Tensor, layer: EncoderLayer, pad_mask,
                  cfg, train: bool, rng) -> Tensor:
    merged = T.matmul(T.concat_cols(head_outputs), layer.w_o)
    merged = T.dropout(merged, cfg.dropout_attn_out, train, rng)
    out = layer.ffn(merged)
    out = T.dropout(out, cfg.dropout_ffn, train, rng)
    out = T.add(out, x)  # single residual: input embeddings -> FFN output
    if cfg.output_mask:
        pad_mask = np.asarray(pad_mask, dtype=bool)
        if pad_mask.any():
            out = T.mask_rows(out, ~pad_mask)
    return out


def _check_mask(x: Tensor, pad_mask):
    if len(pad_mask) != x.shape[0]:
        raise T.ShapeError(
            f"pad_mask length {len(pad_mask)} != sequence length {x.shape[0]}")


def multi_head_knowledge(x: Tensor, indicators: Tensor, layer: EncoderLayer,
                         pad_mask, cfg, train=False, rng=None) -> Tensor:
    _check_mask(x, pad_mask)
    drop = ((cfg.dropout_attn_weights, rng)
            if train and cfg.dropout_attn_weights > 0 else None)
    outs = [_knwl_head(x, indicators, layer.knwl, i,
                       mean_subtraction=cfg.mean_subtraction,
                       mean_variant=cfg.mean_variant, attn_dropout=drop)
            for i in range(layer.heads)]
    return _finish_layer(outs, x, layer, pad_mask, cfg, train, rng)


def multi_head_self(x: Tensor, layer: EncoderLayer, pad_mask, cfg,
                    train=False, rng=None) -> Tensor:
    _check_mask(x, pad_mask)
    drop = ((cfg.dropout_attn_weights, rng)
            if train and cfg.dropout_attn_weights > 0 else None)
    outs = [_self_head(x, layer.self_, i, pad_mask,
                       relative_positions=cfg.relative_positions,
                       attn_dropout=drop)
            for i in range(layer.heads)]
    return _finish_layer(outs, x, layer, pad_mask, cfg, train, rng)


def kisa_forward(x: Tensor, indicators: Tensor, layer: EncoderLayer,
                 pad_mask, cfg, train=False, rng=None) -> Tensor:
    _check_mask(x, pad_mask)
    drop = ((cfg.dropout_attn_weights, rng)
            if train and cfg.dropout_attn_weights > 0 else None)
    outs = []
    for i in range(layer.heads):
        kn = _knwl_head(x, indicators, layer.knwl, i,
                        mean_subtraction=cfg.mean_subtraction,
                        mean_variant=cfg.mean_variant, attn_dropout=drop)
        se = _self_head(x, layer.self_, i, pad_mask,
                        relative_positions=cfg.relative_positions,
                        attn_dropout=drop)
        outs.append(T.add(kn, se))
    return _finish_layer(outs, x, layer, pad_mask, cfg, train, rng)
