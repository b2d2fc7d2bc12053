"""Full relation extraction models.

Five kinds share one construction: embed tokens, encode with attention,
pool into a sentence vector, classify. ``knwl``, ``self`` and ``kisa``
are single-channel; ``mca`` blends the knowledge and self channels with
multi-channel attention; ``si`` trains two independent channels and
interpolates their class distributions at prediction time.
"""

from __future__ import annotations

import numpy as np

from . import encoders, heads, tensor as T
from .config import ModelConfig
from .data import EmbeddingTables, EncodedExample, Vocab, embed_sequence, init_tables
from .heads import ClassifierHead, MultiChannelAttention, interpolate
from .lexicon import build_indicators
from .pooling import PositionAwareAttention, mean_pool, position_aware_pool
from .tensor import Tensor


class RelationModel:
    def __init__(self, cfg: ModelConfig, vocab: Vocab, label2id: dict,
                 lexicon_entries=None, category_map=None, seed=0):
        cfg.validate()
        self.cfg = cfg
        self.vocab = vocab
        self.label2id = dict(label2id)
        self.id2label = {v: k for k, v in self.label2id.items()}
        self.lexicon_entries = list(lexicon_entries or [])
        self.category_map = dict(category_map or {})
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        n_classes = len(self.label2id)
        h = cfg.effective_heads

        self.tables = init_tables(vocab, cfg, self.rng,
                                  n_categories=len(self.category_map))
        self.tables2 = None
        if cfg.kind == "si" and not cfg.si_share_embeddings:
            self.tables2 = init_tables(vocab, cfg, self.rng)

        def enc(kind, d_k, prefix):
            return encoders.EncoderLayer(kind, d_k, h, cfg.ffn_dim,
                                         cfg.rel_enc_dim, cfg.rel_clip,
                                         self.rng, prefix)

        def pool(d_in, prefix):
            return PositionAwareAttention(d_in, 2 * cfg.position_dim,
                                          cfg.pool_attn_dim, self.rng, prefix)

        d_k = cfg.d_k
        self._modules = {}
        if cfg.kind in ("knwl", "self", "kisa"):
            self.encoder = enc(cfg.kind, d_k, "enc")
            self.pool = pool(d_k, "pool")
            self.clf = ClassifierHead(d_k, cfg.fc_dim, n_classes, self.rng)
        elif cfg.kind == "mca":
            d_self = d_k + (cfg.ner_dim if cfg.use_ner_channel else 0)
            self.enc_self = enc("self", d_self, "enc_self")
            self.enc_knwl = enc("knwl", d_k, "enc_knwl")
            self.pool_self = pool(d_self, "pool_self")
            self.pool_knwl = pool(d_k, "pool_knwl")
            dims = [d_self, d_k]
            if cfg.use_entity_category:
                dims.append(cfg.entity_category_dim)
            self.mca = MultiChannelAttention(dims, cfg.mca_attn_dim, self.rng)
            self.clf = ClassifierHead(cfg.mca_attn_dim, cfg.fc_dim,
                                      n_classes, self.rng)
        elif cfg.kind == "si":
            self.enc_self = enc("self", d_k, "enc_self")
            self.enc_knwl = enc("knwl", d_k, "enc_knwl")
            self.pool_self = pool(d_k, "pool_self")
            self.pool_knwl = pool(d_k, "pool_knwl")
            self.clf_self = ClassifierHead(d_k, cfg.fc_dim, n_classes,
                                           self.rng, prefix="clf_self")
            self.clf_knwl = ClassifierHead(d_k, cfg.fc_dim, n_classes,
                                           self.rng, prefix="clf_knwl")

        self._frozen_indicators = None
        if self._needs_indicators() and not cfg.rebuild_indicators:
            ind = build_indicators(self.lexicon_entries, self.tables,
                                   self.vocab, cfg.include_synonyms)
            self._frozen_indicators = ind.matrix.detach()

    def _needs_indicators(self) -> bool:
        return self.cfg.kind != "self"

    def _knwl_tables(self) -> EmbeddingTables:
        return self.tables2 if self.tables2 is not None else self.tables

    # ------------------------------------------------------------------
    # parameters

    def named_params(self) -> dict:
        out = dict(self.tables.named("emb"))
        if self.tables2 is not None:
            out.update(self.tables2.named("emb2"))
        kind = self.cfg.kind
        if kind in ("knwl", "self", "kisa"):
            out.update(self.encoder.named())
            out.update(self.pool.named())
            out.update(self.clf.named())
        elif kind == "mca":
            for mod in (self.enc_self, self.enc_knwl, self.pool_self,
                        self.pool_knwl, self.mca, self.clf):
                out.update(mod.named())
        elif kind == "si":
            for mod in (self.enc_self, self.enc_knwl, self.pool_self,
                        self.pool_knwl, self.clf_self, self.clf_knwl):
                out.update(mod.named())
        return out

    # ------------------------------------------------------------------
    # forward pieces

    def indicators(self, tables=None) -> Tensor:
        if self._frozen_indicators is not None:
            return self._frozen_indicators
        ind = build_indicators(self.lexicon_entries, tables or self._knwl_tables(),
                               self.vocab, self.cfg.include_synonyms)
        return ind.matrix

    def _position_features(self, ex: EncodedExample) -> Tensor:
        return T.concat_cols([T.row_select(self.tables.position, ex.bin_subj),
                              T.row_select(self.tables.position, ex.bin_obj)])

    def _pool(self, pool_params, outputs, ex, return_weights=False):
        if self.cfg.relative_positions:
            return position_aware_pool(outputs, self._position_features(ex),
                                       pool_params, ex.pad_mask,
                                       return_weights=return_weights)
        return mean_pool(outputs, ex.pad_mask, return_weights=return_weights)

    def _embed(self, ex: EncodedExample, tables, train: bool) -> Tensor:
        x = embed_sequence(ex, tables)
        return T.dropout(x, self.cfg.dropout_input, train, self.rng)

    def _category_feature(self, ex: EncodedExample) -> Tensor:
        # category is the (subj_type, obj_type) NER pair; unseen pairs
        # share row 0
        cid = self.category_map.get((ex.subj_type, ex.obj_type), 0)
        return T.transpose(T.row_select(self.tables.entity_category, [cid]))

    def _channels(self, ex: EncodedExample, train: bool, collect=None):
        """Per-channel pooled features; ``collect`` gathers pool weights."""
        cfg = self.cfg
        kind = cfg.kind
        rng = self.rng

        def pooled(params, outputs, name):
            if collect is None:
                return self._pool(params, outputs, ex)
            f, w = self._pool(params, outputs, ex, return_weights=True)
            collect[name] = w
            return f

        if kind in ("knwl", "self", "kisa"):
            x = self._embed(ex, self.tables, train)
            if kind == "knwl":
                o = encoders.multi_head_knowledge(x, self.indicators(self.tables),
                                                  self.encoder, ex.pad_mask,
                                                  cfg, train, rng)
            elif kind == "self":
                o = encoders.multi_head_self(x, self.encoder, ex.pad_mask,
                                             cfg, train, rng)
            else:
                o = encoders.kisa_forward(x, self.indicators(self.tables),
                                          self.encoder, ex.pad_mask,
                                          cfg, train, rng)
            return [pooled(self.pool, o, kind)]

        # two-channel models
        x_self = self._embed(ex, self.tables, train)
        if cfg.kind == "mca" and cfg.use_ner_channel:
            ner = T.row_select(self.tables.ner, ex.ner_ids)
            x_self = T.concat_cols([x_self, ner])
        x_knwl = self._embed(ex, self._knwl_tables(), train)
        o_self = encoders.multi_head_self(x_self, self.enc_self, ex.pad_mask,
                                          cfg, train, rng)
        o_knwl = encoders.multi_head_knowledge(x_knwl, self.indicators(),
                                               self.enc_knwl, ex.pad_mask,
                                               cfg, train, rng)
        f_self = pooled(self.pool_self, o_self, "self")
        f_knwl = pooled(self.pool_knwl, o_knwl, "knwl")
        return [f_self, f_knwl]

    # ------------------------------------------------------------------
    # losses and predictions

    def loss(self, ex: EncodedExample, train=True) -> Tensor:
        kind = self.cfg.kind
        feats = self._channels(ex, train)
        if kind in ("knwl", "self", "kisa"):
            logits = self.clf(feats[0])
            return T.cross_entropy(logits, [ex.gold])
        if kind == "mca":
            if self.cfg.use_entity_category:
                feats.append(self._category_feature(ex))
            combined = heads.mca_combine(feats, self.mca)
            return T.cross_entropy(self.clf(combined), [ex.gold])
        # si: total cross-entropy of the two independent classifiers
        l1 = T.cross_entropy(self.clf_self(feats[0]), [ex.gold])
        l2 = T.cross_entropy(self.clf_knwl(feats[1]), [ex.gold])
        return T.add(l1, l2)

    def channel_distributions(self, ex: EncodedExample):
        """(p_self, p_knwl) softmax distributions; SI models only."""
        feats = self._channels(ex, train=False)
        p1 = _softmax(self.clf_self(feats[0]).data.reshape(-1))
        p2 = _softmax(self.clf_knwl(feats[1]).data.reshape(-1))
        return p1, p2

    def predict_proba(self, ex: EncodedExample) -> np.ndarray:
        kind = self.cfg.kind
        if kind == "si":
            p1, p2 = self.channel_distributions(ex)
            return interpolate(p1, p2, self.cfg.beta)
        feats = self._channels(ex, train=False)
        if kind == "mca":
            if self.cfg.use_entity_category:
                feats.append(self._category_feature(ex))
            combined = heads.mca_combine(feats, self.mca)
            return _softmax(self.clf(combined).data.reshape(-1))
        return _softmax(self.clf(feats[0]).data.reshape(-1))

    def predict(self, ex: EncodedExample) -> int:
        return heads.argmax_class(self.predict_proba(ex))

    def attention_weights(self, ex: EncodedExample) -> dict:
        """Per-channel pooling weights over tokens (for visualization)."""
        collect = {}
        self._channels(ex, train=False, collect=collect)
        return collect


def _softmax(v: np.ndarray) -> np.ndarray:
    z = v - v.max()
    e = np.exp(z)
    return e / e.sum()
