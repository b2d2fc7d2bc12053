"""Scikit-learn style wrapper around the relation extraction models.

``X`` is a list of TACRED-format dicts (the ``relation`` field is ignored
when ``y`` is given) and ``y`` a sequence of relation labels, so the
estimator composes with sklearn model selection utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .config import ModelConfig
from .data import (REQUIRED_FIELDS, DataError, build_label_map, build_vocab,
                   encode_example)
from .training import evaluate, micro_prf, train_model


def check_records(X, y=None):
    """Validate raw records; returns records with relation labels attached."""
    if y is not None and len(X) != len(y):
        raise DataError(f"{len(X)} records vs {len(y)} labels")
    out = []
    for i, rec in enumerate(X):
        rec = dict(rec)
        if y is not None:
            rec["relation"] = y[i]
        rec.setdefault("relation", "no_relation")
        rec.setdefault("id", str(i))
        missing = [f for f in REQUIRED_FIELDS if f not in rec]
        if missing:
            raise DataError(f"record {i}: missing fields {missing}")
        n = len(rec["token"])
        for f in ("stanford_pos", "stanford_ner"):
            if len(rec[f]) != n:
                raise DataError(f"record {i}: {f} length mismatch")
        out.append(rec)
    return out


class RelationExtractor(BaseEstimator, ClassifierMixin):
    """Relation classifier with a fit/predict surface.

    ``lexicon`` is a list of lexicon entries (see ``kattn.lexicon``);
    required for every kind except "self". Extra ``ModelConfig`` fields
    can be overridden through ``config_overrides``.
    """

    def __init__(self, kind="knwl", lexicon=None, epochs=10, lr=0.1,
                 batch_size=100, heads=6, beta=0.8, seed=0,
                 dev_fraction=0.1, config_overrides=None):
        self.kind = kind
        self.lexicon = lexicon
        self.epochs = epochs
        self.lr = lr
        self.batch_size = batch_size
        self.heads = heads
        self.beta = beta
        self.seed = seed
        self.dev_fraction = dev_fraction
        self.config_overrides = config_overrides

    def _config(self) -> ModelConfig:
        cfg = ModelConfig(kind=self.kind, epochs=self.epochs, lr=self.lr,
                          batch_size=self.batch_size, heads=self.heads,
                          beta=self.beta, seed=self.seed)
        for key, value in (self.config_overrides or {}).items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config override: {key!r}")
            setattr(cfg, key, value)
        return cfg.validate()

    def fit(self, X, y=None):
        records = check_records(X, y)
        cfg = self._config()
        lex = list(self.lexicon or [])
        vocab = build_vocab(
            records,
            lexicon_words=[w for e in lex for w in e.words],
            lexicon_pos=[t for e in lex for t in e.pos_tags])
        label2id = build_label_map(records)
        encoded = [encode_example(r, vocab, label2id, cfg, cfg.rel_clip)
                   for r in records]
        n_dev = max(1, int(len(encoded) * self.dev_fraction))
        rng = np.random.default_rng(self.seed)
        order = rng.permutation(len(encoded))
        dev = [encoded[i] for i in order[:n_dev]]
        train = [encoded[i] for i in order[n_dev:]] or dev
        self.model_, self.dev_f1_history_ = train_model(
            cfg, train, dev, vocab, label2id, lex, seed=self.seed)
        self.vocab_ = vocab
        self.label2id_ = label2id
        self.classes_ = np.array(sorted(label2id, key=label2id.get))
        return self

    def _encode(self, X):
        records = check_records(X)
        for rec in records:
            rec["relation"] = "no_relation"  # gold is unused at predict time
        cfg = self.model_.cfg
        return [encode_example(r, self.vocab_, self.label2id_, cfg,
                               cfg.rel_clip) for r in records]

    def predict(self, X):
        return np.array([self.classes_[self.model_.predict(ex)]
                         for ex in self._encode(X)])

    def predict_proba(self, X):
        return np.vstack([self.model_.predict_proba(ex)
                          for ex in self._encode(X)])

    def score(self, X, y, sample_weight=None):
        """Micro-averaged F1 with no_relation excluded."""
        pred = self.predict(X)
        _, _, f1 = micro_prf(list(y), list(pred), "no_relation")
        return f1
