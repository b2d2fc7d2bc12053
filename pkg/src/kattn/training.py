"""Optimization loop, learning-rate schedule, and evaluation metrics."""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .config import ConfigError, ModelConfig
from .data import EncodedExample, Vocab, encode_example, pad_example
from .model import RelationModel
from .tensor import DataError


class TrainingError(RuntimeError):
    """A non-finite gradient or other unrecoverable optimizer state."""


def sgd_step(params: dict, state: dict, lr: float, momentum: float = 0.9,
             clip_norm: float = 0.0) -> None:
    """v <- momentum * v + g; p <- p - lr * v. Skips gradient-free params."""
    if clip_norm > 0.0:
        total = 0.0
        for p in params.values():
            if p.grad is not None:
                total += float((p.grad * p.grad).sum())
        norm = total ** 0.5
        if norm > clip_norm:
            factor = clip_norm / norm
            for p in params.values():
                if p.grad is not None:
                    p.grad *= factor
    for name, p in params.items():
        if p.grad is None:
            continue
        if not np.isfinite(p.grad).all():
            raise TrainingError(f"non-finite gradient for parameter {name!r}")
        v = state.get(name)
        if v is None:
            v = np.zeros_like(p.data)
        v = momentum * v + p.grad
        state[name] = v
        p.data -= lr * v


def lr_schedule(epoch: int, dev_f1_history, lr: float, decay: float = 0.9,
                after_epoch: int = 15) -> float:
    """Decay once the plateau rule fires: past ``after_epoch`` and the last
    dev F1 did not improve over the one before it."""
    if epoch > after_epoch and len(dev_f1_history) >= 2 \
            and dev_f1_history[-1] <= dev_f1_history[-2]:
        return lr * decay
    return lr


def micro_prf(gold, pred, negative_class):
    """Micro precision/recall/F1 with the negative class excluded from
    both numerators and denominators."""
    if len(gold) != len(pred):
        raise DataError(f"{len(gold)} gold labels vs {len(pred)} predictions")
    correct = sum(1 for g, p in zip(gold, pred)
                  if g == p and g != negative_class)
    n_pred = sum(1 for p in pred if p != negative_class)
    n_gold = sum(1 for g in gold if g != negative_class)
    precision = correct / n_pred if n_pred else 0.0
    recall = correct / n_gold if n_gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return precision, recall, f1


def per_class_counts(gold, pred, negative_class):
    counts = {}
    for g, p in zip(gold, pred):
        for lab in (g, p):
            if lab != negative_class and lab not in counts:
                counts[lab] = {"tp": 0, "fp": 0, "fn": 0}
        if g == p:
            if g != negative_class:
                counts[g]["tp"] += 1
        else:
            if p != negative_class:
                counts[p]["fp"] += 1
            if g != negative_class:
                counts[g]["fn"] += 1
    return counts


def macro_f1(gold, pred, negative_class) -> float:
    counts = per_class_counts(gold, pred, negative_class)
    if not counts:
        return 0.0
    scores = []
    for c in counts.values():
        p = c["tp"] / (c["tp"] + c["fp"]) if c["tp"] + c["fp"] else 0.0
        r = c["tp"] / (c["tp"] + c["fn"]) if c["tp"] + c["fn"] else 0.0
        scores.append(2 * p * r / (p + r) if p + r > 0 else 0.0)
    return sum(scores) / len(scores)


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    macro_f1: float
    per_class: dict
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1, "macro_f1": self.macro_f1,
                "per_class": self.per_class, "history": self.history}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def evaluate(model: RelationModel, examples, history=None) -> MetricsReport:
    gold = [model.id2label[ex.gold] for ex in examples]
    pred = [model.id2label[model.predict(ex)] for ex in examples]
    p, r, f1 = micro_prf(gold, pred, "no_relation")
    return MetricsReport(
        precision=p, recall=r, f1=f1,
        macro_f1=macro_f1(gold, pred, "no_relation"),
        per_class=per_class_counts(gold, pred, "no_relation"),
        history=list(history or []),
    )


def make_batches(examples, batch_size: int, rng, pad_bin_id: int):
    """Length-bucketed batches, padded to the batch max, in shuffled order."""
    order = sorted(range(len(examples)),
                   key=lambda i: (examples[i].length, examples[i].uid))
    batches = []
    for start in range(0, len(order), batch_size):
        chunk = [examples[i] for i in order[start:start + batch_size]]
        longest = max(ex.length for ex in chunk)
        batches.append([pad_example(ex, longest, pad_bin_id) for ex in chunk])
    rng.shuffle(batches)
    return batches


def train_model(cfg: ModelConfig, train_exs, dev_exs, vocab: Vocab,
                label2id: dict, lexicon_entries=None, seed=0,
                category_map=None, log=None):
    """Train one model; returns (model, dev_f1_history)."""
    model = RelationModel(cfg, vocab, label2id, lexicon_entries,
                          category_map=category_map, seed=seed)
    params = model.named_params()
    state = {}
    shuffle_rng = np.random.default_rng(seed + 1)
    pad_bin = cfg.rel_clip  # bin 0 for padding positions
    lr = cfg.lr
    history = []
    for epoch in range(1, cfg.epochs + 1):
        for batch in make_batches(train_exs, cfg.batch_size, shuffle_rng,
                                  pad_bin):
            T.zero_grad(params.values())
            inv = 1.0 / len(batch)
            for ex in batch:
                model.loss(ex, train=True).backward(seed=inv)
            sgd_step(params, state, lr, cfg.momentum,
                     clip_norm=cfg.grad_clip_norm)
        _, _, dev_f1 = micro_prf(
            [model.id2label[ex.gold] for ex in dev_exs],
            [model.id2label[model.predict(ex)] for ex in dev_exs],
            "no_relation")
        history.append(dev_f1)
        if log:
            log(f"epoch {epoch}: dev F1 {dev_f1:.4f} (lr {lr:.4f})")
        if cfg.target_dev_f1 and dev_f1 >= cfg.target_dev_f1:
            break
        lr = lr_schedule(epoch, history, lr, cfg.lr_decay,
                         cfg.lr_decay_after_epoch)
    return model, history


def run_experiment(cfg: ModelConfig, splits: dict, vocab: Vocab,
                   label2id: dict, lexicon_entries=None, seeds=None,
                   category_map=None, log=None):
    """Train one model per seed, select the median dev-F1 run, and report
    that run's test metrics. Returns (model, MetricsReport, per-seed dev F1s)."""
    seeds = list(seeds if seeds is not None else range(5))
    if not seeds:
        raise ConfigError("at least one seed is required")
    runs = []
    for s in seeds:
        model, history = train_model(cfg, splits["train"], splits["dev"],
                                     vocab, label2id, lexicon_entries,
                                     seed=s, category_map=category_map,
                                     log=log)
        runs.append((history[-1], s, model, history))
    by_seed = {s: f1 for f1, s, _, _ in runs}
    runs.sort(key=lambda r: (r[0], r[1]))
    dev_f1, _, model, history = runs[(len(runs) - 1) // 2]
    report = evaluate(model, splits["test"], history=history)
    return model, report, [by_seed[s] for s in seeds]
