"""Model and training configuration.

Defaults reproduce the reference hyperparameters: SGD with lr 0.1 and
momentum 0.9, lr decayed by 0.9 after epoch 15 on a dev-F1 plateau,
batch 100, 70 epochs, 6 attention heads, one encoder layer, 300-dim word
and 30-dim POS embeddings (d_k = 330), 130-dim feed-forward inner layer,
50-dim relative positional encodings, attention dims 200 (pooling) and
100 (multi-channel), 100-dim fully connected layer, beta 0.8.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

MODEL_KINDS = ("knwl", "self", "mca", "si", "kisa")


class ConfigError(ValueError):
    """A configuration value or key is invalid."""


@dataclass
class ModelConfig:
    kind: str = "knwl"

    # dimensions
    word_dim: int = 300
    pos_tag_dim: int = 30
    position_dim: int = 30
    heads: int = 6
    layers: int = 1
    ffn_dim: int = 130
    rel_enc_dim: int = 50
    rel_clip: int = 10
    pool_attn_dim: int = 200
    mca_attn_dim: int = 100
    fc_dim: int = 100
    ner_dim: int = 30
    entity_category_dim: int = 60
    position_max_abs: int = 512

    # dropout rates
    dropout_input: float = 0.4
    dropout_attn_out: float = 0.4
    dropout_ffn: float = 0.4
    dropout_attn_weights: float = 0.1

    # optimization
    lr: float = 0.1
    momentum: float = 0.9
    lr_decay: float = 0.9
    lr_decay_after_epoch: int = 15
    batch_size: int = 100
    epochs: int = 70
    grad_clip_norm: float = 0.0  # 0 disables; addition over the reference setup
    seed: int = 0
    target_dev_f1: float = 0.0  # stop early once dev F1 reaches this (0 = never)

    # ablation / variant switches
    multi_head: bool = True
    include_synonyms: bool = True
    mean_subtraction: bool = True
    output_mask: bool = True
    entity_mask: bool = True
    relative_positions: bool = True
    rebuild_indicators: bool = True  # rebuild K from live embeddings each step
    mean_variant: str = "projected_values"  # or "raw_keys"
    si_share_embeddings: bool = True
    beta: float = 0.8

    # optional MCA feature channels
    use_ner_channel: bool = False
    use_entity_category: bool = False

    @property
    def d_k(self) -> int:
        return self.word_dim + self.pos_tag_dim

    @property
    def effective_heads(self) -> int:
        return self.heads if self.multi_head else 1

    def validate(self) -> "ModelConfig":
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind: {self.kind!r}")
        if self.d_k % self.effective_heads != 0:
            raise ConfigError(
                f"d_k={self.d_k} not divisible by heads={self.effective_heads}"
            )
        for name in ("dropout_input", "dropout_attn_out", "dropout_ffn",
                     "dropout_attn_weights", "momentum", "lr_decay", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}={v} outside [0, 1]")
        if self.mean_variant not in ("projected_values", "raw_keys"):
            raise ConfigError(f"unknown mean_variant: {self.mean_variant!r}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        cleaned = {}
        for key, value in d.items():
            name = key.replace(".", "_").replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key: {key!r}")
            cleaned[name] = value
        return cls(**cleaned).validate()

    @classmethod
    def from_json_file(cls, path) -> "ModelConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
