"""Bit-exact model checkpoints.

The parameter file is binary: magic bytes, a format version, then one
(name, shape, raw little-endian float64 buffer) record per parameter.
Everything else needed to rebuild the model (config, vocab, label map,
lexicon, category map) travels in a JSON sidecar next to it.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .config import ModelConfig
from .data import Vocab
from .lexicon import LexiconEntry
from .model import RelationModel

MAGIC = b"KATN"
VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file is malformed or of an unsupported version."""


def save_params(path, params: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(params)))
        for name, tensor in params.items():
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            shape = tensor.data.shape
            fh.write(struct.pack("<B", len(shape)))
            fh.write(struct.pack(f"<{len(shape)}I", *shape))
            fh.write(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())


def load_params(path) -> dict:
    out = {}
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: bad magic bytes")
        version, count = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        for _ in range(count):
            (nlen,) = struct.unpack("<H", fh.read(2))
            name = fh.read(nlen).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            size = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * size)
            out[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return out


def save_model(path, model: RelationModel) -> None:
    path = Path(path)
    params = dict(model.named_params())
    if model._frozen_indicators is not None:
        params["__frozen_indicators__"] = model._frozen_indicators
    save_params(path, params)
    meta = {
        "config": model.cfg.to_dict(),
        "vocab": model.vocab.to_dict(),
        "label2id": model.label2id,
        "lexicon": [
            {"relation": e.relation, "frame": e.frame, "words": list(e.words),
             "pos_tags": list(e.pos_tags), "source": e.source}
            for e in model.lexicon_entries
        ],
        "category_map": [[list(k), v] for k, v in model.category_map.items()],
        "seed": model.seed,
    }
    with open(path.with_suffix(path.suffix + ".meta.json"), "w",
              encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)


def load_model(path) -> RelationModel:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".meta.json"), "r",
              encoding="utf-8") as fh:
        meta = json.load(fh)
    cfg = ModelConfig.from_dict(meta["config"])
    vocab = Vocab.from_dict(meta["vocab"])
    entries = [LexiconEntry(relation=e["relation"], frame=e["frame"],
                            words=tuple(e["words"]),
                            pos_tags=tuple(e["pos_tags"]), source=e["source"])
               for e in meta["lexicon"]]
    category_map = {tuple(k): v for k, v in meta["category_map"]}
    model = RelationModel(cfg, vocab, meta["label2id"], entries,
                          category_map=category_map, seed=meta["seed"])
    loaded = load_params(path)
    frozen = loaded.pop("__frozen_indicators__", None)
    params = model.named_params()
    if set(loaded) != set(params):
        missing = set(params) ^ set(loaded)
        raise CheckpointError(f"{path}: parameter set mismatch: {sorted(missing)}")
    for name, arr in loaded.items():
        if params[name].data.shape != arr.shape:
            raise CheckpointError(
                f"{path}: shape mismatch for {name}: "
                f"{params[name].data.shape} vs {arr.shape}")
        params[name].data[...] = arr
    if frozen is not None:
        from .tensor import Tensor
        model._frozen_indicators = Tensor(frozen)
    return model
