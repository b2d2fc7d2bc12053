"""Vocabulary, embedding tables, entity masking, and example encoding.

Dataset files are JSON Lines with TACRED-compatible field names:
``id, token, subj_start, subj_end, obj_start, obj_end, subj_type,
obj_type, stanford_pos, stanford_ner, relation``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, ModelConfig
from .pooling import bin_position
from .tensor import DataError, Tensor

PAD = "<PAD>"
UNK = "<UNK>"
PAD_ID = 0
UNK_ID = 1

REQUIRED_FIELDS = (
    "id", "token", "subj_start", "subj_end", "obj_start", "obj_end",
    "subj_type", "obj_type", "stanford_pos", "stanford_ner", "relation",
)


class ParseError(ValueError):
    """A data or embedding file line failed to parse."""


@dataclass
class Vocab:
    word2id: dict
    pos2id: dict
    ner2id: dict

    @property
    def size(self) -> int:
        return len(self.word2id)

    def word_id(self, tok: str) -> int:
        return self.word2id.get(tok, UNK_ID)

    def pos_id(self, tag: str) -> int:
        return self.pos2id.get(tag, UNK_ID)

    def ner_id(self, tag: str) -> int:
        return self.ner2id.get(tag, UNK_ID)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"word2id": self.word2id, "pos2id": self.pos2id,
                       "ner2id": self.ner2id}, fh)

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, "r", encoding="utf-8") as fh:
            d = json.load(fh)
        return cls(d["word2id"], d["pos2id"], d["ner2id"])

    def to_dict(self) -> dict:
        return {"word2id": self.word2id, "pos2id": self.pos2id,
                "ner2id": self.ner2id}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        return cls(dict(d["word2id"]), dict(d["pos2id"]), dict(d["ner2id"]))


def entity_token(role: str, ner_type: str) -> str:
    return f"{role}-{ner_type}"


def build_vocab(records, lexicon_words=(), lexicon_pos=()) -> Vocab:
    """Dense, sorted id assignment; PAD=0, UNK=1, stable across save/load."""
    words, pos_tags, ner_tags = set(), set(), set()
    for rec in records:
        words.update(rec["token"])
        pos_tags.update(rec["stanford_pos"])
        ner_tags.update(rec["stanford_ner"])
        words.add(entity_token("SUBJ", rec["subj_type"]))
        words.add(entity_token("OBJ", rec["obj_type"]))
    words.update(lexicon_words)
    pos_tags.update(lexicon_pos)
    word2id = {PAD: PAD_ID, UNK: UNK_ID}
    for w in sorted(words):
        word2id.setdefault(w, len(word2id))
    pos2id = {PAD: PAD_ID, UNK: UNK_ID}
    for t in sorted(pos_tags):
        pos2id.setdefault(t, len(pos2id))
    ner2id = {PAD: PAD_ID, UNK: UNK_ID}
    for t in sorted(ner_tags):
        ner2id.setdefault(t, len(ner2id))
    return Vocab(word2id, pos2id, ner2id)


def mask_entities(tokens, subj_span, obj_span, subj_type, obj_type,
                  enabled=True):
    """Replace each entity token with a type-bearing special token.

    Spans are inclusive (start, end) pairs and must not overlap.
    """
    ss, se = subj_span
    os_, oe = obj_span
    n = len(tokens)
    for lo, hi in ((ss, se), (os_, oe)):
        if not (0 <= lo <= hi < n):
            raise DataError(f"span ({lo}, {hi}) outside sequence of length {n}")
    if max(ss, os_) <= min(se, oe):
        raise DataError(f"overlapping entity spans ({ss},{se}) and ({os_},{oe})")
    if not enabled:
        return list(tokens)
    out = list(tokens)
    for i in range(ss, se + 1):
        out[i] = entity_token("SUBJ", subj_type)
    for i in range(os_, oe + 1):
        out[i] = entity_token("OBJ", obj_type)
    return out


def span_offsets(n, span):
    """Signed nearest-token distance to a span; 0 inside the span."""
    lo, hi = span
    return [i - lo if i < lo else (i - hi if i > hi else 0) for i in range(n)]


@dataclass
class EncodedExample:
    uid: str
    token_ids: list
    pos_ids: list
    ner_ids: list
    subj_span: tuple
    obj_span: tuple
    subj_type: str
    obj_type: str
    bin_subj: list  # position-bin ids (bin value shifted by rel_clip)
    bin_obj: list
    gold: int
    pad_mask: list  # True at PAD positions

    @property
    def length(self) -> int:
        return len(self.token_ids)


def encode_example(rec, vocab: Vocab, label2id: dict, cfg: ModelConfig,
                   clip_bins: int = 10) -> EncodedExample:
    subj_span = (rec["subj_start"], rec["subj_end"])
    obj_span = (rec["obj_start"], rec["obj_end"])
    tokens = mask_entities(rec["token"], subj_span, obj_span,
                           rec["subj_type"], rec["obj_type"],
                           enabled=cfg.entity_mask)
    n = len(tokens)

    def shifted(p):
        # clamp so every bin indexes the (2 * clip_bins + 1)-row table
        b = bin_position(p)
        return max(-clip_bins, min(clip_bins, b)) + clip_bins

    bins_s = [shifted(p) for p in span_offsets(n, subj_span)]
    bins_o = [shifted(p) for p in span_offsets(n, obj_span)]
    return EncodedExample(
        uid=str(rec["id"]),
        token_ids=[vocab.word_id(t) for t in tokens],
        pos_ids=[vocab.pos_id(t) for t in rec["stanford_pos"]],
        ner_ids=[vocab.ner_id(t) for t in rec["stanford_ner"]],
        subj_span=subj_span,
        obj_span=obj_span,
        subj_type=rec["subj_type"],
        obj_type=rec["obj_type"],
        bin_subj=bins_s,
        bin_obj=bins_o,
        gold=label2id[rec["relation"]],
        pad_mask=[False] * n,
    )


def pad_example(ex: EncodedExample, length: int,
                pad_bin_id: int) -> EncodedExample:
    extra = length - ex.length
    if extra < 0:
        raise DataError(f"cannot pad length {ex.length} down to {length}")
    if extra == 0:
        return ex
    return EncodedExample(
        uid=ex.uid,
        token_ids=ex.token_ids + [PAD_ID] * extra,
        pos_ids=ex.pos_ids + [PAD_ID] * extra,
        ner_ids=ex.ner_ids + [PAD_ID] * extra,
        subj_span=ex.subj_span,
        obj_span=ex.obj_span,
        subj_type=ex.subj_type,
        obj_type=ex.obj_type,
        bin_subj=ex.bin_subj + [pad_bin_id] * extra,
        bin_obj=ex.bin_obj + [pad_bin_id] * extra,
        gold=ex.gold,
        pad_mask=ex.pad_mask + [True] * extra,
    )


@dataclass
class EmbeddingTables:
    word: Tensor
    pos: Tensor
    position: Tensor
    ner: Tensor | None = None
    entity_category: Tensor | None = None

    def named(self, prefix="emb"):
        out = {f"{prefix}.word": self.word, f"{prefix}.pos": self.pos,
               f"{prefix}.position": self.position}
        if self.ner is not None:
            out[f"{prefix}.ner"] = self.ner
        if self.entity_category is not None:
            out[f"{prefix}.entity_category"] = self.entity_category
        return out


def init_tables(vocab: Vocab, cfg: ModelConfig, rng,
                n_categories: int = 0) -> EmbeddingTables:
    # scratch init uses GloVe-like component magnitudes; the loader's
    # fill-in bound of 0.5/dim is far too small when no pre-trained file
    # is loaded on top and starves the attention scores
    def uniform(rows, dim):
        t = Tensor(rng.uniform(-0.5, 0.5, size=(rows, dim)),
                   requires_grad=True)
        return t

    word = uniform(vocab.size, cfg.word_dim)
    word.data[PAD_ID] = 0.0
    pos = uniform(len(vocab.pos2id), cfg.pos_tag_dim)
    position = uniform(2 * cfg.rel_clip + 1, cfg.position_dim)
    ner = uniform(len(vocab.ner2id), cfg.ner_dim) if cfg.use_ner_channel else None
    cat = (uniform(max(n_categories, 1), cfg.entity_category_dim)
           if cfg.use_entity_category else None)
    return EmbeddingTables(word=word, pos=pos, position=position, ner=ner,
                           entity_category=cat)


def load_word_embeddings(path, vocab: Vocab, tables: EmbeddingTables,
                         dim: int = 300, rng=None) -> int:
    """Copy rows for in-vocabulary tokens from a GloVe-style text file.

    Each line is ``token v1 ... v_dim``. Tokens absent from the file are
    re-initialized uniformly in [-0.5/dim, 0.5/dim] (norms comparable to
    pre-trained rows); the PAD row is forced to zero. Returns the number
    of vocabulary rows filled from the file.
    """
    if tables.word.shape[1] != dim:
        raise ConfigError(
            f"embedding table dim {tables.word.shape[1]} != file dim {dim}")
    rng = rng or np.random.default_rng(0)
    filled_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise ParseError(
                    f"{path}:{lineno}: expected token + {dim} floats, "
                    f"got {len(parts)} fields")
            tok = parts[0]
            wid = vocab.word2id.get(tok)
            if wid is None:
                continue
            try:
                tables.word.data[wid] = [float(v) for v in parts[1:]]
            except ValueError as e:
                raise ParseError(f"{path}:{lineno}: {e}") from e
            filled_ids.add(wid)
    bound = 0.5 / dim
    for wid in range(tables.word.shape[0]):
        if wid not in filled_ids:
            tables.word.data[wid] = rng.uniform(-bound, bound, size=dim)
    tables.word.data[PAD_ID] = 0.0
    return len(filled_ids)


def embed_sequence(ex: EncodedExample, tables: EmbeddingTables) -> Tensor:
    """Row i = [word_emb(token_i) ; pos_emb(pos_i)]; PAD rows forced to zero."""
    from . import tensor as T

    w = T.row_select(tables.word, ex.token_ids)
    p = T.row_select(tables.pos, ex.pos_ids)
    x = T.concat_cols([w, p])
    if any(ex.pad_mask):
        x = T.mask_rows(x, [not m for m in ex.pad_mask])
    return x


def read_jsonl(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {e}") from e
            missing = [f for f in REQUIRED_FIELDS if f not in rec]
            if missing:
                raise ParseError(f"{path}:{lineno}: missing fields {missing}")
            records.append(rec)
    return records


def build_label_map(records, negative_label="no_relation") -> dict:
    labels = sorted({rec["relation"] for rec in records} | {negative_label})
    labels.remove(negative_label)
    label2id = {negative_label: 0}
    for lab in labels:
        label2id[lab] = len(label2id)
    return label2id
