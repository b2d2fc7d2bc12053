"""Relation indicator generation from a static lexicon file.

The lexicon is JSON Lines; each entry maps a relation to one lexical unit
(a word or phrase with POS tags) sourced either from a semantic frame
("frame_unit") or from a synonym list ("synonym"). Indicators are built by
averaging the concatenated word+POS embeddings of each unit's words, so
they track the live embedding tables as those are fine-tuned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .data import EmbeddingTables, ParseError, Vocab
from .tensor import Tensor

SOURCES = ("frame_unit", "synonym")


@dataclass(frozen=True)
class LexiconEntry:
    relation: str
    frame: str
    words: tuple
    pos_tags: tuple
    source: str

    def key(self):
        return (self.words, self.pos_tags)


def load_lexicon(path):
    """Parse and validate lexicon entries; exact duplicates collapse to one."""
    entries = []
    seen = set()
    frame_relations = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {e}") from e
            try:
                entry = LexiconEntry(
                    relation=rec["relation"],
                    frame=rec["frame"],
                    words=tuple(rec["words"]),
                    pos_tags=tuple(rec["pos_tags"]),
                    source=rec["source"],
                )
            except KeyError as e:
                raise ParseError(f"{path}:{lineno}: missing field {e}") from e
            if not entry.words:
                raise ParseError(f"{path}:{lineno}: empty word list")
            if len(entry.words) != len(entry.pos_tags):
                raise ParseError(
                    f"{path}:{lineno}: {len(entry.words)} words vs "
                    f"{len(entry.pos_tags)} POS tags")
            if entry.source not in SOURCES:
                raise ParseError(
                    f"{path}:{lineno}: unknown source {entry.source!r}")
            if entry.source == "frame_unit":
                frame_relations.add(entry.relation)
            if entry.key() in seen:
                continue
            seen.add(entry.key())
            entries.append(entry)
    for e in entries:
        if e.source == "synonym" and e.relation not in frame_relations:
            raise ParseError(
                f"synonym entry for {e.relation!r} has no frame_unit entry")
    return entries


@dataclass
class RelationIndicatorSet:
    matrix: Tensor  # (m, d_k), rows aligned with provenance
    provenance: list
    mean: Tensor  # (1, d_k) cached column mean

    @property
    def count(self) -> int:
        return self.matrix.shape[0]


def build_indicators(entries, tables: EmbeddingTables, vocab: Vocab,
                     include_synonyms=True) -> RelationIndicatorSet:
    """k_i = mean over the unit's words of [word_emb ; pos_emb].

    Built from the current tables, so gradients flow back into the
    embeddings and the indicators follow fine-tuning.
    """
    kept = [e for e in entries
            if include_synonyms or e.source == "frame_unit"]
    if not kept:
        raise ValueError("no lexicon entries survive filtering")
    word_ids, pos_ids, weights = [], [], []
    for row, e in enumerate(kept):
        share = 1.0 / len(e.words)
        for w, t in zip(e.words, e.pos_tags):
            word_ids.append(vocab.word_id(w))
            pos_ids.append(vocab.pos_id(t))
            weights.append((row, share))
    avg = np.zeros((len(kept), len(word_ids)))
    for col, (row, share) in enumerate(weights):
        avg[row, col] = share
    gathered = T.concat_cols([T.row_select(tables.word, word_ids),
                              T.row_select(tables.pos, pos_ids)])
    matrix = T.matmul(Tensor(avg), gathered)
    mean = T.mean_rows(matrix)
    return RelationIndicatorSet(matrix=matrix, provenance=kept, mean=mean)
