"""Synthetic dataset generator tests."""

import collections
import json

import pytest

from kattn.data import REQUIRED_FIELDS, read_jsonl
from kattn.lexicon import load_lexicon
from kattn.synthetic import (NEGATIVE_LABEL, RELATION_SPECS,
                             build_lexicon_entries, generate_synthetic,
                             write_synthetic)


@pytest.fixture(scope="module")
def dataset():
    return generate_synthetic(n_train=400, n_dev=100, n_test=100, seed=0)


class TestGenerate:
    def test_split_sizes(self, dataset):
        splits, _ = dataset
        assert {k: len(v) for k, v in splits.items()} == {
            "train": 400, "dev": 100, "test": 100}

    def test_byte_identical_for_same_seed(self, dataset):
        again = generate_synthetic(n_train=400, n_dev=100, n_test=100, seed=0)
        assert json.dumps(again[0], sort_keys=True) == \
            json.dumps(dataset[0], sort_keys=True)
        assert json.dumps(again[1], sort_keys=True) == \
            json.dumps(dataset[1], sort_keys=True)

    def test_different_seed_differs(self, dataset):
        other = generate_synthetic(n_train=400, n_dev=100, n_test=100, seed=1)
        assert json.dumps(other[0], sort_keys=True) != \
            json.dumps(dataset[0], sort_keys=True)

    def test_required_fields_and_alignment(self, dataset):
        splits, _ = dataset
        for recs in splits.values():
            for r in recs:
                for f in REQUIRED_FIELDS:
                    assert f in r
                n = len(r["token"])
                assert len(r["stanford_pos"]) == n
                assert len(r["stanford_ner"]) == n
                assert 0 <= r["subj_start"] <= r["subj_end"] < n
                assert 0 <= r["obj_start"] <= r["obj_end"] < n
                # spans never overlap
                assert (r["subj_end"] < r["obj_start"]
                        or r["obj_end"] < r["subj_start"])

    def test_class_histogram(self, dataset):
        splits, _ = dataset
        counts = collections.Counter(r["relation"]
                                     for r in splits["train"])
        n = len(splits["train"])
        # 40% negatives, remainder split evenly across 8 relations (+-2%)
        assert abs(counts[NEGATIVE_LABEL] / n - 0.4) <= 0.02
        per_rel = (n - counts[NEGATIVE_LABEL]) / 8
        for spec in RELATION_SPECS:
            assert abs(counts[spec["name"]] - per_rel) <= 0.02 * n + 1

    def test_entity_types_match_spans(self, dataset):
        splits, _ = dataset
        for r in splits["dev"]:
            assert r["stanford_ner"][r["subj_start"]] == r["subj_type"]
            assert r["stanford_ner"][r["obj_start"]] == r["obj_type"]

    def test_every_positive_contains_a_lexicon_cue(self, dataset):
        splits, lex = dataset
        cues_by_rel = collections.defaultdict(set)
        for e in lex:
            cues_by_rel[e["relation"]].add(tuple(e["words"]))
        for recs in splits.values():
            for r in recs:
                if r["relation"] == NEGATIVE_LABEL:
                    continue
                toks = r["token"]
                found = any(
                    tuple(toks[i:i + len(cue)]) == cue
                    for cue in cues_by_rel[r["relation"]]
                    for i in range(len(toks)))
                assert found, r["id"]

    def test_direction_pair_shares_cue_vocabulary(self):
        by_name = {s["name"]: s for s in RELATION_SPECS}
        children = by_name["per:children"]
        parents = by_name["per:parents"]
        assert children["cues"] == parents["cues"]
        assert children["templates"] != parents["templates"]


class TestLexiconEntries:
    def test_entries_cover_all_relations_with_frame_units(self):
        entries = build_lexicon_entries()
        frame_rels = {e["relation"] for e in entries
                      if e["source"] == "frame_unit"}
        assert frame_rels == {s["name"] for s in RELATION_SPECS}

    def test_synonyms_marked(self):
        entries = build_lexicon_entries()
        assert any(e["source"] == "synonym" for e in entries)


class TestWriteSynthetic:
    def test_files_roundtrip_through_loaders(self, tmp_path):
        write_synthetic(tmp_path, n_train=50, n_dev=20, n_test=20, seed=3)
        for name, expected in (("train", 50), ("dev", 20), ("test", 20)):
            recs = read_jsonl(tmp_path / f"{name}.jsonl")
            assert len(recs) == expected
        entries = load_lexicon(tmp_path / "lexicon.jsonl")
        assert entries
        rels = {e.relation for e in entries}
        assert "per:children" in rels
