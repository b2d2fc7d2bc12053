"""Templated synthetic relation extraction data plus a matching lexicon.

Eight relations, each expressed through relation-specific cue words, and
a configurable share of no_relation sentences built around distractor
verbs absent from the lexicon. Two of the relations (per:children and
per:parents) share their cue words and differ only in subject/object
order, so positional information is genuinely required to separate them.
Generation is fully deterministic given the seed.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

PERSONS = [
    ("anna", "kowalski"), ("david", "chen"), ("maria", "santos"),
    ("james", "okafor"), ("lena", "fischer"), ("omar", "haddad"),
    ("yuki", "tanaka"), ("pavel", "novak"), ("ines", "moreau"),
    ("samuel", "boateng"), ("clara", "lindqvist"), ("rohan", "mehta"),
    ("alice",), ("viktor",), ("fatima",), ("diego",), ("ingrid",),
    ("tomas",), ("amara",), ("henrik",),
]
ORGS = [
    ("northbridge", "capital"), ("helix", "labs"), ("aurora", "systems"),
    ("redstone", "media"), ("bluewater", "energy"), ("vertex", "holdings"),
    ("lumen", "institute"), ("cascade", "partners"), ("orchid", "foods"),
    ("granite", "works"), ("quasar",), ("telmex",), ("sunward",),
    ("novalis",), ("keystone",),
]
CITIES = [
    ("oslo",), ("lagos",), ("porto",), ("quito",), ("sapporo",),
    ("tucson",), ("ghent",), ("davao",), ("riga",), ("cusco",),
    ("springfield", "valley"), ("port", "arthur"),
]

WORD_POS = {
    "was": "VBD", "were": "VBD", "is": "VBZ", "by": "IN", "in": "IN",
    "from": "IN", "at": "IN", "of": "IN", "the": "DT", "a": "DT",
    "and": "CC", "with": "IN", "care": "NN", ".": ".", ",": ",",
    "yesterday": "NN", "reportedly": "RB", "quietly": "RB",
    "according": "VBG", "to": "TO", "reports": "NNS", "sources": "NNS",
    "last": "JJ", "year": "NN", "officials": "NNS", "said": "VBD",
    "city": "NN", "company": "NN",
}

PREFIXES = [
    [], ["yesterday", ","], ["according", "to", "reports", ","],
    ["reportedly", ","], ["quietly", ","],
]
SUFFIXES = [
    ["."], [",", "officials", "said", "."], ["last", "year", "."],
]

# cue: (words, pos_tags); synonyms broaden coverage, noise entries are
# lexicon-only words that never occur in generated text
RELATION_SPECS = [
    {
        "name": "org:founded_by", "subj": "ORGANIZATION", "obj": "PERSON",
        "frame": "Intentionally_create",
        "cues": [(("founded",), ("VBD",)), (("established",), ("VBD",))],
        "synonyms": [(("launched",), ("VBD",)), (("created",), ("VBD",))],
        "noise": [(("instituted",), ("VBD",))],
        "templates": ["S was C by O", "O C S"],
    },
    {
        "name": "per:schools_attended", "subj": "PERSON",
        "obj": "ORGANIZATION", "frame": "Education_teaching",
        "cues": [(("graduated",), ("VBD",)), (("studied",), ("VBD",))],
        "synonyms": [(("enrolled",), ("VBD",))],
        "noise": [(("matriculated",), ("VBD",))],
        "templates": ["S C from O", "S C at O"],
    },
    {
        "name": "per:spouse", "subj": "PERSON", "obj": "PERSON",
        "frame": "Personal_relationship",
        "cues": [(("married",), ("VBD",))],
        "synonyms": [(("wed",), ("VBD",))],
        "noise": [(("espoused",), ("VBD",))],
        "templates": ["S C O", "S and O were C"],
    },
    {
        "name": "org:top_members", "subj": "ORGANIZATION", "obj": "PERSON",
        "frame": "Leadership",
        "cues": [(("chairman",), ("NN",)),
                 (("executive", "director"), ("JJ", "NN"))],
        "synonyms": [(("leads",), ("VBZ",))],
        "noise": [(("helms",), ("VBZ",))],
        "templates": ["O is the C of S"],
    },
    {
        "name": "per:city_of_birth", "subj": "PERSON", "obj": "CITY",
        "frame": "Being_born",
        "cues": [(("born",), ("VBN",))],
        "synonyms": [(("delivered",), ("VBN",))],
        "noise": [(("birthed",), ("VBN",))],
        "templates": ["S was C in O"],
    },
    {
        "name": "org:city_of_headquarters", "subj": "ORGANIZATION",
        "obj": "CITY", "frame": "Being_located",
        "cues": [(("headquartered",), ("VBN",)), (("based",), ("VBN",))],
        "synonyms": [(("located",), ("VBN",))],
        "noise": [(("stationed",), ("VBN",))],
        "templates": ["S is C in O"],
    },
    # direction pair: same cues, opposite subject/object order
    {
        "name": "per:children", "subj": "PERSON", "obj": "PERSON",
        "frame": "Kinship",
        "cues": [(("raised",), ("VBD",))],
        "synonyms": [(("adopted",), ("VBD",))],
        "noise": [(("reared",), ("VBD",))],
        "templates": ["S C O with care"],
    },
    {
        "name": "per:parents", "subj": "PERSON", "obj": "PERSON",
        "frame": "Kinship",
        "cues": [(("raised",), ("VBD",))],
        "synonyms": [(("adopted",), ("VBD",))],
        "noise": [(("reared",), ("VBD",))],
        "templates": ["O C S with care"],
    },
]

DISTRACTORS = [
    (("met",), ("VBD",)), (("visited",), ("VBD",)),
    (("interviewed",), ("VBD",)), (("mentioned",), ("VBD",)),
    (("praised",), ("VBD",)), (("thanked",), ("VBD",)),
]
NEG_TEMPLATES = ["S C O", "S C O in the city", "O was C by S"]

ENTITY_POOLS = {"PERSON": PERSONS, "ORGANIZATION": ORGS, "CITY": CITIES}
NEGATIVE_LABEL = "no_relation"


def _pos_of(word):
    return WORD_POS.get(word, "NN")


def _render(template, subj, obj, cue_words, cue_pos, rng):
    """Expand a template string into aligned token/POS/span structures."""
    tokens, pos = [], []
    spans = {}
    prefix = rng.choice(PREFIXES)
    tokens.extend(prefix)
    pos.extend(_pos_of(w) for w in prefix)
    for slot in template.split():
        if slot == "S":
            spans["subj"] = (len(tokens), len(tokens) + len(subj) - 1)
            tokens.extend(subj)
            pos.extend("NNP" for _ in subj)
        elif slot == "O":
            spans["obj"] = (len(tokens), len(tokens) + len(obj) - 1)
            tokens.extend(obj)
            pos.extend("NNP" for _ in obj)
        elif slot == "C":
            tokens.extend(cue_words)
            pos.extend(cue_pos)
        else:
            tokens.append(slot)
            pos.append(_pos_of(slot))
    suffix = rng.choice(SUFFIXES)
    tokens.extend(suffix)
    pos.extend(_pos_of(w) for w in suffix)
    return tokens, pos, spans["subj"], spans["obj"]


def _make_record(uid, spec, rng):
    subj = rng.choice(ENTITY_POOLS[spec["subj"]])
    obj = rng.choice(ENTITY_POOLS[spec["obj"]])
    while obj == subj:
        obj = rng.choice(ENTITY_POOLS[spec["obj"]])
    cue_pool = spec["cues"] + spec["synonyms"]
    # primary cues are drawn more often than synonyms
    weights = [3] * len(spec["cues"]) + [1] * len(spec["synonyms"])
    cue_words, cue_pos = rng.choices(cue_pool, weights=weights, k=1)[0]
    template = rng.choice(spec["templates"])
    tokens, pos, subj_span, obj_span = _render(template, subj, obj,
                                               cue_words, cue_pos, rng)
    ner = ["O"] * len(tokens)
    for i in range(subj_span[0], subj_span[1] + 1):
        ner[i] = spec["subj"]
    for i in range(obj_span[0], obj_span[1] + 1):
        ner[i] = spec["obj"]
    return {
        "id": uid,
        "token": tokens,
        "subj_start": subj_span[0], "subj_end": subj_span[1],
        "obj_start": obj_span[0], "obj_end": obj_span[1],
        "subj_type": spec["subj"], "obj_type": spec["obj"],
        "stanford_pos": pos,
        "stanford_ner": ner,
        "relation": spec["name"],
    }


def _make_negative(uid, rng):
    types = rng.choice([("PERSON", "PERSON"), ("PERSON", "ORGANIZATION"),
                        ("ORGANIZATION", "PERSON"), ("PERSON", "CITY")])
    spec = {
        "name": NEGATIVE_LABEL, "subj": types[0], "obj": types[1],
        "cues": [rng.choice(DISTRACTORS)], "synonyms": [],
        "templates": NEG_TEMPLATES,
    }
    return _make_record(uid, spec, rng)


def _split(name, n, specs, neg_frac, rng):
    n_neg = round(n * neg_frac)
    labels = [NEGATIVE_LABEL] * n_neg
    for i in range(n - n_neg):
        labels.append(specs[i % len(specs)]["name"])
    rng.shuffle(labels)
    by_name = {s["name"]: s for s in specs}
    records = []
    for i, lab in enumerate(labels):
        uid = f"{name}-{i:05d}"
        if lab == NEGATIVE_LABEL:
            records.append(_make_negative(uid, rng))
        else:
            records.append(_make_record(uid, by_name[lab], rng))
    return records


def build_lexicon_entries(n_relations=8, include_noise=True):
    entries = []
    for spec in RELATION_SPECS[:n_relations]:
        for words, pos in spec["cues"]:
            entries.append({"relation": spec["name"], "frame": spec["frame"],
                            "words": list(words), "pos_tags": list(pos),
                            "source": "frame_unit"})
        extra = spec["synonyms"] + (spec["noise"] if include_noise else [])
        for words, pos in extra:
            entries.append({"relation": spec["name"], "frame": spec["frame"],
                            "words": list(words), "pos_tags": list(pos),
                            "source": "synonym"})
    return entries


def generate_synthetic(n_relations=8, n_train=2000, n_dev=500, n_test=500,
                       seed=0, neg_frac=0.4):
    """Returns ({"train": [...], "dev": [...], "test": [...]}, lexicon)."""
    specs = RELATION_SPECS[:n_relations]
    rng = random.Random(seed)
    splits = {
        "train": _split("train", n_train, specs, neg_frac, rng),
        "dev": _split("dev", n_dev, specs, neg_frac, rng),
        "test": _split("test", n_test, specs, neg_frac, rng),
    }
    return splits, build_lexicon_entries(n_relations)


def write_synthetic(out_dir, n_relations=8, n_train=2000, n_dev=500,
                    n_test=500, seed=0, neg_frac=0.4):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits, lexicon = generate_synthetic(n_relations, n_train, n_dev,
                                         n_test, seed, neg_frac)
    for name, records in splits.items():
        with open(out / f"{name}.jsonl", "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    with open(out / "lexicon.jsonl", "w", encoding="utf-8") as fh:
        for entry in lexicon:
            fh.write(json.dumps(entry) + "\n")
    return out
