"""Command-line surface: train, eval, sweep-beta, visualize, gen-synthetic,
build-lexicon.

Exit codes: 0 success, 2 invalid config key/value, 3 data parse failure,
4 wrong checkpoint kind for sweep-beta, 5 unknown example id. The
KATTN_SEED environment variable overrides the configured seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import load_model, save_model
from .config import ConfigError, ModelConfig
from .data import ParseError, build_label_map, build_vocab, encode_example, read_jsonl
from .heads import argmax_class, interpolate
from .lexicon import load_lexicon
from .synthetic import build_lexicon_entries, write_synthetic
from .training import (MetricsReport, evaluate, macro_f1, micro_prf,
                       per_class_counts, run_experiment)

ABLATIONS = {
    "multi-head": "multi_head",
    "synonyms": "include_synonyms",
    "mean-subtraction": "mean_subtraction",
    "output-mask": "output_mask",
    "entity-mask": "entity_mask",
    "relative-positions": "relative_positions",
}


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def _load_config(args) -> ModelConfig:
    raw = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    for item in args.set or []:
        key, _, value = item.partition("=")
        raw[key] = _coerce(value)
    cfg = ModelConfig.from_dict(raw)
    for name in args.ablate or []:
        if name not in ABLATIONS:
            raise ConfigError(f"unknown ablation switch: {name!r}")
        setattr(cfg, ABLATIONS[name], False)
    env_seed = os.environ.get("KATTN_SEED")
    if env_seed is not None:
        cfg.seed = int(env_seed)
    return cfg.validate()


def _load_splits(data_dir, cfg):
    data_dir = Path(data_dir)
    raw = {name: read_jsonl(data_dir / f"{name}.jsonl")
           for name in ("train", "dev", "test")}
    lexicon_path = data_dir / "lexicon.jsonl"
    lexicon = load_lexicon(lexicon_path) if lexicon_path.exists() else []
    vocab = build_vocab(
        raw["train"],
        lexicon_words=[w for e in lexicon for w in e.words],
        lexicon_pos=[t for e in lexicon for t in e.pos_tags])
    label2id = build_label_map(raw["train"])
    category_map = {}
    if cfg.use_entity_category:
        pairs = sorted({(r["subj_type"], r["obj_type"]) for r in raw["train"]})
        category_map = {p: i for i, p in enumerate(pairs)}
    splits = {name: [encode_example(r, vocab, label2id, cfg, cfg.rel_clip)
                     for r in recs]
              for name, recs in raw.items()}
    return splits, raw, vocab, label2id, lexicon, category_map


def cmd_train(args) -> int:
    try:
        cfg = _load_config(args)
    except (ConfigError, TypeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        splits, _, vocab, label2id, lexicon, category_map = _load_splits(
            args.data_dir, cfg)
    except ParseError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = ([int(s) for s in args.seeds.split(",")] if args.seeds
             else [cfg.seed])
    data_dir = Path(args.data_dir)
    manifest = {
        "config": cfg.to_dict(),
        "inputs": {f.name: _sha256(f)
                   for f in sorted(data_dir.glob("*.jsonl"))},
        "seeds": seeds,
        "out_dir": str(out_dir),
        "version": f"kattn-{__version__}",
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)

    log = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    model, report, dev_f1s = run_experiment(
        cfg, splits, vocab, label2id, lexicon, seeds=seeds,
        category_map=category_map, log=log)
    save_model(out_dir / "checkpoint.bin", model)
    payload = report.to_dict()
    payload["dev_f1_per_seed"] = dev_f1s
    with open(out_dir / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
    print(json.dumps({"f1": report.f1, "precision": report.precision,
                      "recall": report.recall}, sort_keys=True))
    return 0


def _encode_for_model(model, records):
    return [encode_example(r, model.vocab, model.label2id, model.cfg,
                           model.cfg.rel_clip) for r in records]


def cmd_eval(args) -> int:
    model = load_model(args.checkpoint)
    try:
        records = read_jsonl(args.data)
    except ParseError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    examples = _encode_for_model(model, records)
    report = evaluate(model, examples)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_sweep_beta(args) -> int:
    model = load_model(args.checkpoint)
    if model.cfg.kind != "si":
        print("sweep-beta requires a softmax-interpolation (si) checkpoint",
              file=sys.stderr)
        return 4
    try:
        records = read_jsonl(args.data)
    except ParseError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    examples = _encode_for_model(model, records)
    # channels evaluated exactly once; the sweep reuses the cached
    # distributions
    cached = [model.channel_distributions(ex) for ex in examples]
    gold = [model.id2label[ex.gold] for ex in examples]
    grid = [float(b) for b in args.grid.split(",")]
    rows = []
    for beta in grid:
        pred = [model.id2label[argmax_class(interpolate(p1, p2, beta))]
                for p1, p2 in cached]
        p, r, f1 = micro_prf(gold, pred, "no_relation")
        rows.append((beta, p, r, f1))
    lines = ["beta,precision,recall,f1"]
    lines += [f"{b},{p:.6f},{r:.6f},{f:.6f}" for b, p, r, f in rows]
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    print(csv_text, end="")
    prec_trend = "non-increasing" if all(
        rows[i][1] >= rows[i + 1][1] for i in range(len(rows) - 1)) else "mixed"
    rec_trend = "non-decreasing" if all(
        rows[i][2] <= rows[i + 1][2] for i in range(len(rows) - 1)) else "mixed"
    print(f"# precision trend: {prec_trend}; recall trend: {rec_trend}",
          file=sys.stderr)
    return 0


def cmd_visualize(args) -> int:
    model = load_model(args.checkpoint)
    try:
        records = read_jsonl(args.data)
    except ParseError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    by_id = {str(r["id"]): r for r in records}
    wanted = args.ids.split(",") if args.ids else list(by_id)[:10]
    rows = []
    for uid in wanted:
        if uid not in by_id:
            print(f"unknown example id: {uid}", file=sys.stderr)
            return 5
        rec = by_id[uid]
        ex = _encode_for_model(model, [rec])[0]
        weights = model.attention_weights(ex)
        pred = model.id2label[model.predict(ex)]
        rows.append({"id": uid, "tokens": rec["token"],
                     "gold": rec["relation"], "pred": pred,
                     "channels": {k: list(map(float, v))
                                  for k, v in weights.items()}})
    from .visualize import export
    export(rows, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_gen_synthetic(args) -> int:
    out = write_synthetic(args.out_dir, n_relations=args.n_relations,
                          n_train=args.n_train, n_dev=args.n_dev,
                          n_test=args.n_test, seed=args.seed,
                          neg_frac=args.neg_frac)
    print(f"wrote dataset and lexicon under {out}")
    return 0


def cmd_build_lexicon(args) -> int:
    entries = build_lexicon_entries(include_noise=not args.no_noise)
    with open(args.out, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(e) + "\n")
    print(f"wrote {len(entries)} lexicon entries to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kattn")
    parser.add_argument("--version", action="version",
                        version=f"kattn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write artifacts")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config value")
    p.add_argument("--ablate", action="append", choices=sorted(ABLATIONS),
                   help="disable a component")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-beta", help="interpolation-weight sweep")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--grid", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_beta)

    p = sub.add_parser("visualize", help="export attention weights to HTML")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--ids", help="comma-separated example ids")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("gen-synthetic", help="generate the synthetic dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-relations", type=int, default=8)
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-dev", type=int, default=500)
    p.add_argument("--n-test", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--neg-frac", type=float, default=0.4)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("build-lexicon", help="write the synthetic lexicon")
    p.add_argument("--out", required=True)
    p.add_argument("--no-noise", action="store_true",
                   help="omit lexicon-only noise synonyms")
    p.set_defaults(func=cmd_build_lexicon)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
