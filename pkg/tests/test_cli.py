"""Command-line interface tests (exit codes, artifacts, determinism)."""

import json
import os

import pytest

from kattn.cli import main

TINY_OVERRIDES = [
    "--set", "word_dim=8", "--set", "pos_tag_dim=4", "--set",
    "position_dim=4", "--set", "heads=2", "--set", "ffn_dim=6",
    "--set", "rel_enc_dim=4", "--set", "rel_clip=4",
    "--set", "pool_attn_dim=5", "--set", "mca_attn_dim=5",
    "--set", "fc_dim=5", "--set", "dropout_input=0",
    "--set", "dropout_attn_out=0", "--set", "dropout_ffn=0",
    "--set", "dropout_attn_weights=0", "--set", "epochs=1",
    "--set", "batch_size=16", "--set", "lr=0.05",
]


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    rc = main(["gen-synthetic", "--out-dir", str(d), "--n-train", "60",
               "--n-dev", "24", "--n-test", "24", "--seed", "0"])
    assert rc == 0
    return d


def train(data_dir, out_dir, kind="knwl", extra=()):
    return main(["train", "--data-dir", str(data_dir), "--out-dir",
                 str(out_dir), "--set", f"kind={kind}", *TINY_OVERRIDES,
                 *extra])


@pytest.fixture(scope="module")
def trained(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert train(data_dir, out) == 0
    return out


@pytest.fixture(scope="module")
def trained_si(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run_si")
    assert train(data_dir, out, kind="si") == 0
    return out


class TestGenSynthetic:
    def test_writes_all_files(self, data_dir):
        for name in ("train.jsonl", "dev.jsonl", "test.jsonl",
                     "lexicon.jsonl"):
            assert (data_dir / name).exists()


class TestTrain:
    def test_writes_artifacts(self, trained):
        for name in ("manifest.json", "metrics.json", "checkpoint.bin",
                     "checkpoint.bin.meta.json"):
            assert (trained / name).exists()

    def test_manifest_digests_inputs(self, trained, data_dir):
        manifest = json.loads((trained / "manifest.json").read_text())
        assert set(manifest["inputs"]) == {"train.jsonl", "dev.jsonl",
                                           "test.jsonl", "lexicon.jsonl"}
        for digest in manifest["inputs"].values():
            assert len(digest) == 64
        assert manifest["config"]["kind"] == "knwl"

    def test_metrics_fields(self, trained):
        metrics = json.loads((trained / "metrics.json").read_text())
        for key in ("precision", "recall", "f1", "macro_f1", "per_class",
                    "history", "dev_f1_per_seed"):
            assert key in metrics

    def test_repeat_run_metrics_byte_identical(self, data_dir, tmp_path,
                                               trained):
        out2 = tmp_path / "repeat"
        assert train(data_dir, out2) == 0
        assert (out2 / "metrics.json").read_bytes() == \
            (trained / "metrics.json").read_bytes()

    def test_bad_config_key_exits_2(self, data_dir, tmp_path, capsys):
        rc = train(data_dir, tmp_path / "x", extra=["--set", "no_such=1"])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_bad_data_exits_3(self, tmp_path, capsys):
        bad = tmp_path / "bad"
        bad.mkdir()
        for name in ("train", "dev", "test"):
            (bad / f"{name}.jsonl").write_text("{broken\n")
        rc = train(bad, tmp_path / "y")
        assert rc == 3
        assert "data error" in capsys.readouterr().err

    def test_env_seed_override(self, data_dir, tmp_path, monkeypatch):
        monkeypatch.setenv("KATTN_SEED", "17")
        out = tmp_path / "env"
        assert train(data_dir, out) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 17
        assert manifest["seeds"] == [17]

    def test_ablate_switch_lands_in_manifest(self, data_dir, tmp_path):
        out = tmp_path / "abl"
        assert train(data_dir, out,
                     extra=["--ablate", "relative-positions"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["relative_positions"] is False


class TestEval:
    def test_eval_prints_report(self, trained, data_dir, capsys, tmp_path):
        out = tmp_path / "report.json"
        rc = main(["eval", "--checkpoint", str(trained / "checkpoint.bin"),
                   "--data", str(data_dir / "test.jsonl"),
                   "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert 0.0 <= report["f1"] <= 1.0
        assert json.loads(capsys.readouterr().out) == report

    def test_eval_matches_training_metrics(self, trained, data_dir, capsys):
        rc = main(["eval", "--checkpoint", str(trained / "checkpoint.bin"),
                   "--data", str(data_dir / "test.jsonl")])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        metrics = json.loads((trained / "metrics.json").read_text())
        assert report["f1"] == metrics["f1"]
        assert report["per_class"] == metrics["per_class"]


class TestSweepBeta:
    def test_non_si_checkpoint_exits_4(self, trained, data_dir, capsys):
        rc = main(["sweep-beta", "--checkpoint",
                   str(trained / "checkpoint.bin"),
                   "--data", str(data_dir / "dev.jsonl")])
        assert rc == 4

    def test_csv_output(self, trained_si, data_dir, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main(["sweep-beta", "--checkpoint",
                   str(trained_si / "checkpoint.bin"),
                   "--data", str(data_dir / "dev.jsonl"),
                   "--grid", "0,0.5,1", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "beta,precision,recall,f1"
        assert len(lines) == 4
        betas = [float(l.split(",")[0]) for l in lines[1:]]
        assert betas == [0.0, 0.5, 1.0]
        assert "trend" in capsys.readouterr().err


class TestVisualize:
    def test_unknown_id_exits_5(self, trained, data_dir, tmp_path, capsys):
        rc = main(["visualize", "--checkpoint",
                   str(trained / "checkpoint.bin"),
                   "--data", str(data_dir / "test.jsonl"),
                   "--ids", "not-an-id", "--out", str(tmp_path / "v.html")])
        assert rc == 5
        assert "unknown example id" in capsys.readouterr().err

    def test_writes_html_and_json(self, trained, data_dir, tmp_path):
        out = tmp_path / "attn.html"
        rc = main(["visualize", "--checkpoint",
                   str(trained / "checkpoint.bin"),
                   "--data", str(data_dir / "test.jsonl"),
                   "--ids", "test-00000,test-00001", "--out", str(out)])
        assert rc == 0
        assert out.exists()
        dump = json.loads((tmp_path / "attn.json").read_text())
        assert [r["id"] for r in dump] == ["test-00000", "test-00001"]
        for r in dump:
            for weights in r["channels"].values():
                assert len(weights) == len(r["tokens"])


class TestBuildLexicon:
    def test_writes_jsonl(self, tmp_path):
        out = tmp_path / "lex.jsonl"
        rc = main(["build-lexicon", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        entries = [json.loads(l) for l in lines]
        assert {e["source"] for e in entries} <= {"frame_unit", "synonym"}

    def test_no_noise_shrinks(self, tmp_path):
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        main(["build-lexicon", "--out", str(a)])
        main(["build-lexicon", "--out", str(b), "--no-noise"])
        assert len(b.read_text().splitlines()) < \
            len(a.read_text().splitlines())
