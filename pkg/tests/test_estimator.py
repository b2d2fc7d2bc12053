"""Estimator-interface tests: fit/predict surface and sklearn protocol."""

import numpy as np
import pytest
from sklearn.base import clone

from kattn import RelationExtractor
from kattn.data import DataError
from kattn.estimator import check_records
from kattn.lexicon import LexiconEntry
from kattn.synthetic import generate_synthetic


@pytest.fixture(scope="module")
def data():
    splits, lex_dicts = generate_synthetic(n_train=120, n_dev=0, n_test=40,
                                           seed=0)
    lexicon = [LexiconEntry(relation=d["relation"], frame=d["frame"],
                            words=tuple(d["words"]),
                            pos_tags=tuple(d["pos_tags"]), source=d["source"])
               for d in lex_dicts]
    def xy(recs):
        return ([{k: v for k, v in r.items() if k != "relation"}
                 for r in recs], [r["relation"] for r in recs])
    return xy(splits["train"]), xy(splits["test"]), lexicon


SMALL = dict(word_dim=8, pos_tag_dim=4, position_dim=4, ffn_dim=6,
             rel_enc_dim=4, rel_clip=4, pool_attn_dim=5, mca_attn_dim=5,
             fc_dim=5, dropout_input=0.0, dropout_attn_out=0.0,
             dropout_ffn=0.0, dropout_attn_weights=0.0)


def make_estimator(lexicon, **over):
    kwargs = dict(kind="knwl", lexicon=lexicon, epochs=1, lr=0.05,
                  batch_size=16, heads=2, seed=0,
                  config_overrides=dict(SMALL))
    kwargs.update(over)
    return RelationExtractor(**kwargs)


class TestCheckRecords:
    def test_attaches_labels_and_defaults(self, data):
        (X, y), _, _ = data
        recs = check_records(X[:3], y[:3])
        assert [r["relation"] for r in recs] == y[:3]

    def test_length_mismatch(self, data):
        (X, y), _, _ = data
        with pytest.raises(DataError):
            check_records(X[:3], y[:2])

    def test_missing_field(self):
        with pytest.raises(DataError, match="missing fields"):
            check_records([{"token": ["a"]}], ["no_relation"])

    def test_tag_length_mismatch(self, data):
        (X, y), _, _ = data
        bad = dict(X[0])
        bad["stanford_pos"] = bad["stanford_pos"][:-1]
        with pytest.raises(DataError, match="length mismatch"):
            check_records([bad], [y[0]])


class TestEstimator:
    def test_fit_predict_shapes(self, data):
        (X, y), (Xt, yt), lexicon = data
        est = make_estimator(lexicon).fit(X, y)
        pred = est.predict(Xt)
        assert pred.shape == (len(Xt),)
        assert set(pred) <= set(est.classes_)
        proba = est.predict_proba(Xt)
        assert proba.shape == (len(Xt), len(est.classes_))
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)

    def test_score_is_micro_f1(self, data):
        (X, y), (Xt, yt), lexicon = data
        est = make_estimator(lexicon).fit(X, y)
        s = est.score(Xt, yt)
        assert 0.0 <= s <= 1.0

    def test_classes_sorted_by_id(self, data):
        (X, y), _, lexicon = data
        est = make_estimator(lexicon).fit(X, y)
        assert est.classes_[0] == "no_relation"
        assert [est.label2id_[c] for c in est.classes_] == \
            list(range(len(est.classes_)))

    def test_get_params_and_clone(self, data):
        _, _, lexicon = data
        est = make_estimator(lexicon, epochs=2)
        params = est.get_params()
        assert params["epochs"] == 2 and params["kind"] == "knwl"
        cloned = clone(est)
        assert cloned.get_params() == params

    def test_set_params_roundtrip(self, data):
        _, _, lexicon = data
        est = make_estimator(lexicon)
        est.set_params(epochs=3, beta=0.5)
        assert est.epochs == 3 and est.beta == 0.5

    def test_unknown_config_override_rejected(self, data):
        (X, y), _, lexicon = data
        est = make_estimator(lexicon)
        est.config_overrides = {"definitely_not_a_field": 1}
        with pytest.raises(ValueError, match="unknown config override"):
            est.fit(X[:10], y[:10])

    def test_refit_same_seed_is_deterministic(self, data):
        (X, y), (Xt, _), lexicon = data
        a = make_estimator(lexicon).fit(X, y).predict_proba(Xt[:5])
        b = make_estimator(lexicon).fit(X, y).predict_proba(Xt[:5])
        assert (a == b).all()
