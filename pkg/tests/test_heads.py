"""Channel integration (multi-channel attention, interpolation) and
classifier-head tests."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kattn import tensor as T
from kattn.config import ConfigError
from kattn.heads import (Affine, ClassifierHead, MultiChannelAttention,
                         argmax_class, interpolate, mca_combine)
from kattn.tensor import ShapeError, Tensor

from conftest import check_grad


def col(values):
    return Tensor(np.asarray(values, dtype=np.float64).reshape(-1, 1),
                  requires_grad=True)


def make_mca(dims, hidden=4, seed=0):
    return MultiChannelAttention(dims, hidden, np.random.default_rng(seed))


def naive_mca(features, params):
    hidden, scores = [], []
    for m, f in zip(params.maps, features):
        h = np.maximum(m.w.data.T @ f + m.b.data, 0.0)
        hidden.append(h)
        scores.append(float(h.reshape(-1) @ params.context.data.reshape(-1)))
    mx = max(scores)
    e = [math.exp(s - mx) for s in scores]
    w = [v / sum(e) for v in e]
    return sum(wj * hj for wj, hj in zip(w, hidden)), np.array(w)


class TestMultiChannelAttention:
    def test_matches_naive_loop(self):
        rng = np.random.default_rng(3)
        params = make_mca([5, 7, 6], hidden=4, seed=1)
        feats = [Tensor(rng.normal(size=(d, 1))) for d in (5, 7, 6)]
        got, w = mca_combine(feats, params, return_weights=True)
        want, ww = naive_mca([f.data for f in feats], params)
        np.testing.assert_allclose(got.data, want, atol=1e-9)
        np.testing.assert_allclose(w, ww, atol=1e-9)

    def test_weights_simplex(self):
        rng = np.random.default_rng(4)
        params = make_mca([3, 3], seed=2)
        feats = [Tensor(rng.normal(size=(3, 1))) for _ in range(2)]
        _, w = mca_combine(feats, params, return_weights=True)
        assert abs(w.sum() - 1.0) < 1e-12 and (w >= 0).all()

    def test_duplicate_channels_give_uniform_weights(self):
        # identical channel features through identical maps score equally
        rng = np.random.default_rng(5)
        params = make_mca([4, 4, 4], seed=3)
        shared = params.maps[0]
        params.maps = [shared, shared, shared]
        f = Tensor(rng.normal(size=(4, 1)))
        combined, w = mca_combine([f, f, f], params, return_weights=True)
        np.testing.assert_allclose(w, [1 / 3] * 3, atol=1e-12)
        h = np.maximum(shared.w.data.T @ f.data + shared.b.data, 0.0)
        np.testing.assert_allclose(combined.data, h, atol=1e-12)

    def test_combined_inside_hidden_hull(self):
        rng = np.random.default_rng(6)
        params = make_mca([4, 4], hidden=3, seed=7)
        feats = [Tensor(rng.normal(size=(4, 1))) for _ in range(2)]
        combined = mca_combine(feats, params).data.reshape(-1)
        hidden = np.stack([
            np.maximum(m.w.data.T @ f.data + m.b.data, 0.0).reshape(-1)
            for m, f in zip(params.maps, feats)])
        lo, hi = hidden.min(axis=0), hidden.max(axis=0)
        assert (combined >= lo - 1e-12).all() and (combined <= hi + 1e-12).all()

    def test_channel_count_mismatch_raises(self):
        params = make_mca([3, 3])
        f = Tensor(np.zeros((3, 1)))
        with pytest.raises(ConfigError):
            mca_combine([f], params)
        with pytest.raises(ConfigError):
            mca_combine([], params)
        with pytest.raises(ConfigError):
            MultiChannelAttention([], 4, np.random.default_rng(0))

    def test_gradients(self):
        rng = np.random.default_rng(8)
        params = make_mca([3, 4], hidden=3, seed=9)
        feats = [Tensor(rng.normal(size=(d, 1)), requires_grad=True)
                 for d in (3, 4)]

        def build():
            return mca_combine(feats, params)

        check_grad(build, feats + list(params.named().values()))


class TestInterpolate:
    def test_endpoints_reproduce_channels(self):
        p1 = np.array([0.7, 0.2, 0.1])
        p2 = np.array([0.1, 0.3, 0.6])
        np.testing.assert_array_equal(interpolate(p1, p2, 1.0), p1)
        np.testing.assert_array_equal(interpolate(p1, p2, 0.0), p2)

    def test_arithmetic(self):
        p1 = np.array([1.0, 0.0])
        p2 = np.array([0.0, 1.0])
        np.testing.assert_allclose(interpolate(p1, p2, 0.8), [0.8, 0.2],
                                   atol=1e-15)

    def test_out_of_range_beta(self):
        p = np.array([1.0])
        for beta in (-0.1, 1.1):
            with pytest.raises(ConfigError):
                interpolate(p, p, beta)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            interpolate(np.zeros(3), np.zeros(4), 0.5)

    @given(st.floats(min_value=0.0, max_value=1.0),
           st.integers(min_value=0, max_value=10**6))
    def test_convex_mix_stays_a_distribution(self, beta, seed):
        rng = np.random.default_rng(seed)
        p1 = rng.dirichlet(np.ones(5))
        p2 = rng.dirichlet(np.ones(5))
        mix = interpolate(p1, p2, beta)
        assert abs(mix.sum() - 1.0) < 1e-12
        assert (mix >= 0).all()

    def test_sum_identity_over_many_pairs(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            p1 = rng.dirichlet(np.ones(4))
            p2 = rng.dirichlet(np.ones(4))
            beta = rng.uniform()
            mix = interpolate(p1, p2, beta)
            np.testing.assert_allclose(mix + interpolate(p1, p2, 1 - beta),
                                       p1 + p2, atol=1e-12)


class TestArgmax:
    def test_lowest_index_tie_break(self):
        assert argmax_class([0.4, 0.4, 0.2]) == 0
        assert argmax_class([0.1, 0.6, 0.3]) == 1


class TestClassifierHead:
    def test_logits_shape_and_uniform_loss(self):
        n_classes = 7
        rng = np.random.default_rng(12)
        head = ClassifierHead(5, 4, n_classes, rng)
        head.out.w.data[:] = 0.0  # zero logits -> uniform distribution
        head.out.b.data[:] = 0.0
        f = Tensor(rng.normal(size=(5, 1)))
        logits = head(f)
        assert logits.shape == (1, n_classes)
        loss = T.cross_entropy(logits, [3])
        assert abs(float(loss.data) - math.log(n_classes)) < 1e-12

    def test_gradients(self):
        rng = np.random.default_rng(13)
        head = ClassifierHead(4, 3, 5, rng)
        f = Tensor(rng.normal(size=(4, 1)), requires_grad=True)

        def build():
            return T.cross_entropy(head(f), [2])

        check_grad(build, [f] + list(head.named().values()))

    def test_affine_column_convention(self):
        rng = np.random.default_rng(14)
        a = Affine(3, 2, rng, "a")
        x = Tensor(rng.normal(size=(3, 1)))
        np.testing.assert_allclose(a(x).data,
                                   a.w.data.T @ x.data + a.b.data,
                                   atol=1e-12)
