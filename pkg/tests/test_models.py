import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import poisonlab as pl
from poisonlab.errors import DomainError, ShapeError
from poisonlab.mathcore import lambert_w0, make_rng
from poisonlab.models import (ModelSpec, accuracy, loss, mean_param_grad,
                              mixed_vjp, param_grad, predict, predict_batch,
                              unpack_mlp)

W_STAR = np.array([0.0, np.log(2.0)])

FAMILY_CASES = [
    (ModelSpec("least_squares", 4), "real", 1.0),
    (ModelSpec("logistic_binary", 4), 2, 1.0),
    (ModelSpec("softmax_linear", 4, classes=3), 3, 0.5),
    (ModelSpec("mlp1", 4, classes=3, hidden=5), 3, 0.5),
]


def draw_case(spec, label_kind, pscale, rng):
    params = pscale * rng.standard_normal(spec.param_dim)
    x = rng.standard_normal(spec.input_dim)
    if spec.family == "mlp1":
        # keep pre-activations away from the kink so the oracle is smooth
        for _ in range(50):
            u, _ = unpack_mlp(spec, params)
            if np.abs(u @ x).min() > 5e-2:
                break
            x = rng.standard_normal(spec.input_dim)
    if label_kind == "real":
        y = float(rng.standard_normal())
    else:
        y = int(rng.integers(0, label_kind))
    return params, x, y


class TestLoss:
    def test_least_squares_value(self):
        spec = ModelSpec("least_squares", 2)
        assert loss(spec, [1.0, 0.0], [2.0, 1.0], 0.0) == pytest.approx(2.0)

    def test_logistic_at_zero_margin(self):
        spec = ModelSpec("logistic_binary", 2)
        assert loss(spec, [0.0, 0.0], [3.0, -1.0], 1) == pytest.approx(np.log(2.0))

    def test_softmax_two_class_reduces_to_logistic(self):
        rng = make_rng(3)
        soft = ModelSpec("softmax_linear", 3, classes=2)
        logi = ModelSpec("logistic_binary", 3)
        for _ in range(20):
            w0 = rng.standard_normal(3)
            w1 = rng.standard_normal(3)
            big = np.stack([w0, w1], axis=1).ravel()
            x = rng.standard_normal(3)
            y = int(rng.integers(0, 2))
            assert loss(soft, big, x, y) == pytest.approx(
                loss(logi, w1 - w0, x, y), rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            loss(ModelSpec("least_squares", 3), [1.0, 2.0], [1.0, 2.0, 3.0], 0.0)


class TestParamGrad:
    def test_least_squares_example(self):
        g = param_grad(ModelSpec("least_squares", 2), [1.0, 0.0], [2.0, 1.0], 0.0)
        assert np.allclose(g, [4.0, 2.0])

    def test_logistic_zero_margin(self):
        spec = ModelSpec("logistic_binary", 2)
        x = np.array([2.0, -1.0])
        g1 = param_grad(spec, [0.0, 0.0], x, 1)
        assert np.allclose(g1, -x / 2.0)
        g0 = param_grad(spec, [0.0, 0.0], x, 0)
        assert np.allclose(g0, x / 2.0)

    @pytest.mark.parametrize("spec,label_kind,pscale", FAMILY_CASES,
                             ids=lambda v: getattr(v, "family", None) or str(v))
    def test_matches_finite_differences(self, spec, label_kind, pscale):
        rng = make_rng(99)
        h = 1e-6
        for _ in range(100):
            params, x, y = draw_case(spec, label_kind, pscale, rng)
            g = param_grad(spec, params, x, y)
            fd = np.empty_like(g)
            for i in range(g.size):
                e = np.zeros_like(params)
                e[i] = h
                fd[i] = (loss(spec, params + e, x, y)
                         - loss(spec, params - e, x, y)) / (2 * h)
            assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1.0)


class TestMeanParamGrad:
    def test_single_point_equals_param_grad(self, toy, logistic2):
        one = toy.subset([0])
        g1 = mean_param_grad(logistic2, W_STAR, one)
        g2 = param_grad(logistic2, W_STAR, toy.x[0], int(toy.y[0]))
        assert np.allclose(g1, g2, atol=1e-15)

    def test_toy_stationary_at_w_star(self, toy, logistic2):
        g = mean_param_grad(logistic2, W_STAR, toy)
        assert np.linalg.norm(g) <= 1e-12

    def test_toy_at_two_w_star(self, toy, logistic2):
        g = mean_param_grad(logistic2, 2 * W_STAR, toy)
        assert np.allclose(g, [0.0, 2.0 / 15.0], atol=1e-12)

    def test_matches_stacked_mean(self):
        spec = ModelSpec("softmax_linear", 3, classes=3)
        rng = make_rng(12)
        ds = pl.gen_gauss_classification(seed=2, n=40, d=2)
        params = rng.standard_normal(spec.param_dim)
        from poisonlab.models import grads_batch
        stacked = grads_batch(spec, params, ds.x, ds.y).mean(axis=0)
        assert np.allclose(mean_param_grad(spec, params, ds), stacked, atol=1e-14)


class TestMixedVjp:
    def test_least_squares_example(self):
        out = mixed_vjp(ModelSpec("least_squares", 2), [1.0, 0.0],
                        [2.0, 1.0], 0.0, [0.0, 1.0])
        assert np.allclose(out, [1.0, 2.0])

    def test_zero_direction(self):
        spec = ModelSpec("softmax_linear", 3, classes=3)
        rng = make_rng(4)
        out = mixed_vjp(spec, rng.standard_normal(spec.param_dim),
                        rng.standard_normal(3), 1, np.zeros(spec.param_dim))
        assert np.allclose(out, 0.0)

    @pytest.mark.parametrize("spec,label_kind,pscale", FAMILY_CASES,
                             ids=lambda v: getattr(v, "family", None) or str(v))
    def test_matches_gradient_differences(self, spec, label_kind, pscale):
        rng = make_rng(31)
        h = 1e-6
        for _ in range(100):
            params, x, y = draw_case(spec, label_kind, pscale, rng)
            v = rng.standard_normal(spec.param_dim)
            u = rng.standard_normal(spec.input_dim)
            mv = mixed_vjp(spec, params, x, y, v)
            gp = param_grad(spec, params, x + h * u, y)
            gm = param_grad(spec, params, x - h * u, y)
            oracle = float(((gp - gm) / (2 * h)) @ v)
            assert abs(float(mv @ u) - oracle) <= 1e-5 * max(abs(oracle), 1.0)

    @pytest.mark.parametrize("spec,label_kind,pscale", FAMILY_CASES,
                             ids=lambda v: getattr(v, "family", None) or str(v))
    def test_bilinear_loss_stencil(self, spec, label_kind, pscale):
        rng = make_rng(17)
        h = 1e-4
        for _ in range(25):
            params, x, y = draw_case(spec, label_kind, pscale, rng)
            v = rng.standard_normal(spec.param_dim)
            u = rng.standard_normal(spec.input_dim)
            mv = float(mixed_vjp(spec, params, x, y, v) @ u)
            f = lambda dx, dw: loss(spec, params + dw * v, x + dx * u, y)
            bil = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
            assert abs(bil - mv) <= 1e-5 * max(abs(mv), 1.0)


class TestSoftmaxBound:
    def test_sampled_lower_bound(self):
        rng = make_rng(55)
        for c in (2, 3, 10):
            bound = -lambert_w0((c - 1) / np.e)
            h = 5.0 * rng.standard_normal((10_000, c))
            y = rng.integers(0, c, size=10_000)
            z = h - h.max(axis=1, keepdims=True)
            p = np.exp(z) / np.exp(z).sum(axis=1, keepdims=True)
            q = p.copy()
            q[np.arange(10_000), y] -= 1.0
            vals = (h * q).sum(axis=1)
            assert vals.min() >= bound - 1e-9

    def test_constructive_optimum(self):
        # equal non-true logits t, true logit 0: value is t(1 - p_true)
        for c in (2, 3, 10):
            bound = -lambert_w0((c - 1) / np.e)
            ts = np.linspace(-5.0, 1.0, 200001)
            vals = ts * (c - 1) * np.exp(ts) / (1.0 + (c - 1) * np.exp(ts))
            assert abs(vals.min() - bound) <= 1e-3


class TestPredict:
    def test_or_separator_perfect(self, logistic3):
        ds = pl.gen_or(seed=0)
        w = np.array([1.0, 1.0, -0.5])
        assert accuracy(logistic3, w, ds) == 1.0

    def test_zero_params_tie_to_class_zero(self, logistic3):
        ds = pl.gen_or(seed=0)
        pred = predict_batch(logistic3, np.zeros(3), ds.x)
        assert np.all(pred == 0)

    def test_negated_separator_quarter_accuracy(self, logistic3):
        ds = pl.gen_or(seed=0, reps=1, noise_sigma=0.0)
        w = np.array([1.0, 1.0, 0.0])
        assert accuracy(logistic3, w, ds) == 1.0
        assert accuracy(logistic3, -w, ds) == 0.25

    @given(st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=40, deadline=None)
    def test_scaling_invariance(self, s):
        rng = make_rng(8)
        ds = pl.gen_gauss_classification(seed=8, n=50, d=3)
        logi = ModelSpec("logistic_binary", 4)
        w = rng.standard_normal(4)
        assert np.array_equal(predict_batch(logi, w, ds.x),
                              predict_batch(logi, s * w, ds.x))
        soft = ModelSpec("softmax_linear", 4, classes=3)
        big = rng.standard_normal(soft.param_dim)
        assert np.array_equal(predict_batch(soft, big, ds.x),
                              predict_batch(soft, s * big, ds.x))

    def test_accuracy_errors_on_regression(self):
        ds = pl.gen_gauss_regression(seed=0, n=10, d=2, w_true=np.ones(2))
        with pytest.raises(DomainError):
            accuracy(ModelSpec("least_squares", 3), np.zeros(3), ds)
        with pytest.raises(DomainError):
            predict(ModelSpec("least_squares", 3), np.zeros(3), ds.x[0])
