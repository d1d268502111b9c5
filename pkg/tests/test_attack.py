import numpy as np
import pytest

import poisonlab as pl
from poisonlab.attack import (AttackOptions, GridDomain, LineDomain,
                              frank_wolfe_attack, gradient_canceling,
                              gradient_matching, project_admissible,
                              reversed_mean_grad)
from poisonlab.errors import AttackDivergence, DomainError
from poisonlab.mathcore import make_rng
from poisonlab.models import ModelSpec, grads_batch, losses_batch, \
    mean_param_grad
from poisonlab.optim import round_half_up

W_STAR = np.array([0.0, np.log(2.0)])


def regression_problem(seed=0, n=200):
    clean = pl.gen_gauss_regression(seed, n=n, d=2,
                                    w_true=np.array([1.0, -1.0]), noise=0.1)
    spec = ModelSpec("least_squares", 3)
    fit = pl.train(spec, clean, pl.TrainOptions(epochs=400), seed=seed)
    target = pl.random_corrupt(fit, eps_w=1.0, seed=seed).params
    return clean, spec, target


class TestPoisonCount:
    def test_round_half_up(self):
        assert round_half_up(1.5) == 2
        assert round_half_up(1.49) == 1
        assert round_half_up(0.5) == 1

    def test_count_examples(self, toy, logistic2):
        res = gradient_canceling(toy, logistic2, 2 * W_STAR, 0.52,
                                 AttackOptions(epochs=2))
        assert res.poison.n == 2  # round(3 * 0.52) = round(1.56)

    def test_zero_count_errors(self, toy, logistic2):
        with pytest.raises(DomainError):
            gradient_canceling(toy, logistic2, 2 * W_STAR, 0.01,
                               AttackOptions(epochs=2))


class TestProjectAdmissible:
    def test_box_clamp(self):
        box = np.array([[0.0, 1.0]])
        out = project_admissible(np.array([[1.3], [0.5], [-0.2]]), box, "box")
        assert np.allclose(out.ravel(), [1.0, 0.5, 0.0])

    def test_inside_unchanged(self):
        box = np.array([[0.0, 1.0], [0.0, 1.0]])
        pts = np.array([[0.2, 0.9]])
        assert np.array_equal(project_admissible(pts, box, "box"), pts)

    def test_clean_range(self, or_data):
        rng = np.stack([or_data.x.min(axis=0), or_data.x.max(axis=0)], axis=1)
        far = np.array([[50.0, -50.0, 50.0]])
        out = project_admissible(far, or_data.domain_box, "clean_range", rng)
        assert np.allclose(out[0], [rng[0, 1], rng[1, 0], rng[2, 1]])

    def test_none_identity(self):
        pts = np.array([[123.0, -456.0]])
        box = np.array([[0.0, 1.0], [0.0, 1.0]])
        assert np.array_equal(project_admissible(pts, box, "none"), pts)


class TestGradientCanceling:
    def test_clean_target_starts_converged(self):
        clean = pl.gen_gauss_regression(3, n=100, d=2,
                                        w_true=np.array([1.0, 2.0]), noise=0.0)
        spec = ModelSpec("least_squares", 3)
        fit = pl.train(spec, clean, pl.TrainOptions(epochs=2000,
                                                    grad_tol=1e-12), seed=3)
        res = gradient_canceling(clean, spec, fit, 0.5, AttackOptions(epochs=3))
        assert res.merit_trace[0] <= 1e-14
        assert res.final_merit <= 1e-14

    def test_merit_identity_with_returned_poison(self, or_data, logistic3):
        target = np.array([-0.7, -0.7, 0.35])
        res = gradient_canceling(or_data, logistic3, target, 0.5,
                                 AttackOptions(epochs=50, lr=2.0, seed=1))
        g_mu = mean_param_grad(logistic3, target, or_data)
        g_nu = grads_batch(logistic3, target, res.poison.x,
                           res.poison.y).mean(axis=0)
        recomputed = 0.5 * float(np.sum((g_mu + 0.5 * g_nu) ** 2))
        assert abs(recomputed - res.final_merit) <= 1e-10
        assert res.final_grad_norm == pytest.approx(
            np.sqrt(2 * res.final_merit) / 1.5, abs=1e-12)

    def test_plain_gd_descent_monotone(self):
        clean, spec, target = regression_problem(seed=1, n=100)
        res = gradient_canceling(clean, spec, target, 0.5,
                                 AttackOptions(epochs=200, lr=1e-3, momentum=0.0,
                                               schedule="constant", seed=0,
                                               adaptive=False, polish=False))
        diffs = np.diff(res.merit_trace)
        assert np.all(diffs <= 1e-12)

    def test_single_step_matches_objective_fd(self, toy, logistic2):
        # the merit as a function of a single poison point has gradient
        # eps_d * mixed_vjp, so the implemented step lr/n * mixed_vjp must
        # equal lr/(n*eps_d) times the finite-difference merit gradient
        target = 2 * W_STAR
        eps_d = 0.4
        n = toy.n
        lr = 0.31
        opts = AttackOptions(epochs=1, lr=lr, momentum=0.0,
                             schedule="constant", seed=5, adaptive=False,
                             polish=False)
        rng = make_rng(5, stream=7)
        idx = rng.choice(n, size=1, replace=False)
        x0 = toy.x[idx][0].copy()
        y0 = toy.y[idx]
        res = gradient_canceling(toy, logistic2, target, eps_d, opts)
        g_mu = mean_param_grad(logistic2, target, toy)

        def merit(x):
            g_nu = grads_batch(logistic2, target, x[None, :], y0)[0]
            r = g_mu + eps_d * g_nu
            return 0.5 * float(r @ r)

        h = 1e-6
        fd = np.empty(2)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd[i] = (merit(x0 + e) - merit(x0 - e)) / (2 * h)
        expected = x0 - lr * fd / (n * eps_d)
        assert np.allclose(res.poison.x[0], expected, rtol=1e-5, atol=1e-10)

    def test_divergence_raises_without_safeguard(self):
        clean, spec, target = regression_problem(seed=0, n=100)
        with np.errstate(all="ignore"), pytest.raises(AttackDivergence):
            gradient_canceling(clean, spec, target, 1.0,
                               AttackOptions(epochs=300, lr=1e6, seed=0,
                                             adaptive=False, polish=False))

    def test_clipping_monotonicity(self, or_data, logistic3):
        target = np.array([-1.4, -1.4, 0.7])
        kwargs = dict(epochs=400, lr=5.0, seed=3)
        none = gradient_canceling(or_data, logistic3, target, 1.0,
                                  AttackOptions(clip_mode="none", **kwargs))
        clipped = gradient_canceling(or_data, logistic3, target, 1.0,
                                     AttackOptions(clip_mode="clean_range",
                                                   **kwargs))
        assert none.final_merit <= clipped.final_merit + 1e-12
        rng_lo = or_data.x.min(axis=0)
        rng_hi = or_data.x.max(axis=0)
        assert np.all(clipped.poison.x >= rng_lo - 1e-12)
        assert np.all(clipped.poison.x <= rng_hi + 1e-12)

    def test_trace_length_and_finiteness(self, or_data, logistic3):
        res = gradient_canceling(or_data, logistic3,
                                 np.array([-0.7, -0.7, 0.35]), 0.8,
                                 AttackOptions(epochs=123, lr=2.0))
        assert res.merit_trace.shape == (123,)
        assert np.all(np.isfinite(res.merit_trace))

    def test_replace_mode_sizes(self, or_data, logistic3):
        res = gradient_canceling(or_data, logistic3,
                                 np.array([-0.7, -0.7, 0.35]), 0.5,
                                 AttackOptions(epochs=20, lr=2.0,
                                               replace_mode=True, seed=4))
        kept = res.kept_clean
        assert kept is not None
        assert kept.n == int(np.floor(or_data.n / 1.5))
        assert res.poison.n == round_half_up(kept.n * 0.5)

    def test_replace_mode_at_least_as_strong(self, logistic3):
        # replacing part of the clean set is at least as damaging as adding
        margin = 0
        add_drops, rep_drops = [], []
        for seed in range(5):
            clean = pl.gen_or(seed=seed)
            test = pl.gen_or(seed=500 + seed)
            target = 0.1 * np.array([-1.4, -1.4, 0.7])
            eps = 0.2
            add = gradient_canceling(clean, logistic3, target, eps,
                                     AttackOptions(lr=5.0, seed=seed))
            ev_a = pl.retrain_and_eval(clean, add.poison, test, logistic3,
                                       target, seed=seed, eps_d=eps)
            rep = gradient_canceling(clean, logistic3, target, eps,
                                     AttackOptions(lr=5.0, seed=seed,
                                                   replace_mode=True))
            ev_r = pl.retrain_and_eval(rep.kept_clean, rep.poison, test,
                                       logistic3, target, seed=seed, eps_d=eps)
            add_drops.append(ev_a.acc_drop)
            rep_drops.append(ev_r.acc_drop)
        assert all(r >= a - 1.0 for a, r in zip(add_drops, rep_drops))

    def test_optimize_labels_regression(self):
        clean, spec, target = regression_problem(seed=2, n=200)
        res = gradient_canceling(clean, spec, target, 0.5,
                                 AttackOptions(lr=50.0, epochs=800,
                                               optimize_labels=True, seed=2))
        assert res.final_merit < 1e-10


class TestGradientMatching:
    def test_reversed_loss_gradient_oracle(self, or_data, logistic3):
        # d/dw of -log(1 - exp(-l)) via finite differences
        rng = make_rng(6)
        w = rng.standard_normal(3)
        got = reversed_mean_grad(logistic3, w, or_data)
        h = 1e-6
        fd = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h

            def rev_loss(params):
                ls = np.maximum(losses_batch(logistic3, params, or_data.x,
                                             or_data.y), 1e-12)
                return float(np.mean(-np.log(-np.expm1(-ls))))

            fd[i] = (rev_loss(w + e) - rev_loss(w - e)) / (2 * h)
        assert np.allclose(got, fd, rtol=1e-5, atol=1e-8)

    def test_identical_directions_zero_dissimilarity(self):
        v = np.array([0.3, -0.4, 0.5])
        cos = float(v @ (2 * v)) / (np.linalg.norm(v) * np.linalg.norm(2 * v))
        assert 1.0 - cos <= 1e-12

    def test_dissimilarity_decreases(self, or_data, logistic3):
        target = np.array([-0.7, -0.7, 0.35])
        res = gradient_matching(or_data, logistic3, target, 0.5,
                                AttackOptions(epochs=400, lr=2.0, seed=1))
        assert res.merit_trace[-1] < res.merit_trace[0]

    def test_least_squares_analog_misses_target(self):
        # scale-free matching lands on a different parameter for every
        # budget, unlike canceling which hits the target each time
        clean, spec, target = regression_problem(seed=3, n=200)
        for eps in (0.1, 0.5, 1.0):
            gm = gradient_matching(clean, spec, target, eps,
                                   AttackOptions(epochs=600, lr=20.0, seed=3))
            ev_gm = pl.retrain_and_eval(clean, gm.poison, clean, spec, target,
                                        seed=3, eps_d=eps)
            gc = gradient_canceling(clean, spec, target, eps,
                                    AttackOptions(epochs=1500, lr=50.0,
                                                  optimize_labels=True, seed=3))
            ev_gc = pl.retrain_and_eval(clean, gc.poison, clean, spec, target,
                                        seed=3, eps_d=eps)
            assert ev_gc.param_distance < 1e-3
            assert ev_gm.param_distance > 1e-2

    def test_or_head_to_head(self, logistic3):
        # reachable target (tau ~ 0.2 < eps 0.5): canceling hits it,
        # matching only aligns directions
        for seed in range(5):
            clean = pl.gen_or(seed=seed)
            target = 0.1 * np.array([-1.4, -1.4, 0.7])
            eps = 0.5
            gc = gradient_canceling(clean, logistic3, target, eps,
                                    AttackOptions(lr=5.0, seed=seed))
            gm = gradient_matching(clean, logistic3, target, eps,
                                   AttackOptions(lr=5.0, seed=seed))
            ev_gc = pl.retrain_and_eval(clean, gc.poison, clean, logistic3,
                                        target, seed=seed, eps_d=eps)
            ev_gm = pl.retrain_and_eval(clean, gm.poison, clean, logistic3,
                                        target, seed=seed, eps_d=eps)
            assert ev_gc.param_distance <= ev_gm.param_distance + 1e-9


def fw_problem():
    rng = make_rng(42)
    x = rng.standard_normal((200, 2))
    y = x @ np.array([1.0, -0.5]) + 0.05 * rng.standard_normal(200)
    clean = pl.Dataset(x, y, task="regression", classes=0)
    spec = ModelSpec("least_squares", 2)
    fit = pl.train(spec, clean, pl.TrainOptions(epochs=500), seed=0)
    target = fit + np.array([0.15, -0.1])
    domain = GridDomain(axes=(tuple(np.linspace(-3, 3, 21)),
                              tuple(np.linspace(-3, 3, 21))),
                        labels=tuple(np.linspace(-3, 3, 7)))
    return clean, spec, target, domain


class TestFrankWolfe:
    def test_support_bound(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 60)
        for t, size in enumerate(fw.support_trace):
            assert size <= t + 1

    def test_first_step_replaces_measure(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 1)
        live = fw.weights[fw.weights > 0]
        assert live.size == 1 and live[0] == pytest.approx(1.0)

    def test_line_search_monotone_and_converges(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 500,
                                step_rule="line_search")
        assert fw.objective_trace[-1] < 1e-6
        assert np.all(np.diff(fw.objective_trace[2:]) <= 1e-12)

    def test_open_loop_decreases_overall(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 500)
        assert fw.objective_trace[-1] < 1e-2 * fw.objective_trace[0]

    def test_weights_stay_on_simplex(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 40)
        assert fw.weights.min() >= 0.0
        assert fw.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_line_restricted_domain(self, toy, logistic2):
        domain = LineDomain(alpha_grid=tuple(np.linspace(-6, 6, 241)),
                            labels=(0, 1))
        fw = frank_wolfe_attack(toy, logistic2, 2 * W_STAR, 1.0, domain, 300,
                                step_rule="line_search")
        # eps_d = 1.0 > tau ~ 0.66, so the line construction can cancel
        assert fw.objective_trace[-1] < 1e-4

    def test_empty_domain_errors(self, toy, logistic2):
        with pytest.raises(DomainError):
            frank_wolfe_attack(toy, logistic2, 2 * W_STAR, 1.0,
                               GridDomain(axes=((),), labels=(0,)), 5)


class TestAtomReplication:
    def test_uniform_poison_from_weights(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 200,
                                step_rule="line_search")
        poison = pl.atoms_to_poison(fw, 100, clean)
        assert poison.n == 100
        # replicated frequencies track the atom weights at this resolution
        live = np.nonzero(fw.weights > 0)[0]
        for i in live:
            freq = np.mean(np.all(poison.x == fw.atom_x[i], axis=1)
                           & (poison.y == fw.atom_y[i]))
            assert abs(freq - fw.weights[i]) <= 1.0 / 100 + 1e-12

    def test_resolution_one(self):
        clean, spec, target, domain = fw_problem()
        fw = frank_wolfe_attack(clean, spec, target, 0.5, domain, 30)
        poison = pl.atoms_to_poison(fw, 1, clean)
        assert poison.n == 1
