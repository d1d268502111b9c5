"""Poison-set construction against a fixed target parameter.

The workhorse is gradient canceling: hold the target fixed, and move the
poison features so that the ratio-weighted poison gradient cancels the
clean mean gradient,

    minimize over poison points  (1/2) || g(mu) + eps_d * g(nu) ||^2,

by projected gradient descent with momentum. The per-point update is the
mixed second-order product of the loss, scaled by 1/n (n = clean count),
with the residual g(mu) + eps_d g(nu) recomputed once per epoch (or once
per mini-batch when batching). Gradient matching optimizes a cosine
dissimilarity against a reversed-loss gradient instead, and the
Frank-Wolfe variant optimizes the poison distribution itself as a
weighted atom set over a discretized domain.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import AttackDivergence, DomainError
from .mathcore import make_rng
from .models import (LEAST_SQUARES, LOGISTIC, SOFTMAX, ModelSpec,
                     _onehot, _sigmoid, _softmax_rows, check_params,
                     grads_batch, losses_batch, mean_param_grad,
                     mixed_vjp_batch, unpack_mlp, unpack_softmax)
from .optim import project_simplex_rows, round_half_up, schedule_lr

CLIP_BOX = "box"
CLIP_CLEAN_RANGE = "clean_range"
CLIP_NONE = "none"

_NONMONOTONE_WINDOW = 20


@dataclass(frozen=True)
class AttackOptions:
    epochs: int = 1000
    lr: float = 0.5
    momentum: float = 0.9
    schedule: str = "cosine"
    batch_size: int | None = None  # None means full batch
    clip_mode: str = CLIP_NONE
    optimize_labels: bool = False
    replace_mode: bool = False
    seed: int = 0
    # Nonmonotone backtracking safeguard: an epoch whose merit exceeds the
    # worst of the last 20 accepted merits is undone and the step scale
    # halved; accepted epochs regrow it 1.2x. The canceling objective is
    # quartic in the poison features, so no fixed step survives both the
    # long-transit and the high-curvature phase; the window (rather than
    # strict descent) lets momentum follow curved valleys. The returned
    # poison set is the best iterate seen, so the safeguard never hurts.
    adaptive: bool = True
    # Quasi-Newton finishing pass (bound-constrained when clipping) from
    # the best iterate. The per-epoch trace stays pure momentum descent;
    # only the returned poison set benefits. Plain descent zigzags in the
    # curved valleys of the canceling objective and can report a target
    # as blocked when it is merely hard; the polish removes that false
    # plateau while leaving genuinely infeasible targets at their floor.
    polish: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise DomainError("epochs must be >= 1")
        if self.lr <= 0:
            raise DomainError("lr must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise DomainError("momentum must lie in [0, 1)")
        if self.clip_mode not in (CLIP_BOX, CLIP_CLEAN_RANGE, CLIP_NONE):
            raise DomainError(f"unknown clip_mode {self.clip_mode!r}")


@dataclass(frozen=True)
class AttackResult:
    poison: Dataset
    merit_trace: np.ndarray
    final_merit: float
    final_grad_norm: float
    eps_d: float
    kept_clean: Dataset | None = None  # replace mode: the retained clean subset

    @property
    def grad_norm_trace(self) -> np.ndarray:
        return np.sqrt(2.0 * self.merit_trace) / (1.0 + self.eps_d)


def project_admissible(points: np.ndarray, box: np.ndarray, clip_mode: str,
                       clean_range: np.ndarray | None = None) -> np.ndarray:
    """Clamp points to the admissible set chosen by clip_mode."""
    points = np.asarray(points, dtype=np.float64)
    if clip_mode == CLIP_NONE:
        return points
    if clip_mode == CLIP_BOX:
        lo, hi = box[:, 0], box[:, 1]
    elif clip_mode == CLIP_CLEAN_RANGE:
        if clean_range is None:
            raise DomainError("clean_range clipping needs the observed range")
        lo, hi = clean_range[:, 0], clean_range[:, 1]
    else:
        raise DomainError(f"unknown clip_mode {clip_mode!r}")
    return np.clip(points, lo, hi)


def _poison_count(n_clean: int, eps_d: float) -> int:
    if eps_d <= 0:
        raise DomainError("eps_d must be positive")
    count = round_half_up(n_clean * eps_d)
    if count < 1:
        raise DomainError(f"eps_d={eps_d} yields zero poison points for n={n_clean}")
    return count


def _init_poison(mu: Dataset, count: int, rng) -> tuple[np.ndarray, np.ndarray]:
    idx = rng.choice(mu.n, size=count, replace=count > mu.n)
    return mu.x[idx].copy(), mu.y[idx].copy()


# --- soft-label gradient helpers (only used when optimize_labels is on) ----

def _soft_state(spec: ModelSpec, y: np.ndarray) -> np.ndarray:
    if spec.family == LEAST_SQUARES:
        return np.asarray(y, dtype=np.float64).copy()
    if spec.family == LOGISTIC:
        return np.asarray(y, dtype=np.float64).copy()
    return _onehot(np.asarray(y, np.int64), spec.classes)


def _soft_mean_grad(spec, params, x, soft):
    n = x.shape[0]
    if spec.family == LEAST_SQUARES:
        return (x.T @ (x @ params - soft)) / n
    if spec.family == LOGISTIC:
        coef = _sigmoid(x @ params) - soft
        return (x.T @ coef) / n
    if spec.family == SOFTMAX:
        q = _softmax_rows(x @ unpack_softmax(spec, params)) - soft
        return ((x.T @ q) / n).ravel()
    u, w = unpack_mlp(spec, params)
    a = x @ u.T
    d = np.where(a > 0, 1.0, spec.leaky_slope)
    phi = np.where(a > 0, a, spec.leaky_slope * a)
    q = _softmax_rows(phi @ w) - soft
    r = (q @ w.T) * d
    return np.concatenate([((r.T @ x) / n).ravel(), ((phi.T @ q) / n).ravel()])


def _soft_mixed_batch(spec, params, x, soft, v):
    """mixed_vjp_batch against soft labels instead of hard class indices."""
    if spec.family == LEAST_SQUARES:
        r = x @ params - soft
        return np.outer(x @ v, params) + r[:, None] * v[None, :]
    if spec.family == LOGISTIC:
        p = _sigmoid(x @ params)
        return (p * (1.0 - p) * (x @ v))[:, None] * params[None, :] \
            + (p - soft)[:, None] * v[None, :]
    if spec.family == SOFTMAX:
        w = unpack_softmax(spec, params)
        vm = v.reshape(spec.input_dim, spec.classes)
        p = _softmax_rows(x @ w)
        q = p - soft
        ps = p * (x @ vm)
        jp = ps - p * ps.sum(axis=1, keepdims=True)
        return q @ vm.T + jp @ w.T
    u, w = unpack_mlp(spec, params)
    cut = spec.hidden * spec.input_dim
    vu = v[:cut].reshape(spec.hidden, spec.input_dim)
    vw = v[cut:].reshape(spec.hidden, spec.classes)
    a = x @ u.T
    d = np.where(a > 0, 1.0, spec.leaky_slope)
    phi = np.where(a > 0, a, spec.leaky_slope * a)
    p = _softmax_rows(phi @ w)
    q = p - soft

    def jp(s):
        ps = p * s
        return ps - p * ps.sum(axis=1, keepdims=True)

    t1 = ((q @ vw.T) * d) @ u
    t2 = ((jp(phi @ vw) @ w.T) * d) @ u
    t3 = ((q @ w.T) * d) @ vu
    t4 = ((jp(((x @ vu.T) * d) @ w) @ w.T) * d) @ u
    return t1 + t2 + t3 + t4


def _soft_label_grad(spec, params, x, v):
    """d<param_grad, v>/d(label) per sample (labels enter param grads linearly)."""
    if spec.family in (LEAST_SQUARES, LOGISTIC):
        return -(x @ v)
    if spec.family == SOFTMAX:
        return -(x @ v.reshape(spec.input_dim, spec.classes))
    u, w = unpack_mlp(spec, params)
    cut = spec.hidden * spec.input_dim
    vu = v[:cut].reshape(spec.hidden, spec.input_dim)
    vw = v[cut:].reshape(spec.hidden, spec.classes)
    a = x @ u.T
    d = np.where(a > 0, 1.0, spec.leaky_slope)
    phi = np.where(a > 0, a, spec.leaky_slope * a)
    # q appears as phi (x) q and ((W q) . d) (x) x; both are linear in q
    return -(phi @ vw) - ((x @ vu.T) * d) @ w


def _harden_labels(spec: ModelSpec, soft: np.ndarray) -> np.ndarray:
    if spec.family == LEAST_SQUARES:
        return soft
    if spec.family == LOGISTIC:
        return (soft > 0.5).astype(np.int64)
    return np.argmax(soft, axis=1).astype(np.int64)


def _project_soft(spec: ModelSpec, soft: np.ndarray) -> np.ndarray:
    if spec.family == LEAST_SQUARES:
        return soft
    if spec.family == LOGISTIC:
        return np.clip(soft, 0.0, 1.0)
    return project_simplex_rows(soft)


def _polish(spec, target, xs, ys, soft, g_mu, eps_d, box, clip_mode,
            clean_range, n=None):
    """Bound-constrained quasi-Newton pass on the canceling objective.

    Optimizes the poison features (plus the labels for the square loss,
    where they are free reals); soft classification labels stay fixed at
    their current values. Returns the improved state only if the merit
    actually dropped.
    """
    from scipy.optimize import minimize

    count, d = xs.shape
    free_labels = soft is not None and spec.family == LEAST_SQUARES
    x0 = np.concatenate([xs.ravel(), soft.ravel()]) if free_labels else xs.ravel()

    if clip_mode == CLIP_NONE:
        bounds = None
    else:
        rng_box = box if clip_mode == CLIP_BOX else clean_range
        per_point = list(zip(rng_box[:, 0], rng_box[:, 1]))
        bounds = per_point * count
        if free_labels:
            bounds = bounds + [(None, None)] * count

    def objective(flat):
        pts = flat[:count * d].reshape(count, d)
        lab = flat[count * d:] if free_labels else (soft if soft is not None else ys)
        if soft is not None:
            g_nu = _soft_mean_grad(spec, target, pts,
                                   lab if free_labels else soft)
            residual = g_mu + eps_d * g_nu
            gx = _soft_mixed_batch(spec, target, pts,
                                   lab if free_labels else soft, residual) / n
        else:
            g_nu = grads_batch(spec, target, pts, lab).mean(axis=0)
            residual = g_mu + eps_d * g_nu
            gx = mixed_vjp_batch(spec, target, pts, lab, residual) / n
        merit = 0.5 * float(residual @ residual)
        grad = gx.ravel()
        if free_labels:
            gl = _soft_label_grad(spec, target, pts, residual) / n
            grad = np.concatenate([grad, np.asarray(gl).ravel()])
        return merit, grad

    start, _ = objective(x0)
    res = minimize(objective, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": 1000, "ftol": 1e-20, "gtol": 1e-16})
    if not np.isfinite(res.fun) or res.fun >= start:
        return xs, soft
    pts = res.x[:count * d].reshape(count, d)
    new_soft = soft
    if free_labels:
        new_soft = res.x[count * d:].copy()
    return pts, new_soft


def gradient_canceling(clean: Dataset, spec: ModelSpec, target, eps_d: float,
                       opts: AttackOptions | None = None) -> AttackResult:
    """Construct a poison set whose ratio-weighted gradient cancels g(mu).

    Poison features are initialized as a seeded subsample of the clean
    data and updated by momentum SGD on the canceling objective, with
    per-step projection given by opts.clip_mode. Labels stay fixed unless
    opts.optimize_labels, in which case soft labels are optimized on the
    simplex and hardened at the end. replace_mode swaps the clean set for
    a seeded subset of size floor(n / (1 + eps_d)) first, which models an
    attacker who replaces rather than adds points.
    """
    opts = opts or AttackOptions()
    target = check_params(spec, target)
    rng = make_rng(opts.seed, stream=7)

    kept = None
    mu = clean
    if opts.replace_mode:
        keep_n = int(np.floor(clean.n / (1.0 + eps_d)))
        if keep_n < 1:
            raise DomainError("replace_mode keeps zero clean points")
        keep_idx = np.sort(rng.choice(clean.n, size=keep_n, replace=False))
        mu = clean.subset(keep_idx)
        kept = mu

    n = mu.n
    count = _poison_count(n, eps_d)
    xs, ys = _init_poison(mu, count, rng)
    g_mu = mean_param_grad(spec, target, mu)
    clean_range = np.stack([mu.x.min(axis=0), mu.x.max(axis=0)], axis=1)

    soft = _soft_state(spec, ys) if opts.optimize_labels else None
    vel_x = np.zeros_like(xs)
    vel_y = np.zeros_like(soft) if soft is not None else None
    merit_trace = np.empty(opts.epochs)

    def poison_mean_grad():
        if soft is not None:
            return _soft_mean_grad(spec, target, xs, soft)
        return grads_batch(spec, target, xs, ys).mean(axis=0)

    batch = opts.batch_size if opts.batch_size and opts.batch_size < count else None
    scale = 1.0
    window: deque = deque(maxlen=_NONMONOTONE_WINDOW)
    prev_xs = prev_soft = None
    best_merit = np.inf
    best_xs, best_soft, best_ys = xs.copy(), None, ys.copy()

    for epoch in range(opts.epochs):
        lr_t = schedule_lr(opts.lr, opts.schedule, epoch, opts.epochs)
        g_nu = poison_mean_grad()
        residual = g_mu + eps_d * g_nu
        merit = 0.5 * float(residual @ residual)
        if not np.isfinite(merit):
            if not opts.adaptive or not window:
                raise AttackDivergence(
                    f"non-finite merit at epoch {epoch}; reduce lr={opts.lr}")
            merit = np.inf
        if opts.adaptive and window and merit > max(window) * (1.0 + 1e-12):
            # undo the offending epoch, halve the step scale, restart the
            # momentum from rest
            xs = prev_xs.copy()
            if soft is not None:
                soft = prev_soft.copy()
            vel_x[:] = 0.0
            if vel_y is not None:
                vel_y[:] = 0.0
            scale = max(scale * 0.5, 1e-15)
            g_nu = poison_mean_grad()
            residual = g_mu + eps_d * g_nu
            merit = 0.5 * float(residual @ residual)
        elif opts.adaptive and window:
            scale = min(scale * 1.2, 1e6)
        merit_trace[epoch] = merit
        window.append(merit)
        if merit < best_merit:
            best_merit = merit
            best_xs = xs.copy()
            best_soft = soft.copy() if soft is not None else None
            best_ys = ys.copy()
        if opts.adaptive:
            prev_xs = xs.copy()
            prev_soft = soft.copy() if soft is not None else None
        lr_t *= scale

        if batch is None:
            chunks = [slice(0, count)]
        else:
            order = rng.permutation(count)
            chunks = [order[i:i + batch] for i in range(0, count, batch)]

        for ci, chunk in enumerate(chunks):
            if ci > 0:
                # stale residual is refreshed once per mini-batch
                residual = g_mu + eps_d * poison_mean_grad()
            if soft is not None:
                gx = _soft_mixed_batch(spec, target, xs[chunk], soft[chunk],
                                       residual) / n
            else:
                gx = mixed_vjp_batch(spec, target, xs[chunk], ys[chunk],
                                     residual) / n
            vel_x[chunk] = opts.momentum * vel_x[chunk] + gx
            xs[chunk] = xs[chunk] - lr_t * vel_x[chunk]
            xs[chunk] = project_admissible(xs[chunk], mu.domain_box,
                                           opts.clip_mode, clean_range)
            if soft is not None:
                gy = _soft_label_grad(spec, target, xs[chunk], residual) / n
                vel_y[chunk] = opts.momentum * vel_y[chunk] + gy
                soft[chunk] = _project_soft(spec, soft[chunk] - lr_t * vel_y[chunk])

    # evaluate the closing state too, then return the best iterate seen
    g_nu = poison_mean_grad()
    residual = g_mu + eps_d * g_nu
    closing = 0.5 * float(residual @ residual)
    if np.isfinite(closing) and closing < best_merit:
        best_merit = closing
        best_xs, best_ys = xs.copy(), ys.copy()
        best_soft = soft.copy() if soft is not None else None
    xs, ys, soft = best_xs, best_ys, best_soft

    if opts.polish:
        xs, soft = _polish(spec, target, xs, ys, soft, g_mu, eps_d,
                           mu.domain_box, opts.clip_mode, clean_range, n=n)

    if soft is not None:
        ys = _harden_labels(spec, soft)
    residual = g_mu + eps_d * (grads_batch(spec, target, xs, ys).mean(axis=0))
    final_merit = 0.5 * float(residual @ residual)
    poison = Dataset(xs, ys, mu.task, mu.classes, mu.domain_box)
    return AttackResult(poison=poison, merit_trace=merit_trace,
                        final_merit=final_merit,
                        final_grad_norm=float(np.sqrt(2.0 * final_merit))
                        / (1.0 + eps_d),
                        eps_d=eps_d, kept_clean=kept)


# ---------------------------------------------------------------------------
# gradient matching

_REVERSED_LOSS_FLOOR = 1e-12


def reversed_mean_grad(spec: ModelSpec, params, ds: Dataset) -> np.ndarray:
    """Mean gradient of the reversed loss -log(1 - exp(-l)) over a dataset.

    For cross-entropy-type losses the reversed gradient is the ordinary
    per-sample gradient reweighted by -1/(exp(l) - 1), with l floored to
    avoid the singularity at a perfectly fit point. The square loss has
    no bounded reversal, so its analog flips the residual sign.
    """
    params = check_params(spec, params)
    if spec.family == LEAST_SQUARES:
        return -mean_param_grad(spec, params, ds)
    losses = losses_batch(spec, params, ds.x, ds.y)
    losses = np.maximum(losses, _REVERSED_LOSS_FLOOR)
    weights = -1.0 / np.expm1(losses)
    grads = grads_batch(spec, params, ds.x, ds.y)
    return (weights[:, None] * grads).mean(axis=0)


def gradient_matching(clean: Dataset, spec: ModelSpec, target, eps_d: float,
                      opts: AttackOptions | None = None) -> AttackResult:
    """Align poison gradients with the clean reversed-loss gradient.

    Minimizes the cosine dissimilarity 1 - <g_rev(mu), g(nu)> / (|..||..|)
    over the poison features with the same optimizer and projection stack
    as gradient canceling. merit_trace records the dissimilarity;
    final_grad_norm still reports the mixture gradient norm at the target
    so runs are comparable with gradient canceling.
    """
    opts = opts or AttackOptions()
    if opts.optimize_labels or opts.replace_mode:
        raise DomainError("gradient matching supports fixed labels, add-only")
    target = check_params(spec, target)
    rng = make_rng(opts.seed, stream=8)

    count = _poison_count(clean.n, eps_d)
    xs, ys = _init_poison(clean, count, rng)
    g_rev = reversed_mean_grad(spec, target, clean)
    nrm_rev = float(np.linalg.norm(g_rev))
    if nrm_rev == 0.0:
        raise DomainError("reversed-loss gradient vanished on the clean data")
    g_mu = mean_param_grad(spec, target, clean)
    clean_range = np.stack([clean.x.min(axis=0), clean.x.max(axis=0)], axis=1)

    vel = np.zeros_like(xs)
    trace = np.empty(opts.epochs)
    for epoch in range(opts.epochs):
        lr_t = schedule_lr(opts.lr, opts.schedule, epoch, opts.epochs)
        g_nu = grads_batch(spec, target, xs, ys).mean(axis=0)
        nrm_nu = float(np.linalg.norm(g_nu))
        if nrm_nu < 1e-300:
            trace[epoch] = 1.0
            continue
        cos = float(g_rev @ g_nu) / (nrm_rev * nrm_nu)
        dissim = 1.0 - cos
        if not np.isfinite(dissim):
            raise AttackDivergence(f"non-finite dissimilarity at epoch {epoch}")
        trace[epoch] = dissim
        # d(dissim)/d(g_nu), then the chain rule through each poison point
        v = -g_rev / (nrm_rev * nrm_nu) + cos * g_nu / (nrm_nu * nrm_nu)
        gx = mixed_vjp_batch(spec, target, xs, ys, v) / count
        vel = opts.momentum * vel + gx
        xs = xs - lr_t * vel
        xs = project_admissible(xs, clean.domain_box, opts.clip_mode, clean_range)

    g_nu = grads_batch(spec, target, xs, ys).mean(axis=0)
    nrm_nu = float(np.linalg.norm(g_nu))
    final = 1.0 - float(g_rev @ g_nu) / (nrm_rev * nrm_nu) if nrm_nu > 0 else 1.0
    mix = g_mu + eps_d * g_nu
    poison = Dataset(xs, ys, clean.task, clean.classes, clean.domain_box)
    return AttackResult(poison=poison, merit_trace=trace, final_merit=final,
                        final_grad_norm=float(np.linalg.norm(mix)) / (1.0 + eps_d),
                        eps_d=eps_d)


# ---------------------------------------------------------------------------
# Frank-Wolfe over the poison distribution

@dataclass(frozen=True)
class GridDomain:
    """Cartesian feature grid with an enumerated label set (d <= 3)."""
    axes: tuple
    labels: tuple

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.axes) > 3:
            raise DomainError("grid domains support at most 3 feature dims")
        mesh = np.meshgrid(*[np.asarray(a, dtype=np.float64) for a in self.axes],
                           indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        xs = np.repeat(pts, len(self.labels), axis=0)
        ys = np.tile(np.asarray(self.labels), pts.shape[0])
        return xs, ys


@dataclass(frozen=True)
class LineDomain:
    """Atoms restricted to the line spanned by g(mu), labels enumerated.

    Sufficiency of the scalar threshold comes from transporting any
    feasible poison distribution onto this line, so searching it loses
    nothing for scalar-output linear models.
    """
    alpha_grid: tuple
    labels: tuple

    def atoms_along(self, direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        alphas = np.asarray(self.alpha_grid, dtype=np.float64)
        pts = alphas[:, None] * direction[None, :]
        xs = np.repeat(pts, len(self.labels), axis=0)
        ys = np.tile(np.asarray(self.labels), alphas.shape[0])
        return xs, ys


@dataclass(frozen=True)
class FrankWolfeResult:
    atom_x: np.ndarray          # (A, d) atom features
    atom_y: np.ndarray          # (A,) atom labels
    weights: np.ndarray         # (A,) simplex weights of the final measure
    objective_trace: np.ndarray  # length T+1, canceling objective per iterate
    support_trace: np.ndarray   # support size after each iterate

    def support(self) -> list[tuple[np.ndarray, float, float]]:
        live = np.nonzero(self.weights > 0)[0]
        return [(self.atom_x[i], float(self.atom_y[i]), float(self.weights[i]))
                for i in live]


def frank_wolfe_attack(clean: Dataset, spec: ModelSpec, target, eps_d: float,
                       domain, t_iters: int,
                       step_rule: str = "open_loop") -> FrankWolfeResult:
    """Conditional-gradient optimization of the poison measure.

    Each iteration scans the finite atom set for the gradient most
    opposed to the current residual and mixes it in with weight
    eta_t = 2/(t+2) (or the exact quadratic line-search step when
    step_rule is "line_search"). Starting from a single atom, the measure
    is supported on at most t+1 atoms after t iterations.
    """
    if t_iters < 1:
        raise DomainError("t_iters must be >= 1")
    if step_rule not in ("open_loop", "line_search"):
        raise DomainError(f"unknown step rule {step_rule!r}")
    target = check_params(spec, target)
    g_mu = mean_param_grad(spec, target, clean)

    if isinstance(domain, LineDomain):
        base = np.linalg.norm(g_mu)
        if base == 0.0:
            raise DomainError("line domain undefined: clean gradient vanishes")
        xs, ys = domain.atoms_along(g_mu / base)
    elif isinstance(domain, GridDomain):
        xs, ys = domain.atoms()
    else:
        raise DomainError("domain must be a GridDomain or LineDomain")
    if xs.shape[0] == 0:
        raise DomainError("empty atom domain")
    if xs.shape[1] != spec.input_dim:
        raise DomainError("atom dimension does not match the model")

    atom_grads = grads_batch(spec, target, xs, ys)
    weights = np.zeros(xs.shape[0])
    weights[0] = 1.0
    g_nu = atom_grads[0].copy()

    obj_trace = np.empty(t_iters + 1)
    sup_trace = np.empty(t_iters + 1, dtype=np.int64)
    residual = g_mu + eps_d * g_nu
    obj_trace[0] = 0.5 * float(residual @ residual)
    sup_trace[0] = 1

    for t in range(t_iters):
        residual = g_mu + eps_d * g_nu
        scores = atom_grads @ residual
        best = int(np.argmin(scores))
        if step_rule == "open_loop":
            eta = 2.0 / (t + 2.0)
        else:
            direction = eps_d * (atom_grads[best] - g_nu)
            denom = float(direction @ direction)
            eta = 1.0 if denom == 0.0 else \
                float(np.clip(-(residual @ direction) / denom, 0.0, 1.0))
        weights *= (1.0 - eta)
        weights[best] += eta
        g_nu = (1.0 - eta) * g_nu + eta * atom_grads[best]
        residual = g_mu + eps_d * g_nu
        obj_trace[t + 1] = 0.5 * float(residual @ residual)
        sup_trace[t + 1] = int(np.count_nonzero(weights))

    return FrankWolfeResult(atom_x=xs, atom_y=ys, weights=weights,
                            objective_trace=obj_trace, support_trace=sup_trace)
