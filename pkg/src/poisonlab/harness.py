"""Training, retraining on mixed data, evaluation reports, and sweep engines."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .attack import AttackOptions, FrankWolfeResult, gradient_canceling
from .data import CLASSIFICATION, Dataset, concat
from .errors import AttackDivergence, DomainError, PoisonLabError
from .mathcore import derive_seed, make_rng, top_singular_vector
from .models import ModelSpec, accuracy, mean_param_grad
from .optim import schedule_lr
from .reachability import tau_threshold

_SGD_SWITCH_N = 10_000
_DEFAULT_SGD_BATCH = 1000


@dataclass(frozen=True)
class TrainOptions:
    epochs: int = 1000
    lr: float = 0.5
    momentum: float = 0.9
    schedule: str = "cosine"
    batch_size: int | None = None  # None: full batch up to 10k samples, then 1000
    grad_tol: float = 1e-8
    init_scale: float = 0.01
    bit_reproducible: bool = True
    # divide lr by the estimated loss smoothness when it exceeds 1, so
    # retraining stays stable on mixtures containing far-out poison
    auto_scale_lr: bool = True


@dataclass(frozen=True)
class EvalReport:
    clean_acc: float
    poisoned_acc: float
    acc_drop: float
    grad_norm_at_target: float
    param_distance: float
    eps_d: float
    tau: float
    seed: int


def _smoothness_bound(spec: ModelSpec, ds: Dataset) -> float:
    """Cheap upper-ish bound on the loss curvature, for step-size scaling."""
    _, sigma = top_singular_vector(ds.x / np.sqrt(ds.n))
    l_x = sigma * sigma
    if spec.family == "logistic_binary":
        return 0.25 * l_x
    if spec.family in ("softmax_linear", "mlp1"):
        return 0.5 * l_x
    return l_x


def train(spec: ModelSpec, ds: Dataset, opts: TrainOptions | None = None,
          seed: int = 0) -> np.ndarray:
    """Momentum gradient descent from a seeded init.

    Full batch for small datasets, mini-batches of 1000 above 10k
    samples; stops at the epoch budget or when the full-data gradient
    norm falls below grad_tol. Deterministic given (opts, seed).
    """
    opts = opts or TrainOptions()
    rng = make_rng(seed, stream=5)
    params = spec.init_params(rng, opts.init_scale)
    batch = opts.batch_size
    if batch is None and ds.n > _SGD_SWITCH_N:
        batch = _DEFAULT_SGD_BATCH
    if batch is not None and batch >= ds.n:
        batch = None
    lr = opts.lr
    if opts.auto_scale_lr:
        lr = lr / max(1.0, _smoothness_bound(spec, ds))

    vel = np.zeros_like(params)
    for epoch in range(opts.epochs):
        lr_t = schedule_lr(lr, opts.schedule, epoch, opts.epochs)
        g = mean_param_grad(spec, params, ds)
        gn = float(np.linalg.norm(g))
        if not np.isfinite(gn):
            raise AttackDivergence(f"training diverged at epoch {epoch}")
        if gn < opts.grad_tol:
            break
        if batch is None:
            vel = opts.momentum * vel + g
            params = params - lr_t * vel
        else:
            order = rng.permutation(ds.n)
            for i in range(0, ds.n, batch):
                part = ds.subset(order[i:i + batch])
                gb = mean_param_grad(spec, params, part)
                vel = opts.momentum * vel + gb
                params = params - lr_t * vel
    return params


def retrain_and_eval(clean: Dataset, poison: Dataset | None, test: Dataset,
                     spec: ModelSpec, target, seed: int,
                     train_opts: TrainOptions | None = None,
                     clean_params: np.ndarray | None = None,
                     eps_d: float = float("nan"),
                     tau: float = float("nan")) -> EvalReport:
    """Retrain from scratch on clean + poison and report the damage.

    Accuracies are percentages; the gradient norm is evaluated at the
    *target* parameters over the mixed data (concatenation reproduces
    the (1-lambda, lambda) mixture weights automatically).
    """
    opts = train_opts or TrainOptions()
    if poison is not None and poison.n > 0:
        mixed = concat(clean, poison)
    else:
        mixed = clean
    retrained = train(spec, mixed, opts, seed)
    if clean_params is None:
        clean_params = train(spec, clean, opts, seed)

    if test.task == CLASSIFICATION and spec.is_classification:
        clean_acc = 100.0 * accuracy(spec, clean_params, test)
        poisoned_acc = 100.0 * accuracy(spec, retrained, test)
    else:
        clean_acc = float("nan")
        poisoned_acc = float("nan")

    g_target = mean_param_grad(spec, np.asarray(target, dtype=np.float64), mixed)
    return EvalReport(
        clean_acc=clean_acc,
        poisoned_acc=poisoned_acc,
        acc_drop=clean_acc - poisoned_acc,
        grad_norm_at_target=float(np.linalg.norm(g_target)),
        param_distance=float(np.linalg.norm(retrained - np.asarray(target))),
        eps_d=eps_d, tau=tau, seed=seed)


def atoms_to_poison(result: FrankWolfeResult, count: int,
                    template: Dataset) -> Dataset:
    """Uniform poison set from a weighted atom measure.

    Replicates each surviving atom in proportion to its weight at the
    requested resolution (largest-remainder apportionment), so the
    empirical set can feed the same retraining path as the direct attack.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    live = np.nonzero(result.weights > 0)[0]
    w = result.weights[live]
    raw = w / w.sum() * count
    reps = np.floor(raw).astype(np.int64)
    short = count - int(reps.sum())
    if short > 0:
        order = np.argsort(-(raw - reps), kind="stable")
        reps[order[:short]] += 1
    keep = reps > 0
    xs = np.repeat(result.atom_x[live][keep], reps[keep], axis=0)
    ys = np.repeat(result.atom_y[live][keep], reps[keep])
    return Dataset(xs, ys, template.task, template.classes,
                   template.domain_box)


SWEEP_COLUMNS = ("target_id", "w1", "w2", "tau", "eps_d", "acc_drop",
                 "grad_norm", "final_merit", "error")


def sweep_cell(clean: Dataset, test: Dataset, spec: ModelSpec, target,
               target_id: int, eps_d: float, gc_opts: AttackOptions,
               seed: int, train_opts: TrainOptions | None,
               clean_params: np.ndarray | None) -> dict:
    """One (target, eps_d) cell: threshold, attack, retrain, report row."""
    target = np.asarray(target, dtype=np.float64).ravel()
    row = {"target_id": target_id,
           "w1": float(target[0]),
           "w2": float(target[1]) if target.size > 1 else float("nan"),
           "tau": float("nan"), "eps_d": eps_d, "acc_drop": float("nan"),
           "grad_norm": float("nan"), "final_merit": float("nan"), "error": ""}
    try:
        rep = tau_threshold(spec, target, clean)
        row["tau"] = rep.tau
        gc = gradient_canceling(clean, spec, target, eps_d,
                                replace(gc_opts, seed=seed))
        ev = retrain_and_eval(clean, gc.poison, test, spec, target, seed,
                              train_opts, clean_params=clean_params,
                              eps_d=eps_d, tau=rep.tau)
        row["acc_drop"] = ev.acc_drop
        row["grad_norm"] = ev.grad_norm_at_target
        row["final_merit"] = gc.final_merit
    except PoisonLabError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_heatmap(clean: Dataset, test: Dataset, spec: ModelSpec,
                  target_grid, eps_list, gc_opts: AttackOptions | None = None,
                  base_seed: int = 0,
                  train_opts: TrainOptions | None = None) -> list[dict]:
    """Run every (target, eps_d) cell and emit rows in target-major order.

    Per-cell seeds derive from (base_seed, target index, eps index), so
    the table is identical no matter how cells are scheduled. Per-cell
    attack failures land in the row's error column instead of aborting.
    """
    target_grid = [np.asarray(t, dtype=np.float64).ravel() for t in target_grid]
    eps_list = [float(e) for e in eps_list]
    if not target_grid or not eps_list:
        raise DomainError("sweep needs a nonempty target grid and eps list")
    gc_opts = gc_opts or AttackOptions()
    opts = train_opts or TrainOptions()
    clean_params = train(spec, clean, opts, base_seed)
    rows = []
    for ti, target in enumerate(target_grid):
        for ei, eps in enumerate(eps_list):
            seed = derive_seed(base_seed, ti, ei)
            rows.append(sweep_cell(clean, test, spec, target, ti, eps,
                                   gc_opts, seed, opts, clean_params))
    return rows
