"""Model families: losses, parameter gradients, and mixed second-order products.

Four families share one flat-parameter interface:

  least_squares     l = (1/2)(y - w.x)^2                     params: w (d,)
  logistic_binary   l = log(1 + exp(-s * w.x)), s = 2y-1     params: w (d,)
  softmax_linear    l = cross-entropy of h = W^T x           params: W (d, c)
  mlp1              l = cross-entropy of h = W^T phi(x)      params: (U, W)
                    phi(x) = leaky_relu(U x), U (m, d), W (m, c)

`mixed_vjp` returns the feature-space gradient of <param_grad(x, y), v>,
computed from closed forms (the leaky-ReLU kink contributes zero almost
everywhere). All losses use log-sum-exp formulations, and batch reductions
run in a fixed order so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CLASSIFICATION, Dataset
from .errors import DomainError, ShapeError

LEAST_SQUARES = "least_squares"
LOGISTIC = "logistic_binary"
SOFTMAX = "softmax_linear"
MLP1 = "mlp1"

FAMILIES = (LEAST_SQUARES, LOGISTIC, SOFTMAX, MLP1)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    input_dim: int
    classes: int = 2
    hidden: int = 0
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown model family {self.family!r}")
        if self.input_dim < 1:
            raise DomainError("input_dim must be >= 1")
        if self.family in (SOFTMAX, MLP1) and self.classes < 2:
            raise DomainError("need at least 2 classes")
        if self.family == MLP1:
            if self.hidden < 1:
                raise DomainError("mlp1 needs hidden >= 1")
            if not 0.0 < self.leaky_slope < 1.0:
                raise DomainError("leaky_slope must lie in (0, 1)")

    @property
    def is_classification(self) -> bool:
        return self.family != LEAST_SQUARES

    @property
    def param_dim(self) -> int:
        if self.family in (LEAST_SQUARES, LOGISTIC):
            return self.input_dim
        if self.family == SOFTMAX:
            return self.input_dim * self.classes
        return self.hidden * self.input_dim + self.hidden * self.classes

    def init_params(self, rng: np.random.Generator, scale: float = 0.01) -> np.ndarray:
        return scale * rng.standard_normal(self.param_dim)


def check_params(spec: ModelSpec, params: np.ndarray) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64).ravel()
    if params.shape != (spec.param_dim,):
        raise ShapeError(
            f"params has length {params.size}, {spec.family} needs {spec.param_dim}")
    if not np.all(np.isfinite(params)):
        raise DomainError("non-finite parameter entry")
    return params


def unpack_softmax(spec: ModelSpec, params: np.ndarray) -> np.ndarray:
    return params.reshape(spec.input_dim, spec.classes)


def unpack_mlp(spec: ModelSpec, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cut = spec.hidden * spec.input_dim
    u = params[:cut].reshape(spec.hidden, spec.input_dim)
    w = params[cut:].reshape(spec.hidden, spec.classes)
    return u, w


def output_block(spec: ModelSpec, params: np.ndarray) -> np.ndarray:
    """The last-layer weight matrix (d-or-m, c) of a classification family."""
    if spec.family == SOFTMAX:
        return unpack_softmax(spec, params)
    if spec.family == MLP1:
        return unpack_mlp(spec, params)[1]
    raise DomainError(f"{spec.family} has no multiclass output block")


def _softplus(t):
    # log(1 + exp(t)) without overflow
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def _sigmoid(t):
    out = np.empty_like(t, dtype=np.float64)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _softmax_rows(h: np.ndarray) -> np.ndarray:
    z = h - h.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _onehot(y: np.ndarray, c: int) -> np.ndarray:
    out = np.zeros((y.shape[0], c))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def _jp_apply(p: np.ndarray, s: np.ndarray) -> np.ndarray:
    # rows: (diag(p) - p p^T) s, the softmax Jacobian acting on s
    ps = p * s
    return ps - p * ps.sum(axis=1, keepdims=True)


def _as_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[None, :] if x.ndim == 1 else x


def _check_features(spec: ModelSpec, x: np.ndarray):
    if x.shape[1] != spec.input_dim:
        raise ShapeError(f"features have dim {x.shape[1]}, expected {spec.input_dim}")


# ---------------------------------------------------------------------------
# losses

def losses_batch(spec: ModelSpec, params: np.ndarray, x, y) -> np.ndarray:
    params = check_params(spec, params)
    x = _as_batch(x)
    _check_features(spec, x)
    if spec.family == LEAST_SQUARES:
        y = np.asarray(y, dtype=np.float64).ravel()
        r = x @ params - y
        return 0.5 * r * r
    yi = np.asarray(y, dtype=np.int64).ravel()
    if spec.family == LOGISTIC:
        s = 2.0 * yi - 1.0
        return _softplus(-s * (x @ params))
    if spec.family == SOFTMAX:
        h = x @ unpack_softmax(spec, params)
    else:
        u, w = unpack_mlp(spec, params)
        a = x @ u.T
        phi = np.where(a > 0, a, spec.leaky_slope * a)
        h = phi @ w
    z = h - h.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1)) + h.max(axis=1)
    return lse - h[np.arange(h.shape[0]), yi]


def loss(spec: ModelSpec, params, x, y) -> float:
    return float(losses_batch(spec, params, x, [y])[0])


# ---------------------------------------------------------------------------
# parameter gradients

def grads_batch(spec: ModelSpec, params: np.ndarray, x, y) -> np.ndarray:
    """Per-sample parameter gradients, one flat row per sample."""
    params = check_params(spec, params)
    x = _as_batch(x)
    _check_features(spec, x)
    n = x.shape[0]
    if spec.family == LEAST_SQUARES:
        y = np.asarray(y, dtype=np.float64).ravel()
        r = x @ params - y
        return r[:, None] * x
    yi = np.asarray(y, dtype=np.int64).ravel()
    if spec.family == LOGISTIC:
        s = 2.0 * yi - 1.0
        m = s * (x @ params)
        coef = -_sigmoid(-m) * s
        return coef[:, None] * x
    if spec.family == SOFTMAX:
        w = unpack_softmax(spec, params)
        q = _softmax_rows(x @ w) - _onehot(yi, spec.classes)
        # per sample: x outer q, flattened row-major to match params layout
        return np.einsum("ni,nk->nik", x, q).reshape(n, -1)
    u, w = unpack_mlp(spec, params)
    a = x @ u.T
    d = np.where(a > 0, 1.0, spec.leaky_slope)
    phi = np.where(a > 0, a, spec.leaky_slope * a)
    q = _softmax_rows(phi @ w) - _onehot(yi, spec.classes)
    r = (q @ w.T) * d                      # dl/da, shape (n, m)
    grad_u = np.einsum("nm,ni->nmi", r, x).reshape(n, -1)
    grad_w = np.einsum("nm,nk->nmk", phi, q).reshape(n, -1)
    return np.hstack([grad_u, grad_w])


def param_grad(spec: ModelSpec, params, x, y) -> np.ndarray:
    return grads_batch(spec, params, x, [y])[0]


def mean_param_grad(spec: ModelSpec, params, ds: Dataset) -> np.ndarray:
    """Average parameter gradient over a dataset, fixed reduction order."""
    params = check_params(spec, params)
    x, y = ds.x, ds.y
    n = x.shape[0]
    # closed-form means avoid materializing n x p gradient stacks
    if spec.family == LEAST_SQUARES:
        r = x @ params - np.asarray(y, dtype=np.float64)
        return (x.T @ r) / n
    if spec.family == LOGISTIC:
        s = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
        m = s * (x @ params)
        coef = -_sigmoid(-m) * s
        return (x.T @ coef) / n
    if spec.family == SOFTMAX:
        w = unpack_softmax(spec, params)
        q = _softmax_rows(x @ w) - _onehot(np.asarray(y, np.int64), spec.classes)
        return ((x.T @ q) / n).ravel()
    u, w = unpack_mlp(spec, params)
    a = x @ u.T
    d = np.where(a > 0, 1.0, spec.leaky_slope)
    phi = np.where(a > 0, a, spec.leaky_slope * a)
    q = _softmax_rows(phi @ w) - _onehot(np.asarray(y, np.int64), spec.classes)
    r = (q @ w.T) * d
    mean_u = (r.T @ x) / n
    mean_w = (phi.T @ q) / n
    return np.concatenate([mean_u.ravel(), mean_w.ravel()])


# ---------------------------------------------------------------------------
# mixed second-order product

def mixed_vjp_batch(spec: ModelSpec, params: np.ndarray, x, y,
                    v: np.ndarray) -> np.ndarray:
    """Rows of grad_x <param_grad(x_i, y_i), v>, shape (n, d).

    Labels are treated as constants. Exact closed forms per family; for
    mlp1 the piecewise-constant activation derivative has zero second
    derivative almost everywhere, which matches directional differentiation
    of the analytic parameter gradient.
    """
    params = check_params(spec, params)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.shape != (spec.param_dim,):
        raise ShapeError("direction v must live in parameter space")
    if not np.all(np.isfinite(v)):
        raise DomainError("non-finite direction entry")
    x = _as_batch(x)
    _check_features(spec, x)

    if spec.family == LEAST_SQUARES:
        y = np.asarray(y, dtype=np.float64).ravel()
        r = x @ params - y
        return np.outer(x @ v, params) + r[:, None] * v[None, :]

    if spec.family == LOGISTIC:
        yi = np.asarray(y, dtype=np.int64).ravel()
        s = 2.0 * yi - 1.0
        m = s * (x @ params)
        sig = _sigmoid(-m)
        # d/dx [-sigma(-m) s x . v] with m = s w.x
        return (sig * (1.0 - sig) * (x @ v))[:, None] * params[None, :] \
            - (sig * s)[:, None] * v[None, :]

    if spec.family == SOFTMAX:
        w = unpack_softmax(spec, params)
        vm = v.reshape(spec.input_dim, spec.classes)
        p = _softmax_rows(x @ w)
        q = p - _onehot(np.asarray(y, np.int64).ravel(), spec.classes)
        s = x @ vm
        return q @ vm.T + _jp_apply(p, s) @ w.T

    u, w = unpack_mlp(spec, params)
    cut = spec.hidden * spec.input_dim
    vu = v[:cut].reshape(spec.hidden, spec.input_dim)
    vw = v[cut:].reshape(spec.hidden, spec.classes)
    a = x @ u.T
    d = np.where(a > 0, 1.0, spec.leaky_slope)
    phi = np.where(a > 0, a, spec.leaky_slope * a)
    p = _softmax_rows(phi @ w)
    q = p - _onehot(np.asarray(y, np.int64).ravel(), spec.classes)
    # <grad_W l, Vw> = phi^T Vw q ; <grad_U l, Vu> = (D (W q))^T Vu x
    t1 = ((q @ vw.T) * d) @ u
    t2 = ((_jp_apply(p, phi @ vw) @ w.T) * d) @ u
    t3 = ((q @ w.T) * d) @ vu
    t4 = ((_jp_apply(p, ((x @ vu.T) * d) @ w) @ w.T) * d) @ u
    return t1 + t2 + t3 + t4


def mixed_vjp(spec: ModelSpec, params, x, y, v) -> np.ndarray:
    return mixed_vjp_batch(spec, params, x, [y], v)[0]


# ---------------------------------------------------------------------------
# prediction

def predict_batch(spec: ModelSpec, params: np.ndarray, x) -> np.ndarray:
    params = check_params(spec, params)
    if not spec.is_classification:
        raise DomainError("predict is defined for classification families only")
    x = _as_batch(x)
    _check_features(spec, x)
    if spec.family == LOGISTIC:
        # sign rule with ties to class 0
        return (x @ params > 0).astype(np.int64)
    if spec.family == SOFTMAX:
        h = x @ unpack_softmax(spec, params)
    else:
        u, w = unpack_mlp(spec, params)
        a = x @ u.T
        h = np.where(a > 0, a, spec.leaky_slope * a) @ w
    return np.argmax(h, axis=1).astype(np.int64)


def predict(spec: ModelSpec, params, x) -> int:
    return int(predict_batch(spec, params, x)[0])


def accuracy(spec: ModelSpec, params, ds: Dataset) -> float:
    if ds.task != CLASSIFICATION:
        raise DomainError("accuracy is defined on classification datasets only")
    pred = predict_batch(spec, params, ds.x)
    return float(np.mean(pred == ds.y))
