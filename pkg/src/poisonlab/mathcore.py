"""Scalar special functions, dense linear-algebra helpers, and seeded randomness.

Everything here is pure and deterministic: the Lambert W solver is plain
floating-point iteration, the power iteration starts from a fixed internal
seed, and random streams are Philox counter-based generators keyed by
(seed, stream). Philox is the project-wide generator and must not change,
since test expectations are frozen against its output.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DomainError

_INV_E = float(np.exp(-1.0))
# x may undershoot -1/e by this much before we call it a domain error
_BRANCH_SLACK = 1e-15
# inside this distance of the branch point the series alone is full precision
_SERIES_WINDOW = 1e-6

_POWER_ITER_SEED = 0x5EED_50F7
_POWER_ITERS = 200
_POWER_TOL = 1e-12


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox generator for the given (seed, stream) pair.

    Equal pairs give bit-identical sequences on every platform; distinct
    streams with the same seed are statistically independent.
    """
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(stream & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(*parts) -> int:
    """Stable 63-bit seed derived from arbitrary (int or str) parts.

    Used to give sweep cells and defense rounds independent, reproducible
    streams without coordinating counters.
    """
    tag = ":".join(str(p) for p in parts).encode()
    digest = hashlib.blake2b(tag, digest_size=8).digest()
    return int.from_bytes(digest, "big") & 0x7FFFFFFFFFFFFFFF


def _branch_series(p: float) -> float:
    # series in p = sqrt(2(e*x + 1)) about the branch point
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0
                       + p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))))


def lambert_w0(x: float) -> float:
    """Principal branch of Lambert's W: the w >= -1 solving w*exp(w) = x.

    Halley iteration from a log-based (or branch-series) initial guess;
    within 1e-6 of the branch point x = -1/e the series in
    sqrt(2(e*x + 1)) is used directly, which avoids the w = -1 pole in
    the Halley denominator.

    Raises DomainError for x < -1/e (beyond a 1e-15 slack).
    """
    x = float(x)
    if not np.isfinite(x):
        raise DomainError(f"lambert_w0 requires finite x, got {x!r}")
    if x < -_INV_E - _BRANCH_SLACK:
        raise DomainError(f"lambert_w0 undefined for x={x!r} < -1/e")
    x = max(x, -_INV_E)
    if x == 0.0:
        return 0.0

    p2 = 2.0 * (np.e * x + 1.0)
    if p2 <= 0.0:
        return -1.0
    p = np.sqrt(p2)
    if x < -_INV_E + _SERIES_WINDOW:
        return _branch_series(p)

    if x < 0.0:
        w = _branch_series(p)
    elif x < np.e:
        w = np.log1p(x)
    else:
        lx = np.log(x)
        w = lx - np.log(lx)

    for _ in range(100):
        ew = np.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        # Halley step; wp1 cannot vanish here because the series window
        # already handled the neighborhood of w = -1
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-16 * (2.0 + abs(w)):
            break
    return float(w)


def top_singular_vector(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Top right-singular vector and singular value of a dense matrix.

    Power iteration on m.T @ m from a fixed internal seed; at most 200
    iterations or until the relative change drops below 1e-12, so the
    result is deterministic. The sign is canonicalized so the largest-
    magnitude component of v is positive. The all-zero matrix returns
    sigma = 0 with v = e_1.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DomainError(f"expected a nonempty 2-D matrix, got shape {m.shape}")
    d = m.shape[1]
    if not np.any(m):
        v = np.zeros(d)
        v[0] = 1.0
        return v, 0.0

    a = m.T @ m
    rng = make_rng(_POWER_ITER_SEED, stream=d)
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    for _ in range(_POWER_ITERS):
        av = a @ v
        norm = np.linalg.norm(av)
        if norm == 0.0:
            # v landed in the null space; restart deterministically
            v = rng.standard_normal(d)
            v /= np.linalg.norm(v)
            continue
        v_new = av / norm
        if 1.0 - abs(float(v_new @ v)) < _POWER_TOL:
            v = v_new
            break
        v = v_new

    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        v = -v
    sigma = float(np.linalg.norm(m @ v))
    return v, sigma
