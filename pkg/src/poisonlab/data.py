"""Datasets: synthetic generators, an IDX binary reader, and split utilities.

Conventions: classification labels are class indices 0..c-1, regression
labels are reals. Synthetic generators append a constant-1 bias feature
and record the observed per-feature range as the admissible box; image
data lives in [0, 1] per pixel and gets no bias feature (models absorb it
or go without).
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (DomainError, IdxDimensionError, IdxMagicError,
                     IdxTruncatedError, ShapeError)
from .mathcore import make_rng

CLASSIFICATION = "classification"
REGRESSION = "regression"

_IDX_MAGIC_LABELS = 0x00000801
_IDX_MAGIC_IMAGES = 0x00000803
_IDX_MAX_DIM = 10_000_000


@dataclass(frozen=True)
class Dataset:
    """Weighted-uniform empirical distribution over (x, y) pairs.

    x: (n, d) float64 features, y: (n,) labels (int for classification,
    float for regression), domain_box: (d, 2) admissible [lo, hi] per
    feature. Arrays are frozen after validation and safe to share.
    """

    x: np.ndarray
    y: np.ndarray
    task: str = CLASSIFICATION
    classes: int = 2
    domain_box: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=np.float64))
        if x.ndim != 2 or x.shape[0] < 1:
            raise ShapeError(f"features must be a nonempty (n, d) matrix, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite feature encountered")
        if self.task == CLASSIFICATION:
            y = np.asarray(self.y, dtype=np.int64)
            if self.classes < 2:
                raise DomainError("classification needs at least 2 classes")
            if y.min() < 0 or y.max() >= self.classes:
                raise DomainError("class label out of range")
        elif self.task == REGRESSION:
            y = np.asarray(self.y, dtype=np.float64)
            if not np.all(np.isfinite(y)):
                raise DomainError("non-finite label encountered")
        else:
            raise DomainError(f"unknown task {self.task!r}")
        if y.shape != (x.shape[0],):
            raise ShapeError("labels must be one per row of x")

        box = self.domain_box
        if box is None:
            box = np.stack([x.min(axis=0), x.max(axis=0)], axis=1)
        box = np.asarray(box, dtype=np.float64)
        if box.shape != (x.shape[1], 2):
            raise ShapeError(f"domain_box must be (d, 2), got {box.shape}")
        if np.any(box[:, 0] > box[:, 1]):
            raise DomainError("domain_box lower bound exceeds upper bound")

        for arr in (x, y, box):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "domain_box", box)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.x[idx], self.y[idx], self.task, self.classes,
                       self.domain_box)


def concat(a: Dataset, b: Dataset) -> Dataset:
    """Concatenate two datasets of the same task; box is the union box."""
    if a.task != b.task or a.dim != b.dim:
        raise ShapeError("datasets are not compatible for concatenation")
    box = np.stack([np.minimum(a.domain_box[:, 0], b.domain_box[:, 0]),
                    np.maximum(a.domain_box[:, 1], b.domain_box[:, 1])], axis=1)
    classes = max(a.classes, b.classes) if a.task == CLASSIFICATION else a.classes
    return Dataset(np.vstack([a.x, b.x]), np.concatenate([a.y, b.y]),
                   a.task, classes, box)


def _append_bias(x: np.ndarray) -> np.ndarray:
    return np.hstack([x, np.ones((x.shape[0], 1))])


OR_POINTS = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
OR_LABELS = np.array([0, 1, 1, 1])


def gen_or(seed: int, reps: int = 50, noise_sigma: float = 0.05) -> Dataset:
    """2-D OR truth table, each point repeated `reps` times with isotropic
    Gaussian jitter of std `noise_sigma`; labels exact; bias appended."""
    if reps < 1:
        raise DomainError("reps must be >= 1")
    if noise_sigma < 0:
        raise DomainError("noise_sigma must be >= 0")
    rng = make_rng(seed, stream=1)
    base = np.repeat(OR_POINTS, reps, axis=0)
    y = np.repeat(OR_LABELS, reps)
    x = base + noise_sigma * rng.standard_normal(base.shape)
    return Dataset(_append_bias(x), y, CLASSIFICATION, 2)


def gen_gauss_classification(seed: int, n: int = 1000, d: int = 10,
                             sep: float = 2.0) -> Dataset:
    """Two balanced unit-covariance Gaussians with means +-(sep/2)*u for a
    seeded random unit direction u; bias appended."""
    if n < 2 or d < 1:
        raise DomainError("need n >= 2 and d >= 1")
    if sep < 0:
        raise DomainError("sep must be >= 0")
    rng = make_rng(seed, stream=2)
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    n0 = n // 2
    n1 = n - n0
    x0 = rng.standard_normal((n0, d)) - 0.5 * sep * u
    x1 = rng.standard_normal((n1, d)) + 0.5 * sep * u
    x = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    perm = rng.permutation(n)
    return Dataset(_append_bias(x[perm]), y[perm], CLASSIFICATION, 2)


def gen_gauss_regression(seed: int, n: int, d: int, w_true,
                         noise: float = 0.0) -> Dataset:
    """x ~ standard Gaussian, y = w_true^T x + noise * xi; bias appended
    (the generating line has zero intercept)."""
    w_true = np.asarray(w_true, dtype=np.float64)
    if w_true.shape != (d,):
        raise ShapeError("w_true must have length d")
    if n < d:
        raise DomainError("need n >= d")
    rng = make_rng(seed, stream=3)
    x = rng.standard_normal((n, d))
    y = x @ w_true + noise * rng.standard_normal(n)
    return Dataset(_append_bias(x), y, REGRESSION, 0)


def toy_three_points() -> Dataset:
    """The 3-point line dataset with a padded bias: (1,1)+, (-1,1)+, (0,1)-.

    Smallest binary logistic problem with an attained minimizer; its
    stationary point is (0, ln 2).
    """
    x = np.array([[1.0, 1.0], [-1.0, 1.0], [0.0, 1.0]])
    y = np.array([1, 1, 0])
    box = np.array([[-np.inf, np.inf], [-np.inf, np.inf]])
    return Dataset(x, y, CLASSIFICATION, 2, box)


def load_idx(path: str) -> np.ndarray:
    """Parse one IDX file: labels (magic 0x801, 1 dim) give a (n,) uint8
    vector, images (magic 0x803, 3 dims) an (n, rows, cols) uint8 tensor.

    Big-endian throughout; element type byte 0x08 (unsigned byte) only.
    """
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 4:
        raise IdxTruncatedError(f"{path}: header shorter than 4 bytes")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic == _IDX_MAGIC_LABELS:
        ndim = 1
    elif magic == _IDX_MAGIC_IMAGES:
        ndim = 3
    else:
        raise IdxMagicError(f"{path}: magic 0x{magic:08x} is neither labels nor images")
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise IdxTruncatedError(f"{path}: truncated dimension header")
    dims = struct.unpack(f">{ndim}I", raw[4:header_len])
    if any(s == 0 or s > _IDX_MAX_DIM for s in dims):
        raise IdxDimensionError(f"{path}: implausible dimensions {dims}")
    count = int(np.prod([int(s) for s in dims], dtype=np.int64))
    if len(raw) - header_len < count:
        raise IdxTruncatedError(
            f"{path}: payload has {len(raw) - header_len} bytes, expected {count}")
    data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=header_len)
    return data.reshape(dims)


_MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def load_mnist(dir_path: str, keep_classes=None) -> tuple[Dataset, Dataset]:
    """Load an MNIST-format directory into (train, test) datasets.

    Pixels are scaled to [0, 1] and flattened; domain_box is [0, 1] per
    pixel; no bias feature is appended. `keep_classes` filters to the
    given original classes and relabels them 0..c-1 in sorted original
    order (e.g. {1, 7} becomes {0, 1}).
    """
    out = []
    for split_name in ("train", "test"):
        img_name, lab_name = _MNIST_FILES[split_name]
        images = load_idx(os.path.join(dir_path, img_name))
        labels = load_idx(os.path.join(dir_path, lab_name))
        if images.shape[0] != labels.shape[0]:
            raise IdxDimensionError("image/label counts disagree")
        x = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
        y = labels.astype(np.int64)
        if keep_classes is not None:
            kept = sorted(keep_classes)
            mask = np.isin(y, kept)
            x, y = x[mask], y[mask]
            remap = {orig: i for i, orig in enumerate(kept)}
            y = np.array([remap[v] for v in y], dtype=np.int64)
            n_classes = len(kept)
        else:
            n_classes = 10
        box = np.tile([0.0, 1.0], (x.shape[1], 1))
        out.append(Dataset(x, y, CLASSIFICATION, n_classes, box))
    return out[0], out[1]


def split(ds: Dataset, train_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint shuffled partition with sizes ceil(n*frac) and the rest."""
    if not 0.0 < train_frac < 1.0:
        raise DomainError("train_frac must lie strictly between 0 and 1")
    rng = make_rng(seed, stream=4)
    perm = rng.permutation(ds.n)
    k = int(np.ceil(ds.n * train_frac))
    return ds.subset(perm[:k]), ds.subset(perm[k:])
