"""Polynomial-kernel support vector regression with cross-validated scoring.

The epsilon-insensitive dual is solved by sequential minimal optimization
over the stacked (alpha, alpha*) variables: the most violating pair of the
stationarity conditions is updated analytically until the violation gap
falls under the tolerance. Features are standardized with statistics from
the training rows only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .evaluation import WordPair, spearman


class SvrError(Exception):
    pass


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # standardized rows
    coefficients: np.ndarray  # beta = alpha - alpha*, one per support vector
    bias: float
    degree: int
    c: float
    epsilon: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    kkt_gap: float  # final stationarity violation of the solver
    dual_objective: float

    @property
    def n_features(self) -> int:
        return len(self.feature_mean)


def _poly_kernel(a: np.ndarray, b: np.ndarray, degree: int) -> np.ndarray:
    return (a @ b.T + 1.0) ** degree


def _smo(
    kernel: np.ndarray, y: np.ndarray, c: float, epsilon: float, tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, float, float]:
    """Minimize the stacked dual; returns (beta, bias, final gap, objective)."""
    n = len(y)
    signs = np.concatenate([np.ones(n), -np.ones(n)])
    linear = np.concatenate([epsilon - y, epsilon + y])
    a = np.zeros(2 * n)
    grad = linear.copy()
    tiled = np.tile(kernel, (2, 2))  # K_ext[i, j] = K[i % n, j % n]

    gap = np.inf
    for _ in range(max_iter):
        candidates = -signs * grad
        up_mask = ((signs > 0) & (a < c)) | ((signs < 0) & (a > 0))
        low_mask = ((signs > 0) & (a > 0)) | ((signs < 0) & (a < c))
        if not up_mask.any() or not low_mask.any():
            break
        i = int(np.argmax(np.where(up_mask, candidates, -np.inf)))
        j = int(np.argmin(np.where(low_mask, candidates, np.inf)))
        gap = candidates[i] - candidates[j]
        if gap <= tol:
            break
        eta = tiled[i, i] + tiled[j, j] - 2.0 * signs[i] * signs[j] * tiled[i, j]
        step = gap / eta if eta > 1e-12 else np.inf
        cap_i = (c - a[i]) if signs[i] > 0 else a[i]
        cap_j = a[j] if signs[j] > 0 else (c - a[j])
        step = min(step, cap_i, cap_j)
        if step <= 0.0:
            break
        a[i] += signs[i] * step
        a[j] -= signs[j] * step
        grad += signs * step * (tiled[:, i] * signs[i] - tiled[:, j] * signs[j])

    candidates = -signs * grad
    up_mask = ((signs > 0) & (a < c)) | ((signs < 0) & (a > 0))
    low_mask = ((signs > 0) & (a > 0)) | ((signs < 0) & (a < c))
    if up_mask.any() and low_mask.any():
        m_up = float(np.max(np.where(up_mask, candidates, -np.inf)))
        m_low = float(np.min(np.where(low_mask, candidates, np.inf)))
        bias = 0.5 * (m_up + m_low)
        gap = max(m_up - m_low, 0.0)
    else:
        bias = float(np.mean(candidates))
        gap = 0.0
    beta = a[:n] - a[n:]
    objective = float(0.5 * beta @ kernel @ beta + linear @ a)
    return beta, bias, gap, objective


def train_svr(
    features: Sequence[Sequence[float]],
    targets: Sequence[float],
    degree: int = 4,
    c: float = 1.0,
    epsilon: float = 0.1,
    tol: float = 1e-3,
    max_iter: Optional[int] = None,
) -> SvrModel:
    """Fit the epsilon-insensitive regressor with kernel (u.v + 1)^degree."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or len(x) != len(y):
        raise SvrError("features must be a 2-D array aligned with targets")
    if len(x) < 2:
        raise SvrError("need at least two training rows")
    if degree < 1:
        raise SvrError("kernel degree must be at least 1")
    if not np.isfinite(x).all() or not np.isfinite(y).all():
        raise SvrError("features and targets must be finite")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    xs = (x - mean) / scale

    kernel = _poly_kernel(xs, xs, degree)
    if max_iter is None:
        max_iter = max(20_000, 2_000 * len(y))
    beta, bias, gap, objective = _smo(kernel, y, c, epsilon, tol, max_iter)

    keep = np.abs(beta) > 1e-12
    return SvrModel(
        support_vectors=xs[keep],
        coefficients=beta[keep],
        bias=bias,
        degree=degree,
        c=c,
        epsilon=epsilon,
        feature_mean=mean,
        feature_scale=scale,
        kkt_gap=gap,
        dual_objective=objective,
    )


def predict(model: SvrModel, features: Sequence[float]) -> float:
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise SvrError(
            f"feature length mismatch: got {x.shape}, model expects ({model.n_features},)"
        )
    z = (x - model.feature_mean) / model.feature_scale
    if not len(model.coefficients):
        return model.bias
    k = _poly_kernel(model.support_vectors, z.reshape(1, -1), model.degree).ravel()
    return float(model.coefficients @ k + model.bias)


def predict_many(model: SvrModel, features: Sequence[Sequence[float]]) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    z = (x - model.feature_mean) / model.feature_scale
    if not len(model.coefficients):
        return np.full(len(x), model.bias)
    k = _poly_kernel(z, model.support_vectors, model.degree)
    return k @ model.coefficients + model.bias


def cross_validate(
    pairs: Sequence[WordPair],
    feature_fn: Callable[[str, str], Sequence[float]],
    folds: int = 10,
    degree: int = 4,
    c: float = 1.0,
    epsilon: float = 0.1,
    seed: int = 42,
    tol: float = 1e-3,
) -> tuple[np.ndarray, float]:
    """K-fold predictions plus their rank correlation with the judgments.

    The fold assignment is a seeded shuffle into near-equal parts; every pair
    is predicted exactly once, by a model that never saw it in training.
    """
    n = len(pairs)
    if folds > n:
        raise SvrError(f"cannot split {n} pairs into {folds} folds")
    if folds < 2:
        raise SvrError("need at least two folds")
    features = np.asarray([feature_fn(p.w1, p.w2) for p in pairs], dtype=np.float64)
    golds = np.asarray([p.gold for p in pairs], dtype=np.float64)

    rng = np.random.default_rng(seed)
    permutation = rng.permutation(n)
    fold_slices = np.array_split(permutation, folds)

    predictions = np.empty(n, dtype=np.float64)
    for test_idx in fold_slices:
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_idx] = False
        model = train_svr(
            features[train_mask], golds[train_mask],
            degree=degree, c=c, epsilon=epsilon, tol=tol,
        )
        predictions[test_idx] = predict_many(model, features[test_idx])
    return predictions, spearman(predictions.tolist(), golds.tolist())


# ---------------------------------------------------------------------------
# Model persistence (versioned text format)
# ---------------------------------------------------------------------------

_MODEL_HEADER = "relmix-svr 1"


def save_model(model: SvrModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_MODEL_HEADER + "\n")
        fh.write(f"degree={model.degree}\nc={model.c!r}\nepsilon={model.epsilon!r}\n")
        fh.write(f"bias={model.bias!r}\nkkt_gap={model.kkt_gap!r}\n")
        fh.write(f"dual_objective={model.dual_objective!r}\n")
        fh.write("mean=" + " ".join(repr(v) for v in model.feature_mean) + "\n")
        fh.write("scale=" + " ".join(repr(v) for v in model.feature_scale) + "\n")
        fh.write(f"support={len(model.coefficients)}\n")
        for coef, row in zip(model.coefficients, model.support_vectors):
            fh.write(repr(float(coef)) + "\t" + " ".join(repr(v) for v in row) + "\n")


def load_model(path: str) -> SvrModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _MODEL_HEADER:
        raise SvrError(f"{path}: not a model file")
    fields = {}
    body = lines[1:]
    n_scalar = 9
    for line in body[:n_scalar]:
        key, _, value = line.partition("=")
        fields[key] = value
    n_support = int(fields["support"])
    coefficients = np.empty(n_support)
    rows = []
    for i, line in enumerate(body[n_scalar : n_scalar + n_support]):
        coef, _, vector = line.partition("\t")
        coefficients[i] = float(coef)
        rows.append([float(v) for v in vector.split()])
    mean = np.asarray([float(v) for v in fields["mean"].split()])
    return SvrModel(
        support_vectors=np.asarray(rows, dtype=np.float64).reshape(n_support, len(mean)),
        coefficients=coefficients,
        bias=float(fields["bias"]),
        degree=int(fields["degree"]),
        c=float(fields["c"]),
        epsilon=float(fields["epsilon"]),
        feature_mean=mean,
        feature_scale=np.asarray([float(v) for v in fields["scale"].split()]),
        kkt_gap=float(fields["kkt_gap"]),
        dual_objective=float(fields["dual_objective"]),
    )
