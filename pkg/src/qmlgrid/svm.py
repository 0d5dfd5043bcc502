"""Weighted soft-margin SVM on a precomputed kernel matrix.

Labels are -1/+1 (+1 is class 1 throughout the package). Class weighting
enters through per-sample box constraints C_i = C * class_weights[class_i].
The dual

    max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t. 0 <= a_i <= C_i,  sum(a_i y_i) = 0

is solved by sequential two-variable coordinate optimization: sweep the
samples, and for each KKT violator pick a partner by the largest error
gap, falling back to a scan when that step stalls. A full sweep without
an update means every sample satisfies its KKT condition within tol.

Reference: Platt, "Sequential Minimal Optimization" (1998). Simplified
variant, with per-sample boxes and a deterministic partner choice.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

KERNEL_KINDS = ("linear", "poly3", "rbf", "sigmoid")


def kernel_matrix(kind: str, A: np.ndarray, B: np.ndarray,
                  gamma: float | None = None, coef0: float = 0.0) -> np.ndarray:
    """Classical kernels k(a_i, b_j); gamma defaults to 1 / n_features."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise UsageError(f"bad kernel operands: {A.shape} / {B.shape}")
    if gamma is None:
        gamma = 1.0 / A.shape[1]
    if kind == "linear":
        return A @ B.T
    if kind == "poly3":
        return (gamma * (A @ B.T) + coef0) ** 3
    if kind == "rbf":
        sq = (np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)[None, :]
              - 2.0 * (A @ B.T))
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kind == "sigmoid":
        return np.tanh(gamma * (A @ B.T) + coef0)
    raise UsageError(f"unknown kernel kind {kind!r}")


@dataclass
class SvmProblem:
    gram: np.ndarray
    labels: np.ndarray          # -1 / +1
    C: float = 1.0
    class_weights: tuple = (1.0, 1.0)   # (class 0, class 1)

    def __post_init__(self):
        self.gram = np.asarray(self.gram, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        n = self.labels.size
        if self.gram.shape != (n, n):
            raise UsageError(
                f"gram shape {self.gram.shape} does not match {n} labels")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise UsageError("labels must be -1/+1")
        if not ((self.labels > 0).any() and (self.labels < 0).any()):
            raise UsageError("need both classes to train")
        if self.C <= 0:
            raise UsageError("C must be positive")

    def box(self) -> np.ndarray:
        w = np.where(self.labels > 0, self.class_weights[1], self.class_weights[0])
        return self.C * w


@dataclass
class SvmModel:
    alphas: np.ndarray
    bias: float
    labels: np.ndarray
    box: np.ndarray
    support: np.ndarray = field(default=None)
    converged: bool = True
    sweeps: int = 0

    def __post_init__(self):
        if self.support is None:
            self.support = np.flatnonzero(self.alphas > 1e-10)


def dual_objective(problem: SvmProblem, alphas: np.ndarray) -> float:
    y = problem.labels
    q = (y[:, None] * y[None, :]) * problem.gram
    return float(alphas.sum() - 0.5 * alphas @ q @ alphas)


def solve_dual(problem: SvmProblem, tol: float = 1e-4,
               max_passes: int = 1000) -> SvmModel:
    """Two-variable coordinate ascent on the dual. Returns the best
    iterate with converged=False if max_passes sweeps were not enough."""
    k = problem.gram
    y = problem.labels
    box = problem.box()
    n = y.size
    a = np.zeros(n)
    b = 0.0
    f = np.zeros(n)       # sum_j a_j y_j K_ij, bias excluded

    def try_pair(i, j, e_i):
        nonlocal b, f
        if i == j:
            return False
        e_j = f[j] + b - y[j]
        if y[i] != y[j]:
            gap = a[j] - a[i]
            lo, hi = max(0.0, gap), min(box[j], box[i] + gap)
        else:
            total = a[i] + a[j]
            lo, hi = max(0.0, total - box[i]), min(box[j], total)
        if hi - lo < 1e-12:
            return False
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta <= 1e-12:
            return False
        aj = np.clip(a[j] + y[j] * (e_i - e_j) / eta, lo, hi)
        if abs(aj - a[j]) < 1e-12:
            return False
        ai = a[i] + y[i] * y[j] * (a[j] - aj)
        d_i, d_j = ai - a[i], aj - a[j]
        b1 = b - e_i - y[i] * d_i * k[i, i] - y[j] * d_j * k[i, j]
        b2 = b - e_j - y[i] * d_i * k[i, j] - y[j] * d_j * k[j, j]
        if 1e-12 < ai < box[i] - 1e-12:
            b = b1
        elif 1e-12 < aj < box[j] - 1e-12:
            b = b2
        else:
            b = 0.5 * (b1 + b2)
        a[i], a[j] = ai, aj
        f += y[i] * d_i * k[:, i] + y[j] * d_j * k[:, j]
        return True

    converged = False
    sweeps = 0
    while sweeps < max_passes:
        sweeps += 1
        changed = 0
        for i in range(n):
            e_i = f[i] + b - y[i]
            r = y[i] * e_i
            if not ((r < -tol and a[i] < box[i]) or (r > tol and a[i] > 0)):
                continue
            errors = f + b - y
            j = int(np.argmax(np.abs(e_i - errors)))
            if try_pair(i, j, e_i):
                changed += 1
                continue
            for step in range(1, n):
                if try_pair(i, (i + step) % n, e_i):
                    changed += 1
                    break
        if changed == 0:
            converged = True
            break

    bias = _final_bias(k, y, a, box, fallback=b)
    return SvmModel(alphas=a, bias=bias, labels=y.copy(), box=box,
                    converged=converged, sweeps=sweeps)


def _final_bias(k, y, a, box, fallback=0.0, sv_tol=1e-8) -> float:
    # average over free support vectors; with none, midpoint of the
    # interval the KKT conditions leave feasible
    f = k @ (a * y)
    g = y - f
    free = (a > sv_tol) & (a < box - sv_tol)
    if free.any():
        return float(g[free].mean())
    lower = g[((y > 0) & (a <= sv_tol)) | ((y < 0) & (a >= box - sv_tol))]
    upper = g[((y > 0) & (a >= box - sv_tol)) | ((y < 0) & (a <= sv_tol))]
    if lower.size and upper.size:
        return 0.5 * (float(lower.max()) + float(upper.min()))
    return float(fallback)


def kkt_violation(problem: SvmProblem, model: SvmModel) -> float:
    """Largest violation of the optimality conditions; <= tol at a solution."""
    y = problem.labels
    box = problem.box()
    margins = y * (problem.gram @ (model.alphas * y) + model.bias)
    at_zero = model.alphas <= 1e-8
    at_box = model.alphas >= box - 1e-8
    free = ~at_zero & ~at_box
    worst = 0.0
    if at_zero.any():
        worst = max(worst, float(np.max(1.0 - margins[at_zero], initial=0.0)))
    if at_box.any():
        worst = max(worst, float(np.max(margins[at_box] - 1.0, initial=0.0)))
    if free.any():
        worst = max(worst, float(np.max(np.abs(margins[free] - 1.0))))
    return worst


def decision_function(model: SvmModel, kernel_rows: np.ndarray) -> np.ndarray:
    """kernel_rows[i, j] = k(x_i, train_j) for the points to score."""
    kernel_rows = np.asarray(kernel_rows, dtype=np.float64)
    if kernel_rows.ndim != 2 or kernel_rows.shape[1] != model.alphas.size:
        raise UsageError(
            f"kernel rows shape {kernel_rows.shape} does not match "
            f"{model.alphas.size} training points")
    return kernel_rows @ (model.alphas * model.labels) + model.bias


def predict(model: SvmModel, kernel_rows: np.ndarray) -> np.ndarray:
    """-1/+1 labels; a decision value of exactly zero goes to +1."""
    return np.where(decision_function(model, kernel_rows) >= 0.0, 1.0, -1.0)
