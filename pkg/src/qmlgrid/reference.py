"""Slow, independent reference routes used only for cross-checking.

Nothing here shares code with the modules it checks: circuits become dense
unitaries via Kronecker products and matrix multiplication, gradients come
from central finite differences, and the SVM dual is solved by projected
gradient ascent. Deliberately brute force; do not optimize.
"""
from __future__ import annotations

import numpy as np

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)


def single_qubit_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    if kind == "h":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
    if kind == "rx":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "ry":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "rz":
        return np.array([[np.exp(-1j * angle / 2), 0],
                         [0, np.exp(1j * angle / 2)]])
    if kind == "phase":
        return np.array([[1, 0], [0, np.exp(1j * angle)]])
    raise ValueError(f"not a single-qubit kind: {kind!r}")


def embed(n_qubits: int, factors: dict) -> np.ndarray:
    """Tensor product with qubit 0 on the least significant axis."""
    u = np.eye(1, dtype=np.complex128)
    for q in reversed(range(n_qubits)):
        u = np.kron(u, factors.get(q, _I2))
    return u


def gate_unitary(n_qubits: int, kind: str, targets, angle=None) -> np.ndarray:
    if kind == "cnot":
        c, t = targets
        return embed(n_qubits, {c: _P0}) + embed(n_qubits, {c: _P1, t: _X})
    if kind == "cz":
        a, b = targets
        u = np.eye(1 << n_qubits, dtype=np.complex128)
        idx = np.arange(1 << n_qubits)
        both = ((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 1)
        u[both, both] = -1.0
        return u
    return embed(n_qubits, {targets[0]: single_qubit_matrix(kind, angle)})


def circuit_unitary(n_qubits: int, gates) -> np.ndarray:
    """Product of per-gate unitaries; gates is a sequence of objects with
    kind / targets / angle (the simulator's concrete gate type fits)."""
    u = np.eye(1 << n_qubits, dtype=np.complex128)
    for g in gates:
        u = gate_unitary(n_qubits, g.kind, tuple(g.targets), g.angle) @ u
    return u


def finite_difference_gradient(fn, theta: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """Central differences of a scalar function of a parameter vector."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        hi = theta.copy()
        lo = theta.copy()
        hi[k] += eps
        lo[k] -= eps
        grad[k] = (fn(hi) - fn(lo)) / (2.0 * eps)
    return grad


def dual_objective(gram: np.ndarray, labels: np.ndarray, alpha: np.ndarray) -> float:
    q = (labels[:, None] * labels[None, :]) * gram
    return float(alpha.sum() - 0.5 * alpha @ q @ alpha)


def project_box_equality(v: np.ndarray, labels: np.ndarray,
                         box: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= box, sum(a * y) = 0}.

    The KKT system reduces to one scalar: a = clip(v - lam * y, 0, box)
    with sum(a * y) monotone nonincreasing in lam; bisect on lam.
    """
    span = float(np.abs(v).sum() + box.sum() + 1.0)
    lo, hi = -span, span

    def balance(lam):
        return float(np.clip(v - lam * labels, 0.0, box) @ labels)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if balance(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return np.clip(v - lam * labels, 0.0, box)


def solve_dual_projected_gradient(gram: np.ndarray, labels: np.ndarray,
                                  box: np.ndarray, max_iter: int = 200_000,
                                  grad_tol: float = 1e-12) -> np.ndarray:
    """Projected gradient ascent on the soft-margin dual from alpha = 0."""
    y = np.asarray(labels, dtype=np.float64)
    q = (y[:, None] * y[None, :]) * gram
    lip = float(np.linalg.eigvalsh(q)[-1])
    step = 1.0 / max(lip, 1e-8)
    alpha = np.zeros(len(y))
    for _ in range(max_iter):
        grad = 1.0 - q @ alpha
        nxt = project_box_equality(alpha + step * grad, y, box)
        if float(np.max(np.abs(nxt - alpha))) < grad_tol:
            alpha = nxt
            break
        alpha = nxt
    return alpha


def bias_from_alpha(gram: np.ndarray, labels: np.ndarray, alpha: np.ndarray,
                    box: np.ndarray, sv_tol: float = 1e-7) -> float:
    """Bias rule re-derived from the KKT conditions: average over free
    support vectors, else the midpoint of the feasible interval."""
    y = np.asarray(labels, dtype=np.float64)
    f = gram @ (alpha * y)
    g = y - f
    free = (alpha > sv_tol) & (alpha < box - sv_tol)
    if free.any():
        return float(g[free].mean())
    lower = g[((y > 0) & (alpha <= sv_tol)) | ((y < 0) & (alpha >= box - sv_tol))]
    upper = g[((y > 0) & (alpha >= box - sv_tol)) | ((y < 0) & (alpha <= sv_tol))]
    lo = float(lower.max()) if lower.size else -np.inf
    hi = float(upper.min()) if upper.size else np.inf
    if np.isinf(lo) and np.isinf(hi):
        return 0.0
    if np.isinf(lo):
        return hi
    if np.isinf(hi):
        return lo
    return 0.5 * (lo + hi)
