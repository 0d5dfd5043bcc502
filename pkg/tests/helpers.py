"""Shared helpers for the test suite: random circuit generation."""
from __future__ import annotations

import numpy as np

from qmlgrid.statevec import Gate

SINGLE = ("h", "rx", "ry", "rz", "phase")
TWO = ("cnot", "cz")


def random_gates(rng: np.random.Generator, n_qubits: int, depth: int) -> list:
    gates = []
    kinds = SINGLE + TWO if n_qubits >= 2 else SINGLE
    for _ in range(depth):
        kind = kinds[rng.integers(len(kinds))]
        if kind in TWO:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(Gate(kind, (int(a), int(b))))
        elif kind == "h":
            gates.append(Gate(kind, (int(rng.integers(n_qubits)),)))
        else:
            angle = float(rng.uniform(-2 * np.pi, 2 * np.pi))
            gates.append(Gate(kind, (int(rng.integers(n_qubits)),), angle))
    return gates
