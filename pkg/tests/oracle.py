"""Brute-force dense unitaries for checking the statevector simulator."""
from functools import reduce
from typing import Iterable

import numpy as np

from app.models.quantum import Gate, GateKind

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
P0 = np.diag([1, 0]).astype(np.complex128)
P1 = np.diag([0, 1]).astype(np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def embed(ops: dict, n: int) -> np.ndarray:
    """Kronecker product with qubit n-1 leftmost, so qubit 0 is the least-significant bit."""
    return reduce(np.kron, [ops.get(q, I2) for q in reversed(range(n))])


def gate_unitary(g: Gate, n: int) -> np.ndarray:
    if g.kind is GateKind.H:
        return embed({g.target: H}, n)
    if g.kind is GateKind.RY:
        return embed({g.target: ry(g.angle)}, n)
    return embed({g.control: P0}, n) + embed({g.control: P1, g.target: X}, n)


def circuit_unitary(gates: Iterable[Gate], n: int) -> np.ndarray:
    u = np.eye(2 ** n, dtype=np.complex128)
    for g in gates:
        u = gate_unitary(g, n) @ u
    return u


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def random_gates(n: int, count: int, rng: np.random.Generator) -> list:
    kinds = [GateKind.H, GateKind.RY] + ([GateKind.CX] if n > 1 else [])
    gates = []
    for _ in range(count):
        kind = kinds[rng.integers(len(kinds))]
        if kind is GateKind.CX:
            control, target = rng.choice(n, size=2, replace=False)
            gates.append(Gate(kind=kind, control=int(control), target=int(target)))
        elif kind is GateKind.RY:
            gates.append(Gate(kind=kind, target=int(rng.integers(n)), angle=float(rng.uniform(-np.pi, np.pi))))
        else:
            gates.append(Gate(kind=kind, target=int(rng.integers(n))))
    return gates
