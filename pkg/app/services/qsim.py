"""Dense statevector simulation for the {H, RY, CX} gate set.

Amplitude arrays may carry leading batch axes: shape (..., 2**n). Qubit 0 is the
least-significant bit of the basis index.
"""
from typing import Iterable, Sequence, Union

import numpy as np

from app.core.errors import InvalidInputError
from app.models.circuit import CircuitSpec, ParamSlot
from app.models.quantum import MAX_QUBITS, Gate, GateKind, ShotCounts, StateVector

H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)

ArrayLike = Union[float, np.ndarray]


def ry_matrix(angle: ArrayLike) -> np.ndarray:
    """RY(a) = [[cos a/2, -sin a/2], [sin a/2, cos a/2]]; array input gives shape (..., 2, 2)."""
    a = np.asarray(angle, dtype=np.float64)
    c = np.cos(a / 2.0)
    s = np.sin(a / 2.0)
    m = np.empty(a.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def _n_qubits(amps: np.ndarray) -> int:
    dim = amps.shape[-1]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise InvalidInputError(f"amplitude length {dim} is not a power of two")
    return n


def _check_qubit(qubit: int, n: int) -> None:
    if not 0 <= qubit < n:
        raise InvalidInputError(f"qubit index {qubit} out of range for {n} qubits")


def apply_matrix(amps: np.ndarray, matrix: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a one-qubit matrix; `matrix` is (2, 2) or batched (B, 2, 2) matching amps (B, 2**n)."""
    n = _n_qubits(amps)
    _check_qubit(qubit, n)
    lo = 1 << qubit
    hi = amps.shape[-1] // (2 * lo)
    lead = amps.shape[:-1]
    psi = amps.reshape(lead + (hi, 2, lo))
    if matrix.ndim == 2:
        out = np.einsum("ij,...hjl->...hil", matrix, psi)
    else:
        out = np.einsum("...ij,...hjl->...hil", matrix, psi)
    return out.reshape(amps.shape)


def apply_cx(amps: np.ndarray, control: int, target: int) -> np.ndarray:
    n = _n_qubits(amps)
    _check_qubit(control, n)
    _check_qubit(target, n)
    if control == target:
        raise InvalidInputError("CX control must differ from target")
    lead = amps.shape[:-1]
    k = len(lead)
    psi = amps.reshape(lead + (2,) * n).copy()
    # axis k + (n - 1 - q) holds qubit q
    c_axis = k + n - 1 - control
    t_axis = k + n - 1 - target
    idx = [slice(None)] * (k + n)
    idx[c_axis] = 1
    sub = psi[tuple(idx)]
    t_sub = t_axis - 1 if t_axis > c_axis else t_axis
    psi[tuple(idx)] = np.flip(sub, axis=t_sub).copy()
    return psi.reshape(amps.shape)


def apply_raw(amps: np.ndarray, g: Gate) -> np.ndarray:
    if g.kind is GateKind.H:
        return apply_matrix(amps, H_MATRIX, g.target)
    if g.kind is GateKind.RY:
        return apply_matrix(amps, ry_matrix(g.angle), g.target)
    return apply_cx(amps, g.control, g.target)


def init_zero(n_qubits: int) -> StateVector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise InvalidInputError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits=n_qubits, amps=amps)


def apply_gate(state: StateVector, g: Gate) -> StateVector:
    if g.max_index >= state.n_qubits:
        raise InvalidInputError(f"gate {g.kind.value} on qubit {g.max_index} exceeds {state.n_qubits} qubits")
    return StateVector(n_qubits=state.n_qubits, amps=apply_raw(state.amps, g))


def run_gates(state: StateVector, gates: Iterable[Gate]) -> StateVector:
    amps = state.amps
    for g in gates:
        if g.max_index >= state.n_qubits:
            raise InvalidInputError(f"gate {g.kind.value} on qubit {g.max_index} exceeds {state.n_qubits} qubits")
        amps = apply_raw(amps, g)
    return StateVector(n_qubits=state.n_qubits, amps=amps)


def run_spec(amps: np.ndarray, spec: CircuitSpec, params: Sequence[float] = ()) -> np.ndarray:
    """Evolve (batched) amplitudes through `spec`, reading slot angles from `params`."""
    if len(params) != spec.n_params:
        raise InvalidInputError(f"circuit expects {spec.n_params} parameters, got {len(params)}")
    if _n_qubits(amps) != spec.n_qubits:
        raise InvalidInputError(f"circuit acts on {spec.n_qubits} qubits, state has {_n_qubits(amps)}")
    for s in spec.slots:
        if isinstance(s, ParamSlot):
            amps = apply_matrix(amps, ry_matrix(params[s.param_id]), s.target)
        else:
            amps = apply_raw(amps, s)
    return amps


def run_circuit(spec: CircuitSpec) -> StateVector:
    """Run a fully bound circuit from |0...0>."""
    if not spec.is_bound:
        raise InvalidInputError(f"circuit has {spec.n_params} unbound parameter slots")
    amps = run_spec(init_zero(spec.n_qubits).amps, spec)
    return StateVector(n_qubits=spec.n_qubits, amps=amps)


def prob_one_amps(amps: np.ndarray, qubit: int) -> np.ndarray:
    """P(qubit = 1) for every state in a batch."""
    n = _n_qubits(amps)
    _check_qubit(qubit, n)
    lo = 1 << qubit
    hi = amps.shape[-1] // (2 * lo)
    p = np.abs(amps.reshape(amps.shape[:-1] + (hi, 2, lo))) ** 2
    return np.clip(p[..., 1, :].sum(axis=(-2, -1)), 0.0, 1.0)


def prob_one(state: StateVector, qubit: int) -> float:
    return float(prob_one_amps(state.amps, qubit))


def sample_ones(p_one: ArrayLike, shots: int, rng: np.random.Generator) -> np.ndarray:
    if shots < 1:
        raise InvalidInputError(f"shots must be >= 1, got {shots}")
    return rng.binomial(shots, np.clip(p_one, 0.0, 1.0))


def sample_qubit(state: StateVector, qubit: int, shots: int, rng: np.random.Generator) -> ShotCounts:
    ones = int(sample_ones(prob_one(state, qubit), shots, rng))
    return ShotCounts(qubit=qubit, zeros=shots - ones, ones=ones, shots=shots)
