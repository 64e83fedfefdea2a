"""MERA generator/discriminator templates and the combined training circuits.

All circuits act on 8 qubits. MERA-down compresses into qubit 7, MERA-up is its
operational mirror. Parameter ids follow gate order.
"""
from typing import List, Optional, Sequence

import numpy as np

from app.core.errors import InvalidInputError
from app.models.circuit import CircuitSpec, MeraDirection, MeraLayout, NoiseVector, ParamSlot, Slot
from app.models.quantum import Gate, GateKind
from app.models.shower import N_PIXELS, EncodingSpec
from app.models.training import N_CIRCUIT_PARAMS
from app.services import qsim
from app.services.codec import encode_energies, encoding_angle_to_gate

N_QUBITS = N_PIXELS
OUTPUT_QUBIT = 7
NOISE_SHIFT = 0.25

# disentanglers, then isometries level by level
MERA_DOWN_BLOCKS = (
    (1, 2), (3, 4), (5, 6),
    (0, 1), (2, 3), (4, 5), (6, 7),
    (1, 3), (5, 7),
    (3, 7),
)


def mera_layout(direction: MeraDirection) -> MeraLayout:
    direction = MeraDirection(direction)
    if direction is MeraDirection.DOWN:
        return MeraLayout(direction=direction, blocks=MERA_DOWN_BLOCKS, output_qubit=OUTPUT_QUBIT)
    return MeraLayout(direction=direction, blocks=tuple(reversed(MERA_DOWN_BLOCKS)))


def build_mera_down() -> CircuitSpec:
    slots: List[Slot] = []
    pid = 0
    for a, b in mera_layout(MeraDirection.DOWN).blocks:
        for q in (a, b):
            slots.append(ParamSlot(target=q, param_id=pid))
            pid += 1
        slots.append(Gate(kind=GateKind.CX, control=a, target=b))
    return CircuitSpec(n_qubits=N_QUBITS, slots=tuple(slots))


def build_mera_up() -> CircuitSpec:
    slots: List[Slot] = []
    pid = 0
    for a, b in mera_layout(MeraDirection.UP).blocks:
        slots.append(Gate(kind=GateKind.CX, control=a, target=b))
        for q in (b, a):
            slots.append(ParamSlot(target=q, param_id=pid))
            pid += 1
    return CircuitSpec(n_qubits=N_QUBITS, slots=tuple(slots))


MERA_DOWN = build_mera_down()
MERA_UP = build_mera_up()


def noise_angles(
    raw: np.ndarray, shift: np.ndarray, pixel_stds: Sequence[float], spec: EncodingSpec = EncodingSpec()
) -> np.ndarray:
    """Omega_i = u_i * slope * sigma_i + r, broadcasting over leading axes of `raw`."""
    sigma = np.asarray(pixel_stds, dtype=np.float64)
    return np.asarray(raw) * spec.slope * sigma + np.asarray(shift)[..., None]


def _check_stds(pixel_stds: Sequence[float]) -> None:
    if len(pixel_stds) != N_QUBITS:
        raise InvalidInputError(f"expected {N_QUBITS} pixel stds, got {len(pixel_stds)}")
    if any(s < 0 for s in pixel_stds):
        raise InvalidInputError("pixel standard deviations must be non-negative")


def sample_noise(
    pixel_stds: Sequence[float],
    n: int,
    rng: np.random.Generator,
    spec: EncodingSpec = EncodingSpec(),
    shift_range: float = NOISE_SHIFT,
) -> np.ndarray:
    """Noise angles for `n` images, shape (n, 8)."""
    _check_stds(pixel_stds)
    raw = rng.uniform(-1.0, 1.0, size=(n, N_QUBITS))
    shift = rng.uniform(-shift_range, shift_range, size=n)
    return noise_angles(raw, shift, pixel_stds, spec)


def build_noise_layer(
    pixel_stds: Sequence[float],
    rng: np.random.Generator,
    spec: EncodingSpec = EncodingSpec(),
    shift_range: float = NOISE_SHIFT,
) -> NoiseVector:
    _check_stds(pixel_stds)
    raw = rng.uniform(-1.0, 1.0, size=N_QUBITS)
    shift = float(rng.uniform(-shift_range, shift_range))
    omegas = noise_angles(raw, np.asarray(shift), pixel_stds, spec)
    return NoiseVector(omegas=tuple(float(o) for o in omegas), shared_shift=shift)


def bind(spec: CircuitSpec, params: Sequence[float]) -> List[Gate]:
    if len(params) != spec.n_params:
        raise InvalidInputError(f"expected {spec.n_params} parameters, got {len(params)}")
    out = []
    for s in spec.slots:
        if isinstance(s, ParamSlot):
            out.append(Gate(kind=GateKind.RY, target=s.target, angle=float(params[s.param_id])))
        else:
            out.append(s)
    return out


def _check_params(name: str, params: Sequence[float]) -> None:
    if len(params) != N_CIRCUIT_PARAMS:
        raise InvalidInputError(f"{name} expects {N_CIRCUIT_PARAMS} parameters, got {len(params)}")


def _prep_layer(angles: Sequence[float]) -> List[Gate]:
    gates = [Gate(kind=GateKind.H, target=q) for q in range(N_QUBITS)]
    gates += [Gate(kind=GateKind.RY, target=q, angle=float(a)) for q, a in enumerate(angles)]
    return gates


def assemble_fake_pass(noise: NoiseVector, gen_params: Sequence[float], disc_params: Sequence[float]) -> CircuitSpec:
    _check_params("generator", gen_params)
    _check_params("discriminator", disc_params)
    gates = _prep_layer(noise.omegas) + bind(MERA_UP, gen_params) + bind(MERA_DOWN, disc_params)
    return CircuitSpec(n_qubits=N_QUBITS, slots=tuple(gates))


def assemble_true_pass(image_thetas: Sequence[float], disc_params: Sequence[float]) -> CircuitSpec:
    """`image_thetas` are encoding angles; the RY gates carry their gate-convention sign."""
    if len(image_thetas) != N_QUBITS:
        raise InvalidInputError(f"expected {N_QUBITS} encoding angles, got {len(image_thetas)}")
    _check_params("discriminator", disc_params)
    gates = _prep_layer([encoding_angle_to_gate(t) for t in image_thetas]) + bind(MERA_DOWN, disc_params)
    return CircuitSpec(n_qubits=N_QUBITS, slots=tuple(gates))


def prepare_states(gate_angles: np.ndarray) -> np.ndarray:
    """H then RY(angle) on each qubit for a batch of angle rows, shape (B, 8) -> (B, 256)."""
    gate_angles = np.atleast_2d(np.asarray(gate_angles, dtype=np.float64))
    batch = gate_angles.shape[0]
    # H on every qubit of |0...0> gives the uniform superposition
    amps = np.full((batch, 2 ** N_QUBITS), 2.0 ** (-N_QUBITS / 2), dtype=np.complex128)
    for q in range(N_QUBITS):
        amps = qsim.apply_matrix(amps, qsim.ry_matrix(gate_angles[:, q]), q)
    return amps


def export_text(spec: CircuitSpec) -> str:
    lines = []
    for s in spec.slots:
        if isinstance(s, ParamSlot):
            lines.append(f"RY {s.target} theta[{s.param_id}]")
        elif s.kind is GateKind.CX:
            lines.append(f"CX {s.target} {s.control}")
        elif s.kind is GateKind.RY:
            lines.append(f"RY {s.target} {s.angle:.12g}")
        else:
            lines.append(f"H {s.target}")
    return "\n".join(lines) + "\n"


def gate_angles_for_images(energies: np.ndarray, spec: Optional[EncodingSpec] = None) -> np.ndarray:
    return encoding_angle_to_gate(encode_energies(energies, spec or EncodingSpec()))
