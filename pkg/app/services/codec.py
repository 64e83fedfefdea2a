"""Pixel energy <-> qubit angle / measurement statistics.

theta = slope * E - theta_max, with |0> at e_max and |1> at e_min. Decoding reads
the z-axis intersection z = 2 P(|0>) - 1 and inverts the same line.
"""
from enum import Enum
from typing import Optional, Union

import numpy as np
from loguru import logger

from app.core.errors import InvalidInputError
from app.models.quantum import ShotCounts
from app.models.shower import EncodingSpec

Number = Union[float, np.ndarray]

DEFAULT_SPEC = EncodingSpec()


class DecodeMode(str, Enum):
    ZAXIS = "zaxis"
    # I = P(|0>), theta = arcsin(I): only reaches the upper hemisphere
    LITERAL = "literal"


class ClampStats:
    """Counts energies clamped to e_max during encoding."""

    def __init__(self) -> None:
        self.clamped = 0
        self.seen = 0

    def record(self, clamped: int, seen: int) -> None:
        self.clamped += clamped
        self.seen += seen


def encode_energies(energies: Number, spec: EncodingSpec = DEFAULT_SPEC, stats: Optional[ClampStats] = None) -> np.ndarray:
    e = np.asarray(energies, dtype=np.float64)
    if np.any(e < spec.e_min):
        raise InvalidInputError(f"negative pixel energy {float(e.min())} MeV")
    over = int(np.count_nonzero(e > spec.e_max))
    if over:
        logger.warning("clamped {} pixel energies above {} MeV", over, spec.e_max)
        e = np.minimum(e, spec.e_max)
    if stats is not None:
        stats.record(over, e.size)
    return spec.slope * e - spec.theta_max


def encode_energy(energy: float, spec: EncodingSpec = DEFAULT_SPEC, stats: Optional[ClampStats] = None) -> float:
    return float(encode_energies(energy, spec, stats))


def encoding_angle_to_gate(theta: Number) -> Number:
    """RY angle realising `theta` after H: P(|0>) = (1 + sin theta) / 2."""
    return -theta


def energy_from_z(z: Number, spec: EncodingSpec = DEFAULT_SPEC, mode: DecodeMode = DecodeMode.ZAXIS) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if DecodeMode(mode) is DecodeMode.LITERAL:
        # the printed formula takes I = P(|0>) = (z + 1) / 2 directly
        z = (z + 1.0) / 2.0
    theta = np.arcsin(np.clip(z, -1.0, 1.0))
    return (theta + spec.theta_max) / (2.0 * spec.theta_max) * spec.e_max


def decode_probabilities(p_zero: Number, spec: EncodingSpec = DEFAULT_SPEC, mode: DecodeMode = DecodeMode.ZAXIS) -> np.ndarray:
    """Exact-mode decoding from P(|0>)."""
    return energy_from_z(2.0 * np.asarray(p_zero, dtype=np.float64) - 1.0, spec, mode)


def decode_zero_counts(zeros: Number, shots: int, spec: EncodingSpec = DEFAULT_SPEC, mode: DecodeMode = DecodeMode.ZAXIS) -> np.ndarray:
    if shots < 1:
        raise InvalidInputError(f"shots must be >= 1, got {shots}")
    return decode_probabilities(np.asarray(zeros, dtype=np.float64) / shots, spec, mode)


def decode_counts(counts: ShotCounts, spec: EncodingSpec = DEFAULT_SPEC, mode: DecodeMode = DecodeMode.ZAXIS) -> float:
    return float(decode_zero_counts(counts.zeros, counts.shots, spec, mode))
