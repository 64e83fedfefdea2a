import numpy as np
import pytest

from app.core.errors import InvalidInputError
from app.models.quantum import Gate, GateKind, ShotCounts
from app.services import codec, qsim


def p_zero_after_encoding(theta: float) -> float:
    gates = [Gate(kind=GateKind.H, target=0), Gate(kind=GateKind.RY, target=0, angle=codec.encoding_angle_to_gate(theta))]
    return 1.0 - qsim.prob_one(qsim.run_gates(qsim.init_zero(1), gates), 0)


@pytest.mark.parametrize("energy, theta", [(0.0, -np.pi / 2), (0.6, np.pi / 2), (0.3, 0.0)])
def test_encode_energy(energy, theta):
    assert codec.encode_energy(energy) == pytest.approx(theta, abs=1e-12)


@pytest.mark.parametrize("theta, p0", [(np.pi / 2, 1.0), (-np.pi / 2, 0.0), (0.0, 0.5)])
def test_gate_angle_reproduces_bloch_geometry(theta, p0):
    assert codec.encoding_angle_to_gate(theta) == -theta
    assert p_zero_after_encoding(theta) == pytest.approx(p0, abs=1e-12)


@pytest.mark.parametrize("zeros, energy", [(1024, 0.6), (512, 0.3), (0, 0.0)])
def test_decode_counts(zeros, energy):
    counts = ShotCounts(qubit=0, zeros=zeros, ones=1024 - zeros, shots=1024)
    assert codec.decode_counts(counts) == pytest.approx(energy, abs=1e-12)


def test_exact_roundtrip():
    e = np.random.default_rng(3).uniform(0.0, 0.6, size=1000)
    p0 = (1.0 + np.sin(codec.encode_energies(e))) / 2.0
    assert np.max(np.abs(codec.decode_probabilities(p0) - e)) <= 1e-9


def test_shot_roundtrip_error_bound():
    rng = np.random.default_rng(4)
    e = rng.uniform(0.0, 0.6, size=1000)
    p0 = (1.0 + np.sin(codec.encode_energies(e))) / 2.0
    zeros = rng.binomial(1024, p0)
    assert np.mean(np.abs(codec.decode_zero_counts(zeros, 1024) - e)) <= 0.02


def test_monotonicity():
    assert np.all(np.diff(codec.encode_energies(np.linspace(0, 0.6, 101))) > 0)
    assert np.all(np.diff(codec.decode_zero_counts(np.arange(1025), 1024)) > 0)


def test_energies_above_range_are_clamped_and_counted():
    stats = codec.ClampStats()
    thetas = codec.encode_energies([0.7, 0.2, 0.61], stats=stats)
    assert stats.clamped == 2 and stats.seen == 3
    assert thetas[0] == pytest.approx(np.pi / 2)


def test_negative_energy_rejected():
    with pytest.raises(InvalidInputError):
        codec.encode_energy(-0.01)


def test_decode_rejects_zero_shots():
    with pytest.raises(InvalidInputError):
        codec.decode_zero_counts(0, 0)


def test_decode_clamps_overshoot():
    assert codec.energy_from_z(1.0 + 1e-9) == pytest.approx(0.6)
    assert codec.energy_from_z(-1.5) == pytest.approx(0.0)


def test_literal_decoding_only_reaches_upper_half():
    p0 = np.linspace(0.0, 1.0, 11)
    literal = codec.decode_probabilities(p0, mode=codec.DecodeMode.LITERAL)
    assert literal[0] == pytest.approx(0.3)
    assert literal[-1] == pytest.approx(0.6)
    # I = 0.5 -> arcsin = pi/6
    assert literal[5] == pytest.approx(0.4)
    assert np.all(literal >= 0.3 - 1e-12)
    counts = ShotCounts(qubit=0, zeros=512, ones=512, shots=1024)
    assert codec.decode_counts(counts, mode="literal") == pytest.approx(0.4)
    assert codec.decode_counts(counts) == pytest.approx(0.3)
