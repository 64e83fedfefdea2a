import numpy as np
import pytest

from app.core.errors import InvalidInputError
from app.models.circuit import MeraDirection, NoiseVector, ParamSlot
from app.models.quantum import GateKind
from app.models.shower import EncodingSpec, ShowerProfile
from app.services import circuits, qsim
from app.services.circuits import MERA_DOWN, MERA_UP
from app.services.qgan import decode_generator, generator_states, read_out

ZEROS = np.zeros(20)


def signature(slot):
    return slot.kind, slot.target, getattr(slot, "control", None)


def zero_noise() -> NoiseVector:
    return NoiseVector(omegas=(0.0,) * 8, shared_shift=0.0)


def test_both_templates_have_twenty_parameters():
    assert MERA_DOWN.n_params == 20
    assert MERA_UP.n_params == 20


def test_mera_down_structure():
    assert MERA_DOWN.count(GateKind.CX) == 10
    assert MERA_DOWN.count(GateKind.RY, parametric=True) == 20
    assert len(circuits.mera_layout(MeraDirection.DOWN).blocks) == 10
    assert len(circuits.mera_layout(MeraDirection.UP).blocks) == 10


def test_output_qubit_is_target_of_final_block():
    assert circuits.mera_layout(MeraDirection.DOWN).output_qubit == 7
    last = MERA_DOWN.slots[-1]
    assert last.kind is GateKind.CX and last.target == 7


def test_zero_discriminator_on_uniform_state_reads_half():
    amps = qsim.run_spec(circuits.prepare_states(np.zeros((1, 8))), MERA_DOWN, ZEROS)
    assert qsim.prob_one_amps(amps, 7)[0] == pytest.approx(0.5, abs=1e-12)


def test_mera_up_mirrors_mera_down():
    assert [signature(s) for s in MERA_UP.slots] == [signature(s) for s in reversed(MERA_DOWN.slots)]
    ids = [s.param_id for s in MERA_UP.slots if isinstance(s, ParamSlot)]
    assert ids == list(range(20))


def test_zero_generator_is_pure_cx_network(rng):
    psi = rng.normal(size=(2, 256)) + 1j * rng.normal(size=(2, 256))
    cx_only = psi
    for s in MERA_UP.slots:
        if s.kind is GateKind.CX:
            cx_only = qsim.apply_cx(cx_only, s.control, s.target)
    np.testing.assert_allclose(qsim.run_spec(psi, MERA_UP, ZEROS), cx_only, atol=1e-12)


def test_noise_degenerate_when_spread_and_shift_vanish():
    out = circuits.noise_angles(np.ones(8), np.array(0.0), [0.0] * 8)
    np.testing.assert_array_equal(out, np.zeros(8))


def test_noise_scaled_by_encoding_slope():
    out = circuits.noise_angles(np.ones(8), np.array(0.0), [0.3] * 8)
    np.testing.assert_allclose(out, np.full(8, np.pi / 2))


def test_noise_draws_stay_in_bounds():
    stds = np.asarray(ShowerProfile().stds)
    omegas = circuits.sample_noise(stds, 100_000, np.random.default_rng(2))
    bound = EncodingSpec().slope * stds + 0.25
    assert omegas.shape == (100_000, 8)
    assert np.all(omegas <= bound) and np.all(omegas >= -bound)


def test_build_noise_layer(rng):
    nv = circuits.build_noise_layer(ShowerProfile().stds, rng)
    assert len(nv.omegas) == 8
    assert -0.25 <= nv.shared_shift <= 0.25


def test_noise_rejects_negative_std(rng):
    with pytest.raises(InvalidInputError):
        circuits.build_noise_layer([0.1] * 7 + [-0.1], rng)


def test_fake_pass_gate_counts():
    spec = circuits.assemble_fake_pass(zero_noise(), ZEROS, ZEROS)
    assert spec.is_bound
    assert spec.count(GateKind.H) == 8
    assert spec.count(GateKind.RY) == 8 + 40
    assert spec.count(GateKind.CX) == 20
    assert len(spec.slots) == 76


def test_fake_pass_places_discriminator_after_generator(rng):
    gen, disc = rng.uniform(size=20), rng.uniform(10, 11, size=20)
    slots = circuits.assemble_fake_pass(zero_noise(), gen, disc).slots
    tail = slots[16 + 30:]
    assert tail == tuple(circuits.bind(MERA_DOWN, disc))
    head_angles = [s.angle for s in slots[:46] if s.kind is GateKind.RY]
    assert all(a < 10 for a in head_angles)


def test_fake_pass_is_deterministic(rng):
    noise = circuits.build_noise_layer(ShowerProfile().stds, rng)
    gen, disc = rng.normal(size=20), rng.normal(size=20)
    assert circuits.assemble_fake_pass(noise, gen, disc) == circuits.assemble_fake_pass(noise, gen, disc)


def test_fake_pass_matches_batched_path(rng):
    noise = circuits.build_noise_layer(ShowerProfile().stds, rng)
    gen, disc = rng.normal(size=20), rng.normal(size=20)
    full = qsim.run_circuit(circuits.assemble_fake_pass(noise, gen, disc))
    batched = qsim.run_spec(generator_states(gen, np.array([noise.omegas])), MERA_DOWN, disc)
    np.testing.assert_allclose(full.amps, batched[0], atol=1e-12)
    assert qsim.prob_one(full, 7) == pytest.approx(read_out(batched, 1, True, None)[0], abs=1e-12)


def test_true_pass_midpoint_image_has_zero_angles():
    thetas = circuits.encode_energies([0.3] * 8)
    spec = circuits.assemble_true_pass(thetas, ZEROS)
    enc = spec.slots[8:16]
    assert all(s.kind is GateKind.RY and abs(s.angle) < 1e-12 for s in enc)


def test_true_pass_zero_image():
    thetas = circuits.encode_energies([0.0] * 8)
    np.testing.assert_allclose(thetas, np.full(8, -np.pi / 2))
    spec = circuits.assemble_true_pass(thetas, ZEROS)
    # gate convention flips the sign of the encoding angle
    np.testing.assert_allclose([s.angle for s in spec.slots[8:16]], np.full(8, np.pi / 2))


def test_true_pass_gate_counts():
    spec = circuits.assemble_true_pass(np.zeros(8), ZEROS)
    assert spec.count(GateKind.H) == 8
    assert spec.count(GateKind.RY) == 8 + 20
    assert spec.count(GateKind.CX) == 10


def test_true_pass_is_deterministic(rng):
    thetas, disc = rng.uniform(-1, 1, size=8), rng.normal(size=20)
    assert circuits.assemble_true_pass(thetas, disc) == circuits.assemble_true_pass(thetas, disc)


@pytest.mark.parametrize("gen_len, disc_len", [(19, 20), (20, 21)])
def test_assembly_rejects_wrong_lengths(gen_len, disc_len):
    with pytest.raises(InvalidInputError):
        circuits.assemble_fake_pass(zero_noise(), np.zeros(gen_len), np.zeros(disc_len))


def test_true_pass_rejects_wrong_angle_count():
    with pytest.raises(InvalidInputError):
        circuits.assemble_true_pass(np.zeros(7), ZEROS)


def test_generated_images_depend_on_noise():
    rng = np.random.default_rng(99)
    gen = rng.uniform(-np.pi, np.pi, size=20)
    stds = ShowerProfile().stds
    a = decode_generator(generator_states(gen, circuits.sample_noise(stds, 100, rng)), 1, True, None)
    b = decode_generator(generator_states(gen, circuits.sample_noise(stds, 100, rng)), 1, True, None)
    differing = np.sum(np.max(np.abs(a - b), axis=1) > 1e-6)
    assert differing >= 99


def test_export_text():
    lines = circuits.export_text(MERA_DOWN).splitlines()
    assert len(lines) == 30
    assert lines[0] == "RY 1 theta[0]"
    assert lines[1] == "RY 2 theta[1]"
    assert lines[2] == "CX 2 1"
    bound = circuits.export_text(circuits.assemble_true_pass(np.zeros(8), ZEROS)).splitlines()
    assert bound[0] == "H 0"
    kind, target, angle = bound[8].split()
    assert (kind, target, float(angle)) == ("RY", "0", 0.0)
