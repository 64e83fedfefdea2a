"""Full quantum GAN: MERA-up generator against a MERA-down discriminator.

Both passes start from product states (H + RY per qubit) and are simulated in
batches. The discriminator reads qubit 7; |1> means "true image".
"""
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from app.core.errors import InvalidInputError, NonFiniteLossError
from app.models.circuit import CircuitSpec, NoiseVector
from app.models.metrics import MseResult
from app.models.shower import DatasetStats, EncodingSpec, ShowerImage
from app.models.training import GanParams, LossRecord, SpsaConfig, TrainConfig, TrainResult
from app.services import qsim
from app.services.circuits import (
    MERA_DOWN,
    MERA_UP,
    N_QUBITS,
    OUTPUT_QUBIT,
    gate_angles_for_images,
    prepare_states,
    sample_noise,
)
from app.services.codec import decode_probabilities, decode_zero_counts
from app.services.data import array_to_images, compute_stats, images_to_array
from app.services.metrics import mse_between

LOSS_EPS = 1e-7

Number = Union[float, np.ndarray]
LossFn = Callable[[np.ndarray], float]


def spawn_streams(seed: int, n: int) -> List[np.random.Generator]:
    """Independent per-purpose random streams for one trial."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


# --- discriminator readout and losses -------------------------------------


def read_out(amps: np.ndarray, shots: int, exact: bool, rng: Optional[np.random.Generator]) -> np.ndarray:
    """Probability of |1> on the output qubit, exact or estimated from `shots` shots."""
    p = qsim.prob_one_amps(amps, OUTPUT_QUBIT)
    if exact:
        return p
    if rng is None:
        raise InvalidInputError("shot mode needs a random stream")
    return qsim.sample_ones(p, shots, rng) / shots


def discriminator_output(
    circuit: CircuitSpec, shots: int, exact: bool, rng: Optional[np.random.Generator] = None
) -> float:
    if circuit.n_qubits != N_QUBITS:
        raise InvalidInputError(f"discriminator circuits act on {N_QUBITS} qubits")
    state = qsim.run_circuit(circuit)
    return float(read_out(state.amps, shots, exact, rng))


def bce_loss(d_out: Number, label: Number) -> Number:
    d = np.clip(d_out, LOSS_EPS, 1.0 - LOSS_EPS)
    loss = -(label * np.log(d) + (1.0 - label) * np.log(1.0 - d))
    return float(loss) if np.ndim(loss) == 0 else loss


def generator_states(gen_params: Sequence[float], noise: np.ndarray) -> np.ndarray:
    """H + RY(noise) + MERA-up for a batch of noise rows (B, 8)."""
    return qsim.run_spec(prepare_states(noise), MERA_UP, gen_params)


def true_states(pixels: np.ndarray, spec: EncodingSpec = EncodingSpec()) -> np.ndarray:
    return prepare_states(gate_angles_for_images(pixels, spec))


def _noise_rows(noise: Sequence[NoiseVector]) -> np.ndarray:
    return np.array([nv.omegas for nv in noise], dtype=np.float64).reshape(-1, N_QUBITS)


class DiscObjective:
    """Discriminator loss over a fixed batch; generator output states are cached."""

    def __init__(self, real_states: np.ndarray, fake_states: np.ndarray, cfg: TrainConfig, rng: np.random.Generator):
        if real_states.shape[0] == 0 or fake_states.shape[0] == 0:
            raise InvalidInputError("empty batch")
        self.real_states = real_states
        self.fake_states = fake_states
        self.cfg = cfg
        self.rng = rng
        self.evaluations = 0
        self.true_terms: List[float] = []
        self.fake_terms: List[float] = []

    def terms(self, disc_params: Sequence[float]) -> Tuple[float, float]:
        both = qsim.run_spec(np.concatenate([self.real_states, self.fake_states]), MERA_DOWN, disc_params)
        d = read_out(both, self.cfg.shots, self.cfg.exact_mode, self.rng)
        n_real = self.real_states.shape[0]
        true_term = float(np.mean(bce_loss(d[:n_real], self.cfg.label_true)))
        fake_term = float(np.mean(bce_loss(d[n_real:], self.cfg.label_fake)))
        return true_term, fake_term

    def __call__(self, disc_params: np.ndarray) -> float:
        true_term, fake_term = self.terms(disc_params)
        self.evaluations += 1
        self.true_terms.append(true_term)
        self.fake_terms.append(fake_term)
        return true_term + fake_term


class GenObjective:
    """Generator loss: fake pass scored against the true label."""

    def __init__(self, noise: np.ndarray, disc_params: Sequence[float], cfg: TrainConfig, rng: np.random.Generator):
        if noise.shape[0] == 0:
            raise InvalidInputError("empty batch")
        self.noise_states = prepare_states(noise)
        self.disc_params = disc_params
        self.cfg = cfg
        self.rng = rng
        self.evaluations = 0
        self.values: List[float] = []

    def __call__(self, gen_params: np.ndarray) -> float:
        amps = qsim.run_spec(qsim.run_spec(self.noise_states, MERA_UP, gen_params), MERA_DOWN, self.disc_params)
        d = read_out(amps, self.cfg.shots, self.cfg.exact_mode, self.rng)
        value = float(np.mean(bce_loss(d, self.cfg.label_true)))
        self.evaluations += 1
        self.values.append(value)
        return value


def batch_loss_disc(
    params: GanParams,
    batch: Sequence[ShowerImage],
    noise: Sequence[NoiseVector],
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> float:
    if not batch or not noise:
        raise InvalidInputError("empty batch")
    if len(batch) != len(noise):
        raise InvalidInputError(f"batch has {len(batch)} images but {len(noise)} noise vectors")
    objective = DiscObjective(
        true_states(images_to_array(batch)), generator_states(params.gen, _noise_rows(noise)), cfg, rng
    )
    return objective(np.asarray(params.disc))


def batch_loss_gen(params: GanParams, noise: Sequence[NoiseVector], cfg: TrainConfig, rng: np.random.Generator) -> float:
    if not noise:
        raise InvalidInputError("empty batch")
    return GenObjective(_noise_rows(noise), params.disc, cfg, rng)(np.asarray(params.gen))


# --- optimisation ----------------------------------------------------------


def spsa_gradient(
    loss_fn: LossFn,
    params: Sequence[float],
    spsa: SpsaConfig,
    k: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Simultaneous-perturbation gradient estimate from exactly two loss evaluations."""
    theta = np.asarray(params, dtype=np.float64)
    delta = rng.choice(np.array([-1.0, 1.0]), size=theta.shape)
    ck = spsa.c0 / (k + 1) ** spsa.gamma
    plus = loss_fn(theta + ck * delta)
    minus = loss_fn(theta - ck * delta)
    if not (np.isfinite(plus) and np.isfinite(minus)):
        raise NonFiniteLossError("spsa_step", k, (plus, minus))
    return (plus - minus) / (2.0 * ck * delta)


def spsa_step(
    loss_fn: LossFn,
    params: Sequence[float],
    lr: float,
    spsa: SpsaConfig,
    k: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One SPSA update with Rademacher perturbation; exactly two loss evaluations."""
    if lr <= 0:
        raise InvalidInputError(f"learning rate must be positive, got {lr}")
    return np.asarray(params, dtype=np.float64) - lr * spsa_gradient(loss_fn, params, spsa, k, rng)


class SpsaOptimizer:
    """SPSA with an exponentially decaying gradient history.

    The update direction is h_k = m * h_{k-1} + (1 - m) * g_k, started at the first
    estimate, so consistent gradients keep their scale while single-batch noise
    averages out. Each step still costs two loss evaluations.
    """

    def __init__(self, spsa: SpsaConfig, rng: np.random.Generator):
        self.spsa = spsa
        self.rng = rng
        self.k = 0
        self.history: Optional[np.ndarray] = None

    def step(self, loss_fn: LossFn, params: Sequence[float], lr: float) -> np.ndarray:
        if lr <= 0:
            raise InvalidInputError(f"learning rate must be positive, got {lr}")
        grad = spsa_gradient(loss_fn, params, self.spsa, self.k, self.rng)
        self.k += 1
        m = self.spsa.momentum
        self.history = grad if self.history is None else m * self.history + (1.0 - m) * grad
        return np.asarray(params, dtype=np.float64) - lr * self.history


def decay_lr(lr0: float, decay: float, epoch: int) -> float:
    if epoch < 0:
        raise InvalidInputError(f"epoch must be >= 0, got {epoch}")
    return lr0 * float(np.exp(-decay * epoch))


class BatchSampler:
    """Uniform batches without replacement; reshuffles when the pool runs dry."""

    def __init__(self, n: int, batch_size: int, rng: np.random.Generator):
        if n < 1:
            raise InvalidInputError("training set is empty")
        self.n = n
        self.batch_size = batch_size
        self.rng = rng
        self._order = np.empty(0, dtype=np.int64)

    def new_epoch(self) -> None:
        self._order = self.rng.permutation(self.n)

    def next(self) -> np.ndarray:
        if self.batch_size > self.n:
            return self.rng.choice(self.n, size=self.batch_size, replace=True)
        if self._order.size < self.batch_size:
            self.new_epoch()
        idx, self._order = self._order[: self.batch_size], self._order[self.batch_size:]
        return idx


# --- inference -------------------------------------------------------------


def decode_generator(
    amps: np.ndarray, shots: int, exact: bool, rng: Optional[np.random.Generator], spec: EncodingSpec = EncodingSpec()
) -> np.ndarray:
    """Measure every qubit of generator output states and decode to energies, shape (B, 8)."""
    p_one = np.stack([qsim.prob_one_amps(amps, q) for q in range(N_QUBITS)], axis=-1)
    if exact:
        return decode_probabilities(1.0 - p_one, spec)
    if rng is None:
        raise InvalidInputError("shot mode needs a random stream")
    zeros = shots - qsim.sample_ones(p_one, shots, rng)
    return decode_zero_counts(zeros, shots, spec)


def generate_pixels(
    gen_params: Sequence[float],
    n: int,
    stats: DatasetStats,
    shots: int,
    exact: bool,
    rng: np.random.Generator,
    spec: EncodingSpec = EncodingSpec(),
) -> np.ndarray:
    if n < 1:
        raise InvalidInputError(f"number of images must be >= 1, got {n}")
    noise = sample_noise(stats.stds, n, rng, spec)
    return decode_generator(generator_states(gen_params, noise), shots, exact, rng, spec)


def generate_images(
    gen_params: Sequence[float],
    n: int,
    stats: DatasetStats,
    shots: int,
    exact: bool,
    rng: np.random.Generator,
    spec: EncodingSpec = EncodingSpec(),
) -> List[ShowerImage]:
    return array_to_images(generate_pixels(gen_params, n, stats, shots, exact, rng, spec))


def epoch_mse(
    gen_params: Sequence[float],
    data: np.ndarray,
    stats: DatasetStats,
    sample_size: int,
    shots: int,
    exact: bool,
    gen_rng: np.random.Generator,
    ref_rng: np.random.Generator,
) -> MseResult:
    generated = generate_pixels(gen_params, sample_size, stats, shots, exact, gen_rng)
    ref = data[ref_rng.choice(data.shape[0], size=min(sample_size, data.shape[0]), replace=False)]
    return mse_between(generated, ref)


# --- training --------------------------------------------------------------


def train_full_qgan(
    train_set: Sequence[ShowerImage],
    cfg: TrainConfig = TrainConfig(),
    spsa: SpsaConfig = SpsaConfig(),
    stats: Optional[DatasetStats] = None,
) -> TrainResult:
    """Adversarial training with 5:1 discriminator/generator SPSA updates per step."""
    if not train_set:
        raise InvalidInputError("training set is empty")
    data = images_to_array(train_set)
    stats = stats or compute_stats(train_set)
    batch_rng, noise_rng, spsa_rng, shot_rng, eval_rng = spawn_streams(cfg.seed, 5)
    sampler = BatchSampler(data.shape[0], cfg.batch_size, batch_rng)
    real_angles = gate_angles_for_images(data)

    gen = np.zeros(MERA_UP.n_params)
    disc = np.zeros(MERA_DOWN.n_params)
    gen_opt = SpsaOptimizer(spsa, spsa_rng)
    disc_opt = SpsaOptimizer(spsa, spsa_rng)
    evaluations = 0
    losses: List[LossRecord] = []
    mse_curve: List[MseResult] = []
    log = logger.bind(seed=cfg.seed)
    log.info("full qGAN training: {} images, {} epochs, exact={}", len(data), cfg.epochs, cfg.exact_mode)

    for epoch in range(cfg.epochs):
        gen_lr = decay_lr(cfg.gen_lr, cfg.gen_decay, epoch)
        disc_lr = decay_lr(cfg.disc_lr, cfg.disc_decay, epoch)
        sampler.new_epoch()
        true_terms: List[float] = []
        fake_terms: List[float] = []
        gen_terms: List[float] = []
        for _ in range(cfg.steps_per_epoch):
            for _ in range(cfg.disc_steps_per_gen_step):
                idx = sampler.next()
                noise = sample_noise(stats.stds, cfg.batch_size, noise_rng)
                objective = DiscObjective(
                    prepare_states(real_angles[idx]), generator_states(gen, noise), cfg, shot_rng
                )
                disc = disc_opt.step(objective, disc, disc_lr)
                evaluations += objective.evaluations
                true_terms.extend(objective.true_terms)
                fake_terms.extend(objective.fake_terms)
            noise = sample_noise(stats.stds, cfg.batch_size, noise_rng)
            g_objective = GenObjective(noise, disc, cfg, shot_rng)
            gen = gen_opt.step(g_objective, gen, gen_lr)
            evaluations += g_objective.evaluations
            gen_terms.extend(g_objective.values)

        record = LossRecord(
            epoch=epoch,
            gen=float(np.mean(gen_terms)),
            disc_true=float(np.mean(true_terms)),
            disc_fake=float(np.mean(fake_terms)),
        )
        losses.append(record)
        mse = epoch_mse(gen, data, stats, cfg.mse_sample_size, cfg.shots, cfg.exact_mode, eval_rng, batch_rng)
        mse_curve.append(mse)
        log.debug(
            "epoch {}: gen={:.4f} disc={:.4f} mse={:.3e}", epoch, record.gen, record.disc_total, mse.mse
        )

    log.info("full qGAN finished: final mse={:.4e}", mse_curve[-1].mse)
    return TrainResult(
        params=GanParams(gen=tuple(float(v) for v in gen), disc=tuple(float(v) for v in disc)),
        losses=losses,
        mse_curve=mse_curve,
        loss_evaluations=evaluations,
    )
