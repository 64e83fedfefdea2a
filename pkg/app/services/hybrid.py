"""Hybrid qGAN: quantum MERA-up generator against a fully connected discriminator.

Weights are one flat vector, layer by layer: W (fan_in x fan_out, row-major), then b.
"""
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from app.core.errors import InvalidInputError, NonFiniteLossError
from app.models.metrics import MseResult
from app.models.shower import DatasetStats, ShowerImage
from app.models.training import HybridConfig, HybridResult, LossRecord, MlpSize, MlpSpec, SpsaConfig
from app.services.circuits import MERA_UP, prepare_states, sample_noise
from app.services.data import compute_stats, images_to_array
from app.services import qsim
from app.services.qgan import (
    BatchSampler,
    bce_loss,
    decay_lr,
    decode_generator,
    epoch_mse,
    spawn_streams,
    SpsaOptimizer,
)

Layers = List[Tuple[np.ndarray, np.ndarray]]


def unpack(spec: MlpSpec, weights: Sequence[float]) -> Layers:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (spec.n_params,):
        raise InvalidInputError(f"{spec.layer_widths} expects {spec.n_params} weights, got {w.size}")
    layers = []
    pos = 0
    widths = spec.layer_widths
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        W = w[pos: pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = w[pos: pos + fan_out]
        pos += fan_out
        layers.append((W, b))
    return layers


def init_weights(spec: MlpSpec, rng: np.random.Generator) -> np.ndarray:
    """Glorot-uniform weights, zero biases."""
    parts = []
    widths = spec.layer_widths
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        parts.append(rng.uniform(-limit, limit, size=fan_in * fan_out))
        parts.append(np.zeros(fan_out))
    return np.concatenate(parts)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _forward(spec: MlpSpec, layers: Layers, x: np.ndarray):
    pre, post = [], [x]
    a = x
    for i, (W, b) in enumerate(layers):
        z = a @ W + b
        pre.append(z)
        a = _sigmoid(z) if i == len(layers) - 1 else np.where(z > 0, z, spec.leak * z)
        post.append(a)
    return pre, post


def mlp_forward_batch(spec: MlpSpec, weights: Sequence[float], x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != spec.layer_widths[0]:
        raise InvalidInputError(f"expected {spec.layer_widths[0]} inputs, got {x.shape[1]}")
    _, post = _forward(spec, unpack(spec, weights), x)
    return post[-1][:, 0]


def mlp_forward(spec: MlpSpec, weights: Sequence[float], image: Sequence[float]) -> float:
    return float(mlp_forward_batch(spec, weights, np.asarray(image)[None, :])[0])


def mlp_gradient(spec: MlpSpec, weights: Sequence[float], x: np.ndarray, labels: Union[float, np.ndarray]) -> np.ndarray:
    """Gradient of the mean BCE over the rows of `x`."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    layers = unpack(spec, weights)
    pre, post = _forward(spec, layers, x)
    p = post[-1][:, 0]
    y = np.broadcast_to(np.asarray(labels, dtype=np.float64), p.shape)
    # dL/dz at the logistic output
    delta = ((p - y) / x.shape[0])[:, None]
    grads = []
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        grads.append((post[i].T @ delta, delta.sum(axis=0)))
        if i > 0:
            delta = (delta @ W.T) * np.where(pre[i - 1] > 0, 1.0, spec.leak)
    flat = []
    for gW, gb in reversed(grads):
        flat.append(gW.reshape(-1))
        flat.append(gb)
    return np.concatenate(flat)


def mlp_backward(spec: MlpSpec, weights: Sequence[float], image: Sequence[float], label: float) -> np.ndarray:
    return mlp_gradient(spec, weights, np.asarray(image)[None, :], label)


class Adam:
    def __init__(self, dim: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad ** 2
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return params - lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train_hybrid(
    train_set: Sequence[ShowerImage],
    size: Union[MlpSize, str],
    cfg: HybridConfig = HybridConfig(),
    spsa: SpsaConfig = SpsaConfig(),
    stats: Optional[DatasetStats] = None,
) -> HybridResult:
    """Discriminator by moment-adapted gradient descent, generator by SPSA, once each per step."""
    if not train_set:
        raise InvalidInputError("training set is empty")
    size = MlpSize(size)
    spec = MlpSpec.of_size(size)
    data = images_to_array(train_set)
    stats = stats or compute_stats(train_set)
    batch_rng, noise_rng, spsa_rng, shot_rng, eval_rng, init_rng = spawn_streams(cfg.seed, 6)
    sampler = BatchSampler(data.shape[0], cfg.batch_size, batch_rng)

    weights = init_weights(spec, init_rng)
    adam = Adam(spec.n_params, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    gen = np.zeros(MERA_UP.n_params)
    gen_opt = SpsaOptimizer(spsa, spsa_rng)
    evaluations = 0
    losses: List[LossRecord] = []
    mse_curve: List[MseResult] = []
    log = logger.bind(seed=cfg.seed, size=size.value)
    log.info("hybrid-{} training: {} images, {} epochs, {} weights", size.value, len(data), cfg.epochs, spec.n_params)

    def fake_pixels(g: np.ndarray, noise_states: np.ndarray) -> np.ndarray:
        return decode_generator(qsim.run_spec(noise_states, MERA_UP, g), cfg.shots, cfg.exact_mode, shot_rng)

    for epoch in range(cfg.epochs):
        gen_lr = decay_lr(cfg.gen_lr, cfg.joint_decay, epoch)
        disc_lr = decay_lr(cfg.disc_lr, cfg.joint_decay, epoch)
        sampler.new_epoch()
        true_terms: List[float] = []
        fake_terms: List[float] = []
        gen_terms: List[float] = []
        for _ in range(cfg.steps_per_epoch):
            real = data[sampler.next()]
            fake = fake_pixels(gen, prepare_states(sample_noise(stats.stds, cfg.batch_size, noise_rng)))
            true_term = float(np.mean(bce_loss(mlp_forward_batch(spec, weights, real), cfg.label_true)))
            fake_term = float(np.mean(bce_loss(mlp_forward_batch(spec, weights, fake), cfg.label_fake)))
            if not (np.isfinite(true_term) and np.isfinite(fake_term)):
                raise NonFiniteLossError("hybrid discriminator", epoch, (true_term, fake_term))
            grad = mlp_gradient(spec, weights, real, cfg.label_true) + mlp_gradient(spec, weights, fake, cfg.label_fake)
            weights = adam.step(weights, grad, disc_lr)
            true_terms.append(true_term)
            fake_terms.append(fake_term)

            noise_states = prepare_states(sample_noise(stats.stds, cfg.batch_size, noise_rng))

            def gen_loss(g: np.ndarray) -> float:
                value = float(np.mean(bce_loss(mlp_forward_batch(spec, weights, fake_pixels(g, noise_states)), cfg.label_true)))
                gen_terms.append(value)
                return value

            gen = gen_opt.step(gen_loss, gen, gen_lr)
            evaluations += 2

        record = LossRecord(
            epoch=epoch,
            gen=float(np.mean(gen_terms)),
            disc_true=float(np.mean(true_terms)),
            disc_fake=float(np.mean(fake_terms)),
        )
        losses.append(record)
        mse = epoch_mse(gen, data, stats, cfg.mse_sample_size, cfg.shots, cfg.exact_mode, eval_rng, batch_rng)
        mse_curve.append(mse)
        log.debug("epoch {}: gen={:.4f} disc={:.4f} mse={:.3e}", epoch, record.gen, record.disc_total, mse.mse)

    log.info("hybrid-{} finished: final mse={:.4e}", size.value, mse_curve[-1].mse)
    return HybridResult(
        size=size,
        gen=tuple(float(v) for v in gen),
        weights=tuple(float(v) for v in weights),
        losses=losses,
        mse_curve=mse_curve,
        loss_evaluations=evaluations,
    )
