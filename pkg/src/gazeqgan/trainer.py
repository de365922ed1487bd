"""Adversarial training loop for the quantum generator.

Per batch: draw a fake batch and update the discriminator on real + fake,
then update the generator against the discriminator's scores of every basis
state. The generator loss is the exact expectation over the output
distribution, so its gradient is the parameter-shift gradient.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import discriminator as disc
from . import generator as gen
from . import io
from .data import DiscreteSeries, bin_centers, make_sequences
from .exceptions import ConfigurationError, NumericError
from .metrics import js_divergence
from .seeding import substream
from .statevector import sample_outcomes


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 300
    batch_size: int = 500
    seed: int = 0
    disc_updates_per_batch: int = 1
    gen_updates_per_batch: int = 1
    penalty_weight: float = 0.0
    gen_lr: float = 0.002
    disc_lr: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    record_wall_time: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be >= 1")
        if self.disc_updates_per_batch < 0 or self.gen_updates_per_batch < 0:
            raise ConfigurationError("update counts must be >= 0")
        if self.penalty_weight < 0:
            raise ConfigurationError("penalty_weight must be >= 0")

    def optimizer(self, n, lr):
        return disc.AmsgradState.zeros(n, lr=lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    gen_loss: float
    disc_loss: float
    wall_time: float = 0.0
    jsd: float | None = None


@dataclass
class TrainingLog:
    records: list = field(default_factory=list)

    def append(self, record: EpochRecord):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError("epoch numbers must increase")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def write_csv(self, path):
        has_jsd = any(r.jsd is not None for r in self.records)
        header = ["epoch", "gen_loss", "disc_loss", "wall_time_s"] + (["jsd"] if has_jsd else [])
        lines = [",".join(header)]
        for r in self.records:
            cells = [str(r.epoch), io.fmt(r.gen_loss, 9), io.fmt(r.disc_loss, 9), io.fmt(r.wall_time, 6)]
            if has_jsd:
                cells.append(io.fmt(r.jsd, 9) if r.jsd is not None else "")
            lines.append(",".join(cells))
        io._write_lines(path, lines)


@dataclass
class TrainResult:
    gen_config: gen.AnsatzConfig
    theta: np.ndarray
    disc_params: disc.DiscriminatorParams
    log: TrainingLog

    @property
    def probabilities(self):
        return gen.output_distribution(self.gen_config, self.theta)


def make_fake_batch(gen_config, theta, m, rng, probs=None):
    """``m`` draws from the generator mapped to bin centres in [0, 1]."""
    if m < 1:
        raise ConfigurationError("fake batch size must be >= 1")
    p = gen.output_distribution(gen_config, theta) if probs is None else probs
    return bin_centers(gen_config.levels)[sample_outcomes(p, m, rng)]


def basis_inputs(gen_config, input_length):
    """One discriminator input per basis state: a window filled with its bin centre."""
    return np.repeat(bin_centers(gen_config.levels)[:, None], input_length, axis=1)


def real_inputs(dataset: DiscreteSeries, input_length):
    values = dataset.values
    if input_length == 1:
        return values[:, None]
    return make_sequences(values, input_length, input_length)


def _check_finite(value, what, epoch, batch):
    if not np.isfinite(value):
        raise NumericError(f"non-finite {what} at epoch {epoch}, batch {batch}")


def discriminator_step(params, state, real, fake, rng_dropout, rng_penalty, penalty_weight, noise_scale):
    """One optimizer step on BCE + gradient penalty; returns (params, state, loss)."""
    rec_real = disc.forward(params, real, "train", rng_dropout)
    rec_fake = disc.forward(params, fake, "train", rng_dropout)
    loss = disc.bce_loss(rec_real.scores, rec_fake.scores)
    d_real, d_fake = disc.bce_score_adjoints(rec_real.scores, rec_fake.scores)
    grad = disc.backward(rec_real, d_real) + disc.backward(rec_fake, d_fake)
    if penalty_weight > 0:
        penalty, g_pen = disc.gradient_penalty(
            params, real, rng_penalty, penalty_weight, noise_scale=noise_scale
        )
        loss += penalty
        grad = grad + g_pen
    values, state = disc.amsgrad_step(state, params.values, grad)
    return params.with_values(values), state, loss


def train(gen_config: gen.AnsatzConfig, disc_config: disc.DiscriminatorConfig,
          training_config: TrainingConfig, dataset: DiscreteSeries, target_probs=None) -> TrainResult:
    """Train generator and discriminator; fully deterministic for a fixed seed.

    When ``target_probs`` is given, the JSD between the generator
    distribution and the target is logged after every epoch.
    """
    tc = training_config
    if len(dataset) == 0:
        raise ConfigurationError("dataset is empty")
    if dataset.levels != gen_config.levels:
        raise ConfigurationError(
            f"dataset has {dataset.levels} levels but the generator produces {gen_config.levels}"
        )
    real_all = real_inputs(dataset, disc_config.input_length)
    noise_scale = 0.1 * float(np.std(dataset.values))

    rng_shuffle = substream(tc.seed, "shuffle")
    rng_sampling = substream(tc.seed, "sampling")
    rng_dropout = substream(tc.seed, "dropout")
    rng_penalty = substream(tc.seed, "penalty")
    theta = gen.init_parameters(gen_config, substream(tc.seed, "init_generator"))
    params = disc.init_params(disc_config, substream(tc.seed, "init_discriminator"))
    g_state = tc.optimizer(theta.size, tc.gen_lr)
    d_state = tc.optimizer(params.values.size, tc.disc_lr)

    n_inputs = real_all.shape[0]
    batch = min(tc.batch_size, n_inputs)
    n_batches = max(1, n_inputs // tc.batch_size)
    length = disc_config.input_length
    basis = basis_inputs(gen_config, length)

    log = TrainingLog()
    probs = None  # output distribution of the current theta, when known
    start = time.perf_counter()
    for epoch in range(1, tc.epochs + 1):
        order = rng_shuffle.permutation(n_inputs)
        g_losses, d_losses = [], []
        for b in range(n_batches):
            real = real_all[order[b * batch:(b + 1) * batch]]
            for _ in range(tc.disc_updates_per_batch):
                if probs is None:
                    probs = gen.output_distribution(gen_config, theta)
                fake = make_fake_batch(gen_config, theta, batch * length, rng_sampling, probs)
                params, d_state, d_loss = discriminator_step(
                    params, d_state, real, fake.reshape(batch, length),
                    rng_dropout, rng_penalty, tc.penalty_weight, noise_scale,
                )
                _check_finite(d_loss, "discriminator loss", epoch, b)
                d_losses.append(d_loss)
            for _ in range(tc.gen_updates_per_batch):
                if probs is None:
                    probs = gen.output_distribution(gen_config, theta)
                scores = disc.clamp_scores(disc.forward(params, basis).scores)
                g_loss = gen.generator_loss(probs, scores)
                _check_finite(g_loss, "generator loss", epoch, b)
                grad = gen.generator_gradient(gen_config, theta, scores)
                theta, g_state = disc.amsgrad_step(g_state, theta, grad)
                probs = None
                g_losses.append(g_loss)
        jsd = None
        if target_probs is not None:
            if probs is None:
                probs = gen.output_distribution(gen_config, theta)
            jsd = js_divergence(probs, target_probs)
        wall = time.perf_counter() - start if tc.record_wall_time else 0.0
        log.append(EpochRecord(
            epoch,
            float(np.mean(g_losses)) if g_losses else float("nan"),
            float(np.mean(d_losses)) if d_losses else float("nan"),
            wall,
            jsd,
        ))
    return TrainResult(gen_config, theta, params, log)


def checkpoint(gen_config, theta, disc_params, path):
    """Write ``generator.csv`` and ``discriminator.csv`` into directory ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    io.write_generator(path / "generator.csv", gen_config, theta)
    io.write_discriminator(path / "discriminator.csv", disc_params)


def restore(path, gen_config=None, disc_config=None):
    """Inverse of :func:`checkpoint`; returns ``(gen_config, theta, disc_params)``."""
    path = Path(path)
    config, theta = io.read_generator(path / "generator.csv", gen_config)
    params = io.read_discriminator(path / "discriminator.csv", disc_config)
    return config, theta, params
