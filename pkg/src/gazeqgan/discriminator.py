"""Classical discriminator: MLP or (bi)LSTM network on the autodiff tape.

A batch is a ``(B, input_length)`` array; every row is scored independently,
so per-row gradients can be recovered from one sweep with a per-row seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .autodiff import Tape
from .exceptions import ConfigurationError, NumericError, ShapeError

SCORE_CLAMP = 1e-7


@dataclass(frozen=True)
class DiscriminatorConfig:
    architecture: str = "mlp"
    input_length: int | None = None
    hidden_size: int = 128
    num_recurrent_layers: int = 3
    bidirectional: bool = True
    dropout_rate: float = 0.3
    mlp_hidden: tuple = (64, 32)

    def __post_init__(self):
        if self.architecture not in ("mlp", "lstm"):
            raise ConfigurationError(f"unknown architecture {self.architecture!r}")
        if self.input_length is None:
            object.__setattr__(
                self, "input_length", 1 if self.architecture == "mlp" else 100
            )
        object.__setattr__(self, "mlp_hidden", tuple(int(w) for w in self.mlp_hidden))
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigurationError("dropout_rate must lie in [0, 1)")
        widths = (self.input_length, self.hidden_size, self.num_recurrent_layers) + self.mlp_hidden
        if min(widths) < 1 or not self.mlp_hidden:
            raise ConfigurationError("all widths and layer counts must be >= 1")

    @property
    def directions(self) -> int:
        return 2 if self.bidirectional else 1

    def layout(self):
        """Ordered ``(name, shape)`` list describing the flat parameter vector."""
        shapes = []
        if self.architecture == "mlp":
            widths = [self.input_length, *self.mlp_hidden, 1]
        else:
            h = self.hidden_size
            for layer in range(self.num_recurrent_layers):
                n_in = 1 if layer == 0 else h * self.directions
                for d in range(self.directions):
                    prefix = f"lstm{layer}.{'fwd' if d == 0 else 'bwd'}"
                    shapes += [
                        (f"{prefix}.W", (n_in, 4 * h)),
                        (f"{prefix}.U", (h, 4 * h)),
                        (f"{prefix}.b", (4 * h,)),
                    ]
            widths = [h * self.directions, self.mlp_hidden[0], 1]
        for k in range(len(widths) - 1):
            shapes += [(f"fc{k}.weight", (widths[k], widths[k + 1])), (f"fc{k}.bias", (widths[k + 1],))]
        return shapes

    def parameter_count(self) -> int:
        return sum(int(np.prod(shape)) for _, shape in self.layout())


@dataclass
class DiscriminatorParams:
    config: DiscriminatorConfig
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.config.parameter_count(),):
            raise ShapeError(
                f"expected {self.config.parameter_count()} parameters, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise NumericError("discriminator parameters must be finite")

    def views(self):
        out, offset = {}, 0
        for name, shape in self.config.layout():
            size = int(np.prod(shape))
            out[name] = self.values[offset:offset + size].reshape(shape)
            offset += size
        return out

    def with_values(self, values):
        return DiscriminatorParams(self.config, values)


def init_params(config: DiscriminatorConfig, rng: np.random.Generator) -> DiscriminatorParams:
    """Uniform ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` initialisation."""
    chunks = []
    for name, shape in config.layout():
        if name.startswith("lstm"):
            fan_in = config.hidden_size
        elif name.endswith(".weight"):
            fan_in = shape[0]
        else:
            fan_in = chunks[-1][1]
        bound = 1.0 / np.sqrt(fan_in)
        chunks.append((rng.uniform(-bound, bound, size=shape).ravel(), fan_in))
    return DiscriminatorParams(config, np.concatenate([c for c, _ in chunks]))


@dataclass
class ForwardRecord:
    """Everything a reverse sweep needs after :func:`forward`."""

    scores: np.ndarray
    tape: Tape
    output: object
    inputs: object
    param_vars: dict = field(repr=False)
    config: DiscriminatorConfig = None


def _dropout_mask(shape, rate, rng):
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def _lstm_direction(tape, steps, W, U, b, hidden, batch):
    h = tape.leaf(np.zeros((batch, hidden)))
    c = tape.leaf(np.zeros((batch, hidden)))
    outs = []
    for x_t in steps:
        z = tape.add(tape.add(x_t @ W, h @ U), b)
        i = tape.sigmoid(tape.columns(z, 0, hidden))
        f = tape.sigmoid(tape.columns(z, hidden, 2 * hidden))
        g = tape.tanh(tape.columns(z, 2 * hidden, 3 * hidden))
        o = tape.sigmoid(tape.columns(z, 3 * hidden, 4 * hidden))
        c = tape.add(f * c, i * g)
        h = o * tape.tanh(c)
        outs.append(h)
    return outs


def forward(params: DiscriminatorParams, sequences, dropout_mode="eval", rng=None) -> ForwardRecord:
    """Score a batch of sequences; returns scores in (0, 1) plus the tape.

    ``sequences`` has shape ``(B, input_length)``; a 1-D array is one sequence.
    In ``"train"`` mode dropout masks are drawn from ``rng``.
    """
    config = params.config
    x = np.asarray(sequences, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != config.input_length:
        raise ShapeError(
            f"expected sequences of length {config.input_length}, got shape {x.shape}"
        )
    if dropout_mode not in ("train", "eval"):
        raise ConfigurationError(f"dropout_mode must be 'train' or 'eval', got {dropout_mode!r}")
    train = dropout_mode == "train" and config.dropout_rate > 0
    if train and rng is None:
        raise ConfigurationError("train mode needs an rng for dropout masks")

    tape = Tape()
    pv = {name: tape.leaf(w) for name, w in params.views().items()}
    inputs = tape.leaf(x)
    batch = x.shape[0]

    if config.architecture == "mlp":
        act = inputs
        n_fc = len(config.mlp_hidden) + 1
    else:
        hdim = config.hidden_size
        steps = [tape.columns(inputs, t, t + 1) for t in range(config.input_length)]
        final = []
        for layer in range(config.num_recurrent_layers):
            per_dir = []
            for d, tag in enumerate(("fwd", "bwd")[: config.directions]):
                prefix = f"lstm{layer}.{tag}"
                seq = steps if d == 0 else steps[::-1]
                outs = _lstm_direction(
                    tape, seq, pv[prefix + ".W"], pv[prefix + ".U"], pv[prefix + ".b"], hdim, batch
                )
                per_dir.append(outs if d == 0 else outs[::-1])
            if config.directions == 2:
                steps = [tape.concat([f, b], axis=1) for f, b in zip(*per_dir)]
                final = [per_dir[0][-1], per_dir[1][0]]
            else:
                steps = per_dir[0]
                final = [per_dir[0][-1]]
        act = tape.concat(final, axis=1) if len(final) > 1 else final[0]
        n_fc = 2

    for k in range(n_fc):
        act = tape.add(act @ pv[f"fc{k}.weight"], pv[f"fc{k}.bias"])
        if k == n_fc - 1:
            act = tape.sigmoid(act)
        else:
            act = tape.tanh(act)
            if k == 0 and train:
                act = tape.scale(act, _dropout_mask(act.shape, config.dropout_rate, rng))

    scores = act.value[:, 0]
    if not np.all(np.isfinite(scores)):
        raise NumericError("non-finite discriminator activation")
    return ForwardRecord(scores.copy(), tape, act, inputs, pv, config)


def backward(record: ForwardRecord, seed_adjoint=1.0, wrt_input=False):
    """Gradient of ``sum_b seed[b] * score[b]`` w.r.t. the flat parameters.

    With ``wrt_input=True`` also returns the gradient w.r.t. the input batch.
    """
    seed = np.broadcast_to(np.asarray(seed_adjoint, dtype=float), record.scores.shape)
    adj = record.tape.backward(record.output, seed[:, None])
    grad = np.concatenate([adj[record.param_vars[name]].ravel() for name, _ in record.config.layout()])
    if wrt_input:
        return grad, adj[record.inputs]
    return grad


def clamp_scores(scores):
    return np.clip(np.asarray(scores, dtype=float), SCORE_CLAMP, 1.0 - SCORE_CLAMP)


def bce_loss(real_scores, fake_scores) -> float:
    """Binary cross-entropy with real labelled 1 and fake labelled 0."""
    real = np.asarray(real_scores, dtype=float)
    fake = np.asarray(fake_scores, dtype=float)
    if real.size == 0 or fake.size == 0:
        raise ConfigurationError("empty batch")
    if real.shape != fake.shape:
        raise ShapeError("real and fake batches must have equal length")
    real, fake = clamp_scores(real), clamp_scores(fake)
    return float(-np.mean(np.log(real) + np.log1p(-fake)))


def bce_score_adjoints(real_scores, fake_scores):
    """Derivatives of :func:`bce_loss` w.r.t. each (unclamped) score."""
    real = np.asarray(real_scores, dtype=float)
    fake = np.asarray(fake_scores, dtype=float)
    m = real.size
    inside_r = (real > SCORE_CLAMP) & (real < 1 - SCORE_CLAMP)
    inside_f = (fake > SCORE_CLAMP) & (fake < 1 - SCORE_CLAMP)
    d_real = np.where(inside_r, -1.0 / (m * clamp_scores(real)), 0.0)
    d_fake = np.where(inside_f, 1.0 / (m * (1.0 - clamp_scores(fake))), 0.0)
    return d_real, d_fake


def gradient_penalty(params, real_batch, rng, penalty_weight, noise_scale=None, fd_step=1e-5):
    """Input-gradient-norm penalty ``w * mean_b (||grad_x D(x~_b)|| - 1)^2``.

    Inputs are perturbed as ``x~ = x + U(-s, s)`` with ``s = 0.1 * std(x)``
    unless ``noise_scale`` is given. The network runs in eval mode.

    The parameter gradient needs a mixed second derivative. It is obtained as
    a central difference of parameter gradients along the unit input-gradient
    direction, which costs two extra sweeps and has O(fd_step**2) error.

    Returns ``(penalty, parameter_gradient)``.
    """
    if penalty_weight < 0:
        raise ConfigurationError("penalty weight must be >= 0")
    n_params = params.values.size
    if penalty_weight == 0:
        return 0.0, np.zeros(n_params)
    x = np.asarray(real_batch, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if params.config.input_length == 1 else x[None, :]
    if noise_scale is None:
        noise_scale = 0.1 * float(np.std(x))
    x_tilde = x + rng.uniform(-noise_scale, noise_scale, size=x.shape)

    m = x.shape[0]
    _, g_in = backward(forward(params, x_tilde), 1.0, wrt_input=True)
    norms = np.linalg.norm(g_in, axis=1)
    penalty = float(penalty_weight * np.mean((norms - 1.0) ** 2))

    safe = norms > 0
    direction = np.zeros_like(g_in)
    direction[safe] = g_in[safe] / norms[safe, None]
    coef = 2.0 * penalty_weight * (norms - 1.0) / m
    coef[~safe] = 0.0
    if not np.any(coef):
        return penalty, np.zeros(n_params)
    g_plus = backward(forward(params, x_tilde + fd_step * direction), coef)
    g_minus = backward(forward(params, x_tilde - fd_step * direction), coef)
    return penalty, (g_plus - g_minus) / (2.0 * fd_step)


def input_gradient_norms(params, batch):
    _, g_in = backward(forward(params, batch), 1.0, wrt_input=True)
    return np.linalg.norm(g_in, axis=1)


@dataclass(frozen=True)
class AmsgradState:
    m: np.ndarray
    v: np.ndarray
    v_hat: np.ndarray
    t: int = 0
    lr: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n, **hyper):
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), 0, **hyper)


def amsgrad_step(state: AmsgradState, params, grads):
    """One AMSGrad update; returns ``(new_params, new_state)``.

    ``v_hat`` keeps the running maximum of the raw second moment and is bias
    corrected with the same factor as ``v``.
    """
    g = np.asarray(grads, dtype=float)
    p = np.asarray(params, dtype=float)
    if g.shape != p.shape or g.shape != state.m.shape:
        raise ShapeError("params, grads and optimizer state must share a shape")
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    v_hat = np.maximum(state.v_hat, v)
    m_corr = m / (1.0 - state.beta1 ** t)
    v_corr = v_hat / (1.0 - state.beta2 ** t)
    new_p = p - state.lr * m_corr / (np.sqrt(v_corr) + state.eps)
    return new_p, replace(state, m=m, v=v, v_hat=v_hat, t=t)
