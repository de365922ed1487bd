"""Variational quantum generator.

The ansatz acts on ``|0...0>`` with an initial rotation layer followed by
``layers`` blocks of (ring of CNOTs, rotation layer). A rotation layer applies
RY then RZ to every qubit. Angles are stored layer-major, then qubit-major,
with the RY angle before the RZ angle::

    theta[l * 2N + 2q]      RY angle of qubit q in rotation layer l
    theta[l * 2N + 2q + 1]  RZ angle of qubit q in rotation layer l

Gradients use the parameter-shift rule, two circuit evaluations per angle.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np

from . import statevector as sv
from .exceptions import ConfigurationError, DomainError

SHIFT = np.pi / 2

_eval_hooks = []


@dataclass(frozen=True)
class AnsatzConfig:
    n_qubits: int
    layers: int

    def __post_init__(self):
        if not 1 <= self.n_qubits <= sv.MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in [1, {sv.MAX_QUBITS}]")
        if self.layers < 0:
            raise ConfigurationError("layers must be >= 0")

    def parameter_count(self) -> int:
        return 2 * self.n_qubits * (self.layers + 1)

    @property
    def levels(self) -> int:
        return 2 ** self.n_qubits

    def ring(self):
        """(control, target) pairs of the entangling ring, 0-indexed."""
        n = self.n_qubits
        if n == 1:
            return []
        return [(i, (i + 1) % n) for i in range(n)]


class EvaluationCounter:
    def __init__(self):
        self.count = 0

    def __call__(self, n):
        self.count += n


@contextlib.contextmanager
def count_evaluations():
    """Count circuit evaluations made inside the ``with`` block.

    >>> with count_evaluations() as counter:
    ...     _ = output_distribution(AnsatzConfig(2, 1), np.zeros(8))
    >>> counter.count
    1
    """
    counter = EvaluationCounter()
    _eval_hooks.append(counter)
    try:
        yield counter
    finally:
        _eval_hooks.remove(counter)


def _notify(n):
    for hook in _eval_hooks:
        hook(n)


def check_theta(config: AnsatzConfig, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.parameter_count(),):
        raise ConfigurationError(
            f"expected {config.parameter_count()} angles for {config}, got shape {theta.shape}"
        )
    if not np.all(np.isfinite(theta)):
        raise ConfigurationError("angles must be finite")
    return theta


def init_parameters(config: AnsatzConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=config.parameter_count())


def _rotate_batch(psi, n, qubit, mats):
    # psi: (B, 2**n), mats: (B, 2, 2)
    b = psi.shape[0]
    view = psi.reshape(b, 2 ** qubit, 2, 2 ** (n - qubit - 1))
    return np.einsum("bij,bajc->baic", mats, view).reshape(b, -1)


def _cx_batch(psi, n, control, target):
    b = psi.shape[0]
    out = psi.reshape((b,) + (2,) * n).copy()
    sel = [slice(None)] * (n + 1)
    sel[control + 1] = 1
    sel = tuple(sel)
    t_axis = target if target > control else target + 1
    out[sel] = np.flip(out[sel], axis=t_axis)
    return out.reshape(b, -1)


def _ry_mats(angles):
    c, s = np.cos(0.5 * angles), np.sin(0.5 * angles)
    m = np.empty(angles.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def _rz_mats(angles):
    m = np.zeros(angles.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = np.exp(-0.5j * angles)
    m[..., 1, 1] = np.exp(0.5j * angles)
    return m


def simulate_batch(config: AnsatzConfig, thetas: np.ndarray) -> np.ndarray:
    """Amplitudes of the ansatz for a stack of angle vectors, shape ``(B, 2**N)``.

    Each row counts as one circuit evaluation for :func:`count_evaluations`.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    b = thetas.shape[0]
    n = config.n_qubits
    psi = np.zeros((b, 2 ** n), dtype=np.complex128)
    psi[:, 0] = 1.0
    stride = 2 * n
    for layer in range(config.layers + 1):
        if layer > 0:
            for control, target in config.ring():
                psi = _cx_batch(psi, n, control, target)
        base = layer * stride
        for q in range(n):
            psi = _rotate_batch(psi, n, q, _ry_mats(thetas[:, base + 2 * q]))
            psi = _rotate_batch(psi, n, q, _rz_mats(thetas[:, base + 2 * q + 1]))
    _notify(b)
    return psi


def build_state(config: AnsatzConfig, theta) -> sv.StateVector:
    theta = check_theta(config, theta)
    return sv.StateVector(config.n_qubits, simulate_batch(config, theta[None, :])[0])


def output_distribution(config: AnsatzConfig, theta) -> np.ndarray:
    return sv.probabilities(build_state(config, theta))


def _batch_probs(config, thetas):
    amps = simulate_batch(config, thetas)
    return amps.real ** 2 + amps.imag ** 2


def check_disc_outputs(disc_outputs, levels: int) -> np.ndarray:
    d = np.asarray(disc_outputs, dtype=float)
    if d.shape != (levels,):
        raise ConfigurationError(f"need one discriminator score per basis state ({levels})")
    if np.any(~(d > 0.0)) or np.any(d > 1.0):
        raise DomainError("discriminator scores must lie in (0, 1]; clamp before calling")
    return d


def generator_loss(probs, disc_outputs) -> float:
    """Non-saturating generator loss ``-sum_j p_j log D(g_j)``."""
    p = np.asarray(probs, dtype=float)
    d = check_disc_outputs(disc_outputs, p.size)
    return float(-np.dot(p, np.log(d)))


def shift_prob_gradient(config: AnsatzConfig, theta, param_index: int) -> np.ndarray:
    """``d p / d theta[param_index]`` from two circuits shifted by +-pi/2."""
    theta = check_theta(config, theta)
    if not 0 <= param_index < config.parameter_count():
        raise IndexError(f"parameter index {param_index} out of range")
    shifted = np.stack([theta, theta])
    shifted[0, param_index] += SHIFT
    shifted[1, param_index] -= SHIFT
    p = _batch_probs(config, shifted)
    return 0.5 * (p[0] - p[1])


def prob_jacobian(config: AnsatzConfig, theta) -> np.ndarray:
    """Parameter-shift Jacobian ``J[i, j] = d p_j / d theta_i``.

    Costs exactly ``2 * parameter_count`` circuit evaluations.
    """
    theta = check_theta(config, theta)
    k = theta.size
    shifted = np.repeat(theta[None, :], 2 * k, axis=0)
    idx = np.arange(k)
    shifted[2 * idx, idx] += SHIFT
    shifted[2 * idx + 1, idx] -= SHIFT
    p = _batch_probs(config, shifted)
    return 0.5 * (p[0::2] - p[1::2])


def generator_gradient(config: AnsatzConfig, theta, disc_outputs) -> np.ndarray:
    d = check_disc_outputs(disc_outputs, config.levels)
    return -prob_jacobian(config, theta) @ np.log(d)
