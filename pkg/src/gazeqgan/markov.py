"""Markov-chain baseline built from a Gaussian KDE of consecutive pairs.

Convention: ``T[j, i]`` is the probability of moving from state ``j`` (current)
to state ``i`` (next), so rows are conditional distributions and sum to one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import ConfigurationError, DegenerateDataError, OutOfSupportError, ShapeError

log = logging.getLogger(__name__)

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
MARGINAL_FLOOR = 1e-300
QUAD_POINTS = 64


def gaussian_kernel(u):
    u = np.asarray(u, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * u * u)


def silverman_rule(std, n):
    """``1.06 * std * (n - 1) ** (-1/5)``."""
    if n < 2:
        raise ConfigurationError("need at least 2 samples")
    if std <= 0:
        raise DegenerateDataError("sample standard deviation is zero")
    # dividing by the 1/5 power is exact for perfect fifth powers such as 1024
    return 1.06 * std / (n - 1) ** 0.2


def silverman_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ConfigurationError("need at least 2 samples")
    return silverman_rule(float(np.std(x, ddof=1)), x.size)


@dataclass(frozen=True)
class KdeModel:
    samples: np.ndarray
    bandwidth: float
    sample_std: float

    @property
    def current(self):
        return self.samples[:-1]

    @property
    def following(self):
        return self.samples[1:]


def fit_kde(samples, bandwidth=None) -> KdeModel:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ConfigurationError("need at least 2 samples")
    std = float(np.std(x, ddof=1))
    h = silverman_rule(std, x.size) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise ConfigurationError("bandwidth must be positive")
    return KdeModel(x, h, std)


def joint_density(model: KdeModel, x_next, x_cur):
    """Product-kernel estimate of the density of ``(X_{n+1}, X_n)``."""
    xn = np.asarray(x_next, dtype=float)
    xc = np.asarray(x_cur, dtype=float)
    h = model.bandwidth
    kn = gaussian_kernel((xn[..., None] - model.following) / h)
    kc = gaussian_kernel((xc[..., None] - model.current) / h)
    return np.sum(kn * kc, axis=-1) / ((model.samples.size - 1) * h * h)


def marginal_density(model: KdeModel, x_cur):
    xc = np.asarray(x_cur, dtype=float)
    h = model.bandwidth
    k = gaussian_kernel((xc[..., None] - model.current) / h)
    return np.sum(k, axis=-1) / ((model.samples.size - 1) * h)


def conditional_density(model: KdeModel, x_next, x_cur):
    marg = marginal_density(model, x_cur)
    if np.any(marg < MARGINAL_FLOOR):
        raise OutOfSupportError(f"marginal density vanishes at x_cur={x_cur!r}")
    return joint_density(model, x_next, x_cur) / marg


@dataclass(frozen=True)
class TransitionMatrix:
    bin_edges: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        mat = np.asarray(self.matrix, dtype=float)
        n = edges.size - 1
        if n < 2 or np.any(np.diff(edges) <= 0):
            raise ConfigurationError("bin edges must be >= 3 strictly increasing values")
        if mat.shape != (n, n):
            raise ShapeError(f"transition matrix must be {n}x{n}, got {mat.shape}")
        if np.any(mat < 0) or np.any(np.abs(mat.sum(axis=1) - 1.0) > 1e-9):
            raise ConfigurationError("transition matrix must be row-stochastic")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _bin_edges_for(model, n_states, bin_edges):
    if n_states < 2:
        raise ConfigurationError("n_states must be >= 2")
    if bin_edges is None:
        lo, hi = float(model.samples.min()), float(model.samples.max())
        if hi == lo:
            raise DegenerateDataError("samples span a single value")
        bin_edges = np.linspace(lo, hi, n_states + 1)
    edges = np.asarray(bin_edges, dtype=float)
    if edges.size != n_states + 1 or np.any(np.diff(edges) <= 0):
        raise ConfigurationError("bin_edges must be n_states + 1 increasing values")
    return edges


def _kernel_bin_mass(edges, centers, h):
    """``A[j, s]``: mass of the kernel centred at ``centers[s]`` inside bin ``j``."""
    cdf = ndtr((edges[:, None] - centers[None, :]) / h)
    return np.diff(cdf, axis=0)


def _midpoint_rule_mass(edges, centers, h, weights):
    """``weights @ B.T`` where ``B[i, s]`` integrates the scaled kernel over bin ``i``
    with a composite midpoint rule of QUAD_POINTS nodes."""
    n_states = edges.size - 1
    widths = np.diff(edges)
    frac = (np.arange(QUAD_POINTS) + 0.5) / QUAD_POINTS
    nodes = (edges[:-1, None] + widths[:, None] * frac[None, :]).ravel()
    node_w = np.repeat(widths / QUAD_POINTS, QUAD_POINTS)
    out = np.zeros((weights.shape[0], nodes.size))
    chunk = max(1, 2_000_000 // max(1, centers.size))
    for start in range(0, nodes.size, chunk):
        k = gaussian_kernel((nodes[start:start + chunk, None] - centers[None, :]) / h) / h
        out[:, start:start + chunk] = weights @ k.T
    out *= node_w[None, :]
    return out.reshape(weights.shape[0], n_states, QUAD_POINTS).sum(axis=2)


def build_transition_matrix(model: KdeModel, n_states=8, bin_edges=None,
                            conditioning="bin") -> TransitionMatrix:
    """Discretise the KDE conditional density into an ``n_states`` matrix.

    ``conditioning="bin"`` conditions on the current value lying anywhere in
    its bin: both coordinates of the product kernel are integrated over their
    bins in closed form. ``conditioning="midpoint"`` instead fixes the current
    value at the bin midpoint and integrates the next value with a 64-point
    composite midpoint rule. Either way rows are normalised over the binned
    range, and a row whose conditioning bin carries no kernel mass falls back
    to the histogram of the samples.

    Bin edges default to a uniform grid over the sample range.
    """
    edges = _bin_edges_for(model, n_states, bin_edges)
    h = model.bandwidth
    n_pairs = model.samples.size - 1
    if conditioning == "bin":
        a = _kernel_bin_mass(edges, model.current, h)
        marg = a.sum(axis=1) / n_pairs
        probs = a @ _kernel_bin_mass(edges, model.following, h).T
    elif conditioning == "midpoint":
        mids = 0.5 * (edges[:-1] + edges[1:])
        a = gaussian_kernel((mids[:, None] - model.current[None, :]) / h)
        marg = a.sum(axis=1) / (n_pairs * h)
        probs = _midpoint_rule_mass(edges, model.following, h, a)
    else:
        raise ConfigurationError(f"unknown conditioning {conditioning!r}")

    counts = np.histogram(np.clip(model.samples, edges[0], edges[-1]), bins=edges)[0]
    fallback = counts / counts.sum()
    rows = np.empty_like(probs)
    for j in range(n_states):
        total = probs[j].sum()
        if marg[j] < MARGINAL_FLOOR or total <= 0:
            log.warning("state %d has no kernel mass; using the marginal histogram", j)
            rows[j] = fallback
        else:
            rows[j] = probs[j] / total
    return TransitionMatrix(edges, rows)


@dataclass(frozen=True)
class ChainSample:
    states: np.ndarray
    values: np.ndarray


def generate_series(tm: TransitionMatrix, start_state, length, rng) -> ChainSample:
    if not 0 <= start_state < tm.n_states:
        raise ConfigurationError(f"start_state {start_state} out of range")
    if length < 1:
        raise ConfigurationError("length must be >= 1")
    cum = np.cumsum(tm.matrix, axis=1)
    cum[:, -1] = 1.0
    u = rng.random(length - 1)
    states = np.empty(length, dtype=np.int64)
    s = int(start_state)
    states[0] = s
    for t in range(1, length):
        s = int(np.searchsorted(cum[s], u[t - 1], side="right"))
        states[t] = s
    return ChainSample(states, tm.bin_centers[states])


def empirical_transitions(states, n_states):
    """Row-normalised transition counts; unvisited rows are zero."""
    s = np.asarray(states, dtype=np.int64)
    counts = np.zeros((n_states, n_states))
    np.add.at(counts, (s[:-1], s[1:]), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0), totals.ravel()
