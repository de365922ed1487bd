"""Divergences, histograms and moment statistics. Natural log throughout."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, ShapeError

log = logging.getLogger(__name__)

KL_FLOOR = 1e-12


def _pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeError(f"distributions differ in length: {p.shape} vs {q.shape}")
    return p, q


def _kl_terms(p, q):
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def kl_divergence(p, q) -> float:
    """KL(P || Q). Bins with P > 0 and Q = 0 get Q floored, then Q renormalised."""
    p, q = _pair(p, q)
    if np.any((p > 0) & (q <= 0)):
        q = np.where((p > 0) & (q <= 0), KL_FLOOR, q)
        q = q / q.sum()
    return max(_kl_terms(p, q), 0.0)


def js_divergence(p, q) -> float:
    p, q = _pair(p, q)
    total = p + q

    def half_terms(x):
        # x * log(x / m) with m = total / 2; never halving total keeps subnormal masses nonzero
        mask = x > 0
        return float(np.sum(x[mask] * np.log(2.0 * x[mask] / total[mask])))

    # summed in a fixed symmetric order so that swapping arguments is exact
    a, b = half_terms(p), half_terms(q)
    lo, hi = min(a, b), max(a, b)
    return max(0.5 * lo + 0.5 * hi, 0.0)


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    clamped: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def empty(self) -> bool:
        return self.total == 0

    @property
    def normalized(self) -> np.ndarray:
        if self.empty:
            raise ValueError("histogram is empty; normalized probabilities are undefined")
        return self.counts / self.total


def check_edges(bin_edges) -> np.ndarray:
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ConfigurationError("bin edges must be >= 2 strictly increasing values")
    return edges


def histogram(data, bin_edges) -> Histogram:
    """Counts over half-open bins, last bin closed; out-of-range values are clamped."""
    edges = check_edges(bin_edges)
    x = np.asarray(data, dtype=float).ravel()
    nbins = edges.size - 1
    idx = np.searchsorted(edges, x, side="right") - 1
    idx[x == edges[-1]] = nbins - 1
    outside = (x < edges[0]) | (x > edges[-1])
    n_out = int(outside.sum())
    if n_out:
        log.info("histogram: %d value(s) outside [%g, %g] counted in boundary bins", n_out, edges[0], edges[-1])
    idx = np.clip(idx, 0, nbins - 1)
    return Histogram(edges, np.bincount(idx, minlength=nbins).astype(np.int64), n_out)


def uniform_edges(levels, lo=0.0, hi=1.0):
    return np.linspace(lo, hi, levels + 1)


def pooled_edges(*datasets, bins=100):
    pooled = np.concatenate([np.asarray(d, dtype=float).ravel() for d in datasets])
    lo, hi = float(pooled.min()), float(pooled.max())
    if hi == lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


def histogram_jsd(a, b, bin_edges) -> float:
    return js_divergence(histogram(a, bin_edges).normalized, histogram(b, bin_edges).normalized)


@dataclass(frozen=True)
class MomentReport:
    mean: float
    std_dev: float
    skewness: float
    kurtosis: float  # excess (Fisher)

    def as_row(self):
        return (self.mean, self.std_dev, self.skewness, self.kurtosis)


def moment_report(data) -> MomentReport:
    """Mean, sample std (ddof=1), g1 skewness and excess kurtosis.

    Kurtosis is reported as NaN for fewer than four values.
    """
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 2:
        raise ConfigurationError("moment_report needs at least 2 values")
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d ** 2)
    m3 = np.mean(d ** 3)
    m4 = np.mean(d ** 4)
    std = float(np.sqrt(np.sum(d ** 2) / (x.size - 1)))
    if m2 == 0:
        return MomentReport(float(mean), std, 0.0, 0.0)
    kurt = float(m4 / m2 ** 2 - 3.0) if x.size >= 4 else float("nan")
    return MomentReport(float(mean), std, float(m3 / m2 ** 1.5), kurt)


def log_transform_view(data, epsilon_floor=1e-9) -> np.ndarray:
    if epsilon_floor <= 0:
        raise ConfigurationError("epsilon_floor must be positive")
    return np.log(np.maximum(np.asarray(data, dtype=float), epsilon_floor))
