"""Gaze log ingestion and velocity preprocessing.

Pipeline: gaze positions -> velocity -> windowed mean -> MinMax scaling ->
uniform discretization into ``2**N`` levels -> fixed-length sequences.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, DataError, DegenerateDataError, SchemaError

GAZE_COLUMNS = ("t", "x_left", "y_left", "x_right", "y_right")
DEFAULT_SAMPLE_RATE = 200.0


@dataclass(frozen=True)
class GazeRecord:
    t: float
    x_left: float = math.nan
    y_left: float = math.nan
    x_right: float = math.nan
    y_right: float = math.nan

    def position(self, eye):
        if eye == "left":
            return self.x_left, self.y_left
        return self.x_right, self.y_right


@dataclass(frozen=True)
class VelocitySeries:
    values: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE
    scaled: bool = False
    scale_min: float | None = None
    scale_max: float | None = None

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class DiscreteSeries:
    indices: np.ndarray
    levels: int

    @property
    def bin_centers(self) -> np.ndarray:
        return bin_centers(self.levels)

    @property
    def values(self) -> np.ndarray:
        return self.bin_centers[self.indices]

    def __len__(self):
        return len(self.indices)


def bin_centers(levels: int) -> np.ndarray:
    return (np.arange(levels) + 0.5) / levels


def _parse_field(text, line_no, column):
    text = text.strip()
    if text == "":
        return math.nan
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line_no}: cannot parse {column}={text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {line_no}: non-finite {column}={text!r}")
    return value


def load_gaze_csv(path) -> list[GazeRecord]:
    """Read a ``t,x_left,y_left,x_right,y_right`` CSV; empty fields are missing."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [c for c in GAZE_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
        cols = [header.index(c) for c in GAZE_COLUMNS]
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}")
            vals = [_parse_field(row[c], line_no, name) for c, name in zip(cols, GAZE_COLUMNS)]
            if math.isnan(vals[0]):
                raise DataError(f"{path}: line {line_no}: missing timestamp")
            if records and vals[0] < records[-1].t:
                raise DataError(f"{path}: line {line_no}: timestamp {vals[0]} is out of order")
            records.append(GazeRecord(*vals))
    if not records:
        raise DataError(f"{path}: no data rows")
    return records


def compute_velocity(records, eye="left", dt=1.0 / DEFAULT_SAMPLE_RATE) -> VelocitySeries:
    """Euclidean displacement between consecutive samples divided by ``dt``.

    A sample with a missing coordinate breaks the series; no velocity is
    computed across it.
    """
    if eye not in ("left", "right"):
        raise ConfigurationError(f"eye must be 'left' or 'right', got {eye!r}")
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    pos = np.array([r.position(eye) for r in records], dtype=float).reshape(-1, 2)
    present = ~np.isnan(pos).any(axis=1)
    if present.sum() < 2:
        raise DataError(f"fewer than 2 usable {eye}-eye samples")
    valid = present[:-1] & present[1:]
    step = np.diff(pos, axis=0)[valid]
    if step.shape[0] == 0:
        raise DataError(f"no consecutive {eye}-eye sample pairs")
    return VelocitySeries(np.hypot(step[:, 0], step[:, 1]) / dt, sample_rate=1.0 / dt)


def resample_mean(series: VelocitySeries, interval=10.0) -> VelocitySeries:
    """Average consecutive non-overlapping windows of ``interval`` seconds.

    A trailing partial window is averaged and kept.
    """
    if interval <= 0:
        raise ConfigurationError("resample interval must be positive")
    window = int(math.floor(interval * series.sample_rate + 1e-9))
    if window <= 1:
        return series
    v = np.asarray(series.values, dtype=float)
    n_win = -(-v.size // window)
    means = np.array([v[i * window:(i + 1) * window].mean() for i in range(n_win)])
    return replace(series, values=means, sample_rate=series.sample_rate / window)


def minmax_scale(series: VelocitySeries) -> VelocitySeries:
    v = np.asarray(series.values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        raise DegenerateDataError("cannot MinMax-scale a constant series")
    return replace(series, values=(v - lo) / (hi - lo), scaled=True, scale_min=lo, scale_max=hi)


def inverse_scale(series: VelocitySeries) -> VelocitySeries:
    if not series.scaled:
        raise ConfigurationError("series is not scaled")
    v = np.asarray(series.values) * (series.scale_max - series.scale_min) + series.scale_min
    return replace(series, values=v, scaled=False, scale_min=None, scale_max=None)


def discretize(series, levels=8) -> DiscreteSeries:
    """Map scaled values to ``levels`` uniform bins of [0, 1]; 1.0 joins the top bin."""
    if isinstance(series, VelocitySeries):
        if not series.scaled:
            raise ConfigurationError("discretize needs a MinMax-scaled series")
        x = np.asarray(series.values, dtype=float)
    else:
        x = np.asarray(series, dtype=float)
    if levels < 2 or levels & (levels - 1):
        raise ConfigurationError(f"levels must be a power of two >= 2, got {levels}")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ConfigurationError("values must lie in [0, 1] before discretization")
    idx = np.minimum(np.floor(x * levels).astype(np.int64), levels - 1)
    return DiscreteSeries(idx, int(levels))


def make_sequences(values, length=100, stride=None) -> np.ndarray:
    """Windows ``[i*stride, i*stride + length)``; the trailing remainder is dropped."""
    v = np.asarray(getattr(values, "values", values), dtype=float)
    stride = length if stride is None else stride
    if length < 1 or stride < 1:
        raise ConfigurationError("length and stride must be >= 1")
    if v.size < length:
        raise DataError(f"series of length {v.size} is shorter than sequence length {length}")
    count = (v.size - length) // stride + 1
    starts = np.arange(count) * stride
    return v[starts[:, None] + np.arange(length)[None, :]]


def synth_heavytail(n, seed, mu=-3.0, sigma=1.2, phi=0.7) -> VelocitySeries:
    """Positive heavy-tailed series: ``exp(mu + sigma * z)`` with AR(1) ``z``.

    ``z`` has unit stationary variance, so each value is lognormal(mu, sigma).
    """
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(n)
    z = np.empty(n)
    z[0] = eps[0]
    innov = math.sqrt(1.0 - phi * phi)
    for i in range(1, n):
        z[i] = phi * z[i - 1] + innov * eps[i]
    return VelocitySeries(np.exp(mu + sigma * z))
