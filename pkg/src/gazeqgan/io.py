"""Plain-text file formats: checkpoints, transition matrices, series and logs.

All files are UTF-8 with LF line endings. Floats in checkpoints are written
with 17 significant digits so they round-trip bit-exactly.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .discriminator import DiscriminatorConfig, DiscriminatorParams
from .exceptions import ConfigurationError, ParseError
from .generator import AnsatzConfig
from .markov import TransitionMatrix

GEN_HEADER = "n_qubits,layers"
DISC_HEADER = "architecture,input_length,hidden_size,num_recurrent_layers,bidirectional,dropout_rate,mlp_hidden"


def fmt17(x) -> str:
    return format(float(x), ".17g")


def fmt(x, digits) -> str:
    return format(float(x), f".{digits}g")


def _write_lines(path, lines):
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _read_lines(path):
    return Path(path).read_text(encoding="utf-8").splitlines()


def _parse_floats(lines, start, count, path, section):
    body = lines[start:start + count]
    if len(body) < count:
        raise ParseError(
            f"{path}: truncated {section} section, expected {count} values, found {len(body)}",
            line=start + len(body) + 1,
        )
    out = np.empty(count)
    for k, text in enumerate(body):
        try:
            out[k] = float(text)
        except ValueError:
            raise ParseError(f"{path}: bad {section} value {text!r}", line=start + k + 1) from None
    extra = [ln for ln in lines[start + count:] if ln.strip()]
    if extra:
        raise ParseError(f"{path}: unexpected trailing content", line=start + count + 1)
    return out


def _header(lines, expected, path):
    if not lines:
        raise ParseError(f"{path}: empty file, missing header section", line=1)
    if lines[0].strip() != expected:
        raise ParseError(f"{path}: expected header {expected!r}", line=1)
    if len(lines) < 2:
        raise ParseError(f"{path}: missing config section", line=2)
    return lines[1].split(",")


def write_generator(path, config: AnsatzConfig, theta):
    theta = np.asarray(theta, dtype=float)
    _write_lines(path, [GEN_HEADER, f"{config.n_qubits},{config.layers}", *map(fmt17, theta)])


def read_generator(path, expected: AnsatzConfig | None = None):
    lines = _read_lines(path)
    fields = _header(lines, GEN_HEADER, path)
    try:
        config = AnsatzConfig(int(fields[0]), int(fields[1]))
    except (ValueError, IndexError):
        raise ParseError(f"{path}: malformed config line {lines[1]!r}", line=2) from None
    if expected is not None and expected != config:
        raise ConfigurationError(f"{path}: checkpoint holds {config}, expected {expected}")
    theta = _parse_floats(lines, 2, config.parameter_count(), path, "angles")
    return config, theta


def _disc_config_line(c: DiscriminatorConfig):
    return ",".join([
        c.architecture, str(c.input_length), str(c.hidden_size), str(c.num_recurrent_layers),
        "1" if c.bidirectional else "0", fmt17(c.dropout_rate), ";".join(map(str, c.mlp_hidden)),
    ])


def write_discriminator(path, params: DiscriminatorParams):
    _write_lines(path, [DISC_HEADER, _disc_config_line(params.config), *map(fmt17, params.values)])


def read_discriminator(path, expected: DiscriminatorConfig | None = None) -> DiscriminatorParams:
    lines = _read_lines(path)
    f = _header(lines, DISC_HEADER, path)
    try:
        config = DiscriminatorConfig(
            architecture=f[0], input_length=int(f[1]), hidden_size=int(f[2]),
            num_recurrent_layers=int(f[3]), bidirectional=f[4] == "1",
            dropout_rate=float(f[5]), mlp_hidden=tuple(int(w) for w in f[6].split(";")),
        )
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed config line ({exc})", line=2) from None
    if expected is not None and expected != config:
        raise ConfigurationError(f"{path}: checkpoint holds {config}, expected {expected}")
    values = _parse_floats(lines, 2, config.parameter_count(), path, "weights")
    return DiscriminatorParams(config, values)


def write_transition_matrix(path, tm: TransitionMatrix):
    lines = [str(tm.n_states), ",".join(fmt(e, 12) for e in tm.bin_edges)]
    lines += [",".join(fmt(p, 12) for p in row) for row in tm.matrix]
    _write_lines(path, lines)


def read_transition_matrix(path) -> TransitionMatrix:
    lines = [ln for ln in _read_lines(path) if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty file", line=1)
    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f"{path}: first line must be n_states", line=1) from None
    if len(lines) < n + 2:
        raise ParseError(f"{path}: truncated matrix, expected {n} rows", line=len(lines) + 1)
    try:
        edges = np.array([float(v) for v in lines[1].split(",")])
        mat = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:n + 2]])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    # 12 significant digits leave rows off by ~1e-12; renormalise
    mat = mat / mat.sum(axis=1, keepdims=True)
    return TransitionMatrix(edges, mat)


def write_columns(path, header, columns, digits=12):
    """Write equal-length columns as CSV; integer columns stay integers."""
    rows = []
    for vals in zip(*columns):
        cells = []
        for v in vals:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(fmt(v, digits))
        rows.append(",".join(cells))
    _write_lines(path, [",".join(header), *rows])


def read_columns(path):
    """Read a headed CSV into a dict of column name -> list of strings."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file", line=1)
        cols = {h: [] for h in header}
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"{path}: expected {len(header)} fields", line=line_no)
            for h, cell in zip(header, row):
                cols[h].append(cell)
    return cols


def read_series(path, column="value"):
    cols = read_columns(path)
    if column not in cols:
        raise ParseError(f"{path}: no {column!r} column")
    try:
        return np.array([float(v) for v in cols[column]])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
