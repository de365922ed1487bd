"""Command-line entry point.

Subcommands: ingest, train-qgan, fit-markov, generate, evaluate. Every command
writes its effective configuration to ``<out-dir>/config.txt``. Exit codes:
0 success, 1 runtime or numeric error, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import data, io, metrics, trainer
from .config import SCHEMA, RunConfig, read_config_file
from .discriminator import DiscriminatorConfig
from .estimators import MarkovChainGenerator
from .exceptions import (
    ConfigurationError, DataError, DomainError, NumericError, ParseError, ShapeError, TapeStateError,
)
from .generator import AnsatzConfig, output_distribution
from .markov import generate_series
from .seeding import substream
from .statevector import sample_outcomes

log = logging.getLogger("gazeqgan")

REPORT_NOTE = "# natural logarithm; kurtosis is excess (Fisher)"
RUNTIME_ERRORS = (DataError, ParseError, NumericError, DomainError, ShapeError, TapeStateError)


class UsageError(Exception):
    pass


def _require_file(path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(2, "no such file", str(p))
    return p


def _out_dir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_series(path, values, column="value"):
    values = np.asarray(values)
    io.write_columns(path, ["index", column], [range(values.size), values.tolist()])


# ---------------------------------------------------------------- ingest

def cmd_ingest(args, cfg):
    src = _require_file(args.input)
    records = data.load_gaze_csv(src)
    eyes = ["left", "right"] if cfg["eye"] == "both" else [cfg["eye"]]
    raw, resampled = [], []
    for eye in eyes:
        vel = data.compute_velocity(records, eye, cfg["dt"])
        raw.append(vel.values)
        resampled.append(data.resample_mean(vel, cfg["resample_interval"]).values)
    velocity = np.concatenate(raw)
    scaled = data.minmax_scale(data.VelocitySeries(np.concatenate(resampled)))

    out = _out_dir(args)
    _write_series(out / "velocity.csv", velocity)
    _write_series(out / "scaled.csv", scaled.values)
    for n in cfg["qubits"]:
        ds = data.discretize(scaled, 2 ** n)
        _write_series(out / f"discrete_q{n}.csv", ds.indices, column="level")
    provenance = {
        "input": str(args.input),
        "input_sha256": hashlib.sha256(src.read_bytes()).hexdigest(),
        "eyes": eyes,
        "scale_min": scaled.scale_min,
        "scale_max": scaled.scale_max,
        "n_velocity": int(velocity.size),
        "n_scaled": int(scaled.values.size),
        "config": dict(cfg.raw),
    }
    (out / "provenance.json").write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8", newline="\n")
    cfg.write(out)
    log.info("ingested %d records into %s", len(records), out)


# ---------------------------------------------------------------- train-qgan

def _disc_config(cfg):
    return DiscriminatorConfig(
        architecture=cfg["disc_arch"], input_length=cfg["seq_len"], hidden_size=cfg["hidden_size"],
        num_recurrent_layers=cfg["recurrent_layers"], bidirectional=cfg["bidirectional"],
        dropout_rate=cfg["dropout"], mlp_hidden=tuple(cfg["mlp_hidden"]),
    )


def _training_config(cfg):
    return trainer.TrainingConfig(
        epochs=cfg["epochs"], batch_size=cfg["batch_size"], seed=cfg["seed"],
        disc_updates_per_batch=cfg["disc_updates"], gen_updates_per_batch=cfg["gen_updates"],
        penalty_weight=cfg["penalty_weight"], gen_lr=cfg["lr"], disc_lr=cfg["lr"],
        beta1=cfg["beta1"], beta2=cfg["beta2"], record_wall_time=cfg["record_wall_time"],
    )


def _read_scaled(path):
    values = io.read_series(_require_file(path))
    if values.size == 0:
        raise DataError(f"{path}: no values")
    if values.min() < 0 or values.max() > 1:
        raise DataError(f"{path}: values must be MinMax-scaled into [0, 1]")
    return values


def write_distribution(path, probs):
    levels = probs.size
    edges = metrics.uniform_edges(levels)
    io.write_columns(
        path, ["state", "bin_left", "bin_right", "probability"],
        [range(levels), edges[:-1].tolist(), edges[1:].tolist(), probs.tolist()], digits=17,
    )


def write_jsd_report(path, rows):
    lines = [REPORT_NOTE, "model_label,qubits,layers,jsd"]
    lines += [f"{label},{q},{l},{io.fmt(j, 12)}" for label, q, l, j in rows]
    io._write_lines(path, lines)


def run_dir_name(n_qubits, layers):
    return f"q{n_qubits}_l{layers}"


def cmd_train_qgan(args, cfg):
    values = _read_scaled(args.data)
    # validate every grid point before any compute
    grid = [AnsatzConfig(n, l) for n in cfg["qubits"] for l in cfg["layers"]]
    disc_cfg = _disc_config(cfg)
    train_cfg = _training_config(cfg)
    if disc_cfg.input_length > 1 and values.size < disc_cfg.input_length:
        raise ConfigurationError("data is shorter than one discriminator sequence")

    out = _out_dir(args)
    cfg.write(out)
    summary = []
    for gen_cfg in grid:
        ds = data.discretize(values, gen_cfg.levels)
        target = np.bincount(ds.indices, minlength=gen_cfg.levels) / len(ds)
        log.info("training %s", gen_cfg)
        result = trainer.train(gen_cfg, disc_cfg, train_cfg, ds, target)
        run = out / run_dir_name(gen_cfg.n_qubits, gen_cfg.layers)
        trainer.checkpoint(gen_cfg, result.theta, result.disc_params, run)
        result.log.write_csv(run / "training_log.csv")
        probs = output_distribution(gen_cfg, result.theta)
        write_distribution(run / "distribution.csv", probs)
        jsd = metrics.js_divergence(target, probs)
        row = ("qgan", gen_cfg.n_qubits, gen_cfg.layers, jsd)
        write_jsd_report(run / "report_jsd.csv", [row])
        cfg.write(run)
        summary.append(row)
    write_jsd_report(out / "report_jsd.csv", summary)


# ---------------------------------------------------------------- fit-markov

def cmd_fit_markov(args, cfg):
    values = io.read_series(_require_file(args.data))
    if cfg["states"] < 2:
        raise ConfigurationError("states must be >= 2")
    if cfg["length"] < 1:
        raise ConfigurationError("length must be >= 1")
    model = MarkovChainGenerator(
        n_states=cfg["states"], bandwidth=cfg["bandwidth"], conditioning=cfg["conditioning"]
    ).fit(values)
    chain = model.sample_states(cfg["length"], cfg["start_state"], substream(cfg["seed"], "markov"))
    out = _out_dir(args)
    io.write_transition_matrix(out / "transition_matrix.csv", model.transition_matrix_)
    io.write_columns(out / "generated.csv", ["index", "state", "value"],
                     [range(chain.states.size), chain.states.tolist(), chain.values.tolist()])
    cfg.write(out)


# ---------------------------------------------------------------- generate

def cmd_generate(args, cfg):
    model = Path(args.model)
    rng = substream(cfg["seed"], "generate")
    if (model / "generator.csv").is_file():
        gen_cfg, theta = io.read_generator(model / "generator.csv")
        probs = output_distribution(gen_cfg, theta)
        states = sample_outcomes(probs, cfg["count"], rng)
        values = data.bin_centers(gen_cfg.levels)[states]
    elif (model / "transition_matrix.csv").is_file():
        tm = io.read_transition_matrix(model / "transition_matrix.csv")
        start = 0 if cfg["start_state"] is None else cfg["start_state"]
        chain = generate_series(tm, start, cfg["count"], rng)
        states, values = chain.states, chain.values
    else:
        raise FileNotFoundError(2, "no generator.csv or transition_matrix.csv in run directory", str(model))
    out = _out_dir(args)
    io.write_columns(out / "samples.csv", ["index", "state", "value"],
                     [range(states.size), states.tolist(), values.tolist()])
    cfg.write(out)


# ---------------------------------------------------------------- evaluate

def _write_histogram(path, label, hist):
    probs = hist.normalized if not hist.empty else np.zeros(hist.counts.size)
    e = hist.bin_edges
    io.write_columns(path, ["label", "bin_left", "bin_right", "count", "probability"],
                     [[label] * probs.size, e[:-1].tolist(), e[1:].tolist(), hist.counts.tolist(), probs.tolist()])


def _label_path(text):
    if "=" not in text:
        raise ConfigurationError(f"--series expects LABEL=PATH, got {text!r}")
    label, path = text.split("=", 1)
    if not label or any(c in label for c in ",/\\"):
        raise ConfigurationError(f"bad series label {label!r}")
    return label, path


def qgan_jsd(real_values, probs):
    """JSD between real data binned into the generator's levels and its distribution."""
    edges = metrics.uniform_edges(probs.size)
    return metrics.js_divergence(metrics.histogram(real_values, edges).normalized, probs)


def cmd_evaluate(args, cfg):
    real = _read_scaled(args.real)
    bins = cfg["bins"]
    rng = substream(cfg["seed"], "evaluate")
    series = [("real", real)]
    jsd_rows = []

    qgan_runs = []
    for run in args.qgan_run or []:
        gen_cfg, theta = io.read_generator(_require_file(Path(run) / "generator.csv"))
        if bins is not None and bins != gen_cfg.levels:
            raise ConfigurationError(
                f"{run}: generator has {gen_cfg.levels} levels but --bins is {bins}"
            )
        qgan_runs.append((gen_cfg, theta))
    # (label, values, bin edges or None for the shared default)
    others = []
    for run in args.markov_run or []:
        tm = io.read_transition_matrix(_require_file(Path(run) / "transition_matrix.csv"))
        if bins is not None and bins != tm.n_states:
            raise ConfigurationError(
                f"{run}: Markov model has {tm.n_states} states but --bins is {bins}"
            )
        values = io.read_series(_require_file(Path(run) / "generated.csv"))
        others.append(("markov", values, tm.bin_edges))
    for spec in args.series or []:
        label, path = _label_path(spec)
        others.append((label, io.read_series(_require_file(path)), None))
    if not qgan_runs and not others:
        raise ConfigurationError("evaluate needs at least one model output to compare")

    for gen_cfg, theta in qgan_runs:
        probs = output_distribution(gen_cfg, theta)
        jsd_rows.append(("qgan", gen_cfg.n_qubits, gen_cfg.layers, qgan_jsd(real, probs)))
        draws = data.bin_centers(gen_cfg.levels)[sample_outcomes(probs, cfg["count"], rng)]
        series.append((f"qgan_{run_dir_name(gen_cfg.n_qubits, gen_cfg.layers)}", draws))
    for label, values, edges in others:
        if edges is None:
            edges = metrics.uniform_edges(bins) if bins is not None else metrics.pooled_edges(real, values)
        jsd_rows.append((label, "-", "-", metrics.histogram_jsd(real, values, edges)))
        series.append((label, values))

    labels = [label for label, _ in series]
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"duplicate series labels: {labels}")

    out = _out_dir(args)
    lines = [REPORT_NOTE, "series_label,mean,std,skewness,kurtosis_excess"]
    for label, values in series:
        mr = metrics.moment_report(values)
        lines.append(",".join([label] + [io.fmt(v, 12) for v in mr.as_row()]))
    io._write_lines(out / "report_moments.csv", lines)
    write_jsd_report(out / "report_jsd.csv", jsd_rows)

    floor = cfg["log_floor"]
    lin_edges = metrics.uniform_edges(bins) if bins is not None else metrics.pooled_edges(*[v for _, v in series])
    log_edges = metrics.pooled_edges(*[metrics.log_transform_view(v, floor) for _, v in series])
    for label, values in series:
        _write_histogram(out / f"hist_{label}.csv", label, metrics.histogram(values, lin_edges))
        _write_histogram(out / f"hist_{label}_log.csv", f"{label}_log",
                         metrics.histogram(metrics.log_transform_view(values, floor), log_edges))
    cfg.write(out)


# ---------------------------------------------------------------- parser

COMMANDS = {
    "ingest": cmd_ingest,
    "train-qgan": cmd_train_qgan,
    "fit-markov": cmd_fit_markov,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
}


def _add_common(p):
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--config", help="key = value config file; command-line flags win")
    p.add_argument("-v", "--verbose", action="store_true")
    for key, (_, default, help_text) in SCHEMA.items():
        p.add_argument("--" + key.replace("_", "-"), dest=f"cfg_{key}", metavar="VALUE",
                       help=f"{help_text} (default: {default})")


def build_parser():
    parser = argparse.ArgumentParser(prog="gazeqgan", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="gaze CSV -> velocity, scaled and discrete series")
    p.add_argument("input", help="CSV with columns t,x_left,y_left,x_right,y_right")
    _add_common(p)

    p = sub.add_parser("train-qgan", help="train QGANs over the qubit/layer grid")
    p.add_argument("--data", required=True, help="scaled series CSV (index,value)")
    _add_common(p)

    p = sub.add_parser("fit-markov", help="fit the Markov baseline and generate a series")
    p.add_argument("--data", required=True, help="series CSV (index,value)")
    _add_common(p)

    p = sub.add_parser("generate", help="sample from a trained QGAN or Markov run directory")
    p.add_argument("--model", required=True, help="run directory")
    _add_common(p)

    p = sub.add_parser("evaluate", help="moment and JSD reports plus histogram dumps")
    p.add_argument("--real", required=True, help="scaled real series CSV")
    p.add_argument("--qgan-run", nargs="+", help="QGAN run directories")
    p.add_argument("--markov-run", nargs="+", help="fit-markov output directories")
    p.add_argument("--series", nargs="+", help="extra LABEL=PATH series CSVs")
    _add_common(p)
    return parser


def load_run_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg.update(read_config_file(_require_file(args.config)), source=args.config)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    return cfg.update(overrides, source="command line")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_run_config(args)
        COMMANDS[args.command](args, cfg)
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
