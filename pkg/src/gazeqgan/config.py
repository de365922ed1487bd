"""Flat key-value run configuration.

File format: one ``key = value`` per line, ``#`` starts a comment. Unknown keys
are rejected. Command-line values override file values.
"""
from __future__ import annotations

from pathlib import Path

from .exceptions import ConfigurationError


def parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_int_list(text):
    """``"3,4"`` -> [3, 4]; ``"1..5"`` -> [1, 2, 3, 4, 5]; mixtures allowed."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("empty list")
    return out


def parse_optional_int(text):
    t = str(text).strip().lower()
    return None if t in ("auto", "none", "") else int(t)


def parse_optional_float(text):
    t = str(text).strip().lower()
    return None if t in ("auto", "none", "") else float(t)


def parse_choice(*choices):
    def parse(text):
        t = str(text).strip()
        if t not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {t!r}")
        return t
    return parse


# key -> (parser, default text, help)
SCHEMA = {
    "qubits": (parse_int_list, "3,4", "generator qubit counts, e.g. 3,4"),
    "layers": (parse_int_list, "1..5", "ansatz depths, e.g. 1..5"),
    "epochs": (int, "300", "training epochs"),
    "batch_size": (int, "500", "discriminator inputs per batch"),
    "seq_len": (parse_optional_int, "auto", "discriminator input length (auto: 1 for mlp, 100 for lstm)"),
    "disc_arch": (parse_choice("mlp", "lstm"), "mlp", "discriminator architecture"),
    "hidden_size": (int, "128", "LSTM hidden units"),
    "recurrent_layers": (int, "3", "stacked LSTM layers"),
    "bidirectional": (parse_bool, "true", "bidirectional LSTM"),
    "dropout": (float, "0.3", "dropout after the first linear layer"),
    "mlp_hidden": (parse_int_list, "64,32", "MLP hidden widths"),
    "penalty_weight": (float, "0.0", "gradient penalty weight (0 disables)"),
    "lr": (float, "0.002", "AMSGrad learning rate for both networks"),
    "beta1": (float, "0.9", "AMSGrad first-moment decay"),
    "beta2": (float, "0.999", "AMSGrad second-moment decay"),
    "disc_updates": (int, "1", "discriminator steps per batch"),
    "gen_updates": (int, "1", "generator steps per batch"),
    "seed": (int, "0", "master random seed"),
    "record_wall_time": (parse_bool, "false", "write real timings into training logs"),
    "states": (int, "8", "Markov states"),
    "bandwidth": (parse_optional_float, "auto", "KDE bandwidth (auto: Silverman)"),
    "conditioning": (parse_choice("bin", "midpoint"), "bin", "how transition rows condition on the current state"),
    "length": (int, "100000", "generated Markov series length"),
    "start_state": (parse_optional_int, "auto", "Markov start state (auto: state of the first sample)"),
    "count": (int, "10000", "samples drawn by generate/evaluate"),
    "resample_interval": (float, "10.0", "resampling window in seconds"),
    "dt": (float, "0.005", "gaze sampling interval in seconds"),
    "eye": (parse_choice("left", "right", "both"), "left", "which eye to ingest"),
    "bins": (parse_optional_int, "auto", "shared histogram bins for JSD (auto: per-model rule)"),
    "log_floor": (float, "1e-9", "floor applied before the log-transformed view"),
}


class RunConfig:
    """Effective configuration: defaults, then file values, then overrides."""

    def __init__(self, raw=None):
        self.raw = {k: default for k, (_, default, _) in SCHEMA.items()}
        self.values = {}
        if raw:
            self.update(raw)
        else:
            self._parse_all()

    def update(self, raw, source="override"):
        for key, text in raw.items():
            key = key.replace("-", "_")
            if key not in SCHEMA:
                raise ConfigurationError(f"{source}: unknown config key {key!r}")
            self.raw[key] = str(text).strip()
        self._parse_all()
        return self

    def _parse_all(self):
        for key, (parser, _, _) in SCHEMA.items():
            try:
                self.values[key] = parser(self.raw[key])
            except (ValueError, TypeError) as exc:
                raise ConfigurationError(f"bad value for {key}: {exc}") from None

    def __getitem__(self, key):
        return self.values[key]

    def dump(self) -> str:
        return "".join(f"{k} = {self.raw[k]}\n" for k in SCHEMA)

    def write(self, out_dir):
        path = Path(out_dir) / "config.txt"
        path.write_text(self.dump(), encoding="utf-8", newline="\n")
        return path


def read_config_file(path) -> dict:
    raw = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}: line {line_no}: expected 'key = value'")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw
