import json

import numpy as np
import pytest

from gazeqgan import io, metrics
from gazeqgan.cli import main
from gazeqgan.data import minmax_scale, synth_heavytail

HEADER = "t,x_left,y_left,x_right,y_right\n"


@pytest.fixture
def gaze_csv(tmp_path):
    rng = np.random.default_rng(1)
    steps = rng.standard_t(3, size=(3000, 2)) * 0.01
    pos = np.cumsum(steps, axis=0)
    lines = [f"{k * 0.005:.3f},{x:.6f},{y:.6f},{x:.6f},{y:.6f}" for k, (x, y) in enumerate(pos)]
    path = tmp_path / "gaze.csv"
    path.write_text(HEADER + "\n".join(lines) + "\n")
    return path


@pytest.fixture
def scaled_csv(tmp_path):
    x = minmax_scale(synth_heavytail(600, seed=2)).values
    path = tmp_path / "scaled.csv"
    io.write_columns(path, ["index", "value"], [range(x.size), x.tolist()])
    return path


def files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_ingest_three_row_fixture(tmp_path):
    src = tmp_path / "tiny.csv"
    src.write_text(HEADER + "0,0,0,0,0\n0.005,0.1,0,0.1,0\n0.010,0.1,0.2,0.1,0.2\n")
    out = tmp_path / "out"
    assert main(["ingest", str(src), "--out-dir", str(out), "--resample-interval", "0.005"]) == 0
    assert (out / "velocity.csv").read_text().splitlines()[1:] == ["0,20", "1,40"]
    prov = json.loads((out / "provenance.json").read_text())
    assert len(prov["input_sha256"]) == 64
    assert "resample_interval = 0.005" in (out / "config.txt").read_text()


def test_ingest_missing_file_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["ingest", str(missing), "--out-dir", str(tmp_path / "o")]) == 2
    assert str(missing) in capsys.readouterr().err


def test_ingest_bad_row_is_runtime_error(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text(HEADER + "0,0,0,0,0\n0.005,x,0,0,0\n")
    assert main(["ingest", str(src), "--out-dir", str(tmp_path / "o")]) == 1
    assert "line 3" in capsys.readouterr().err


def test_ingest_is_byte_identical(gaze_csv, tmp_path):
    args = ["ingest", str(gaze_csv), "--resample-interval", "0.05", "--qubits", "3,4"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    a = files(tmp_path / "a")
    assert set(a) >= {"velocity.csv", "scaled.csv", "discrete_q3.csv", "discrete_q4.csv",
                      "provenance.json", "config.txt"}
    assert a == files(tmp_path / "b")


def test_usage_errors_exit_2(tmp_path, scaled_csv):
    with pytest.raises(SystemExit) as info:
        main(["train-qgan"])
    assert info.value.code == 2
    assert main(["train-qgan", "--data", str(scaled_csv), "--out-dir", str(tmp_path), "--epochs", "x"]) == 2
    assert main(["fit-markov", "--data", str(scaled_csv), "--out-dir", str(tmp_path), "--states", "1"]) == 2
    cfg = tmp_path / "run.cfg"
    cfg.write_text("epochs = 2\nnot_a_key = 1\n")
    assert main(["fit-markov", "--data", str(scaled_csv), "--out-dir", str(tmp_path), "--config", str(cfg)]) == 2


def test_config_file_and_override(tmp_path, scaled_csv):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# baseline\nstates = 4\nlength = 50\n")
    out = tmp_path / "m"
    assert main(["fit-markov", "--data", str(scaled_csv), "--out-dir", str(out),
                 "--config", str(cfg), "--length", "30"]) == 0
    assert len((out / "generated.csv").read_text().splitlines()) == 31
    assert io.read_transition_matrix(out / "transition_matrix.csv").n_states == 4
    text = (out / "config.txt").read_text()
    assert "states = 4\n" in text and "length = 30\n" in text


def train_args(data, out, *extra):
    return ["train-qgan", "--data", str(data), "--out-dir", str(out), "--qubits", "3",
            "--layers", "1", "--epochs", "2", "--batch-size", "200", *extra]


def test_train_qgan_outputs_and_determinism(tmp_path, scaled_csv):
    assert main(train_args(scaled_csv, tmp_path / "a")) == 0
    assert main(train_args(scaled_csv, tmp_path / "b")) == 0
    run = tmp_path / "a" / "q3_l1"
    for name in ("generator.csv", "discriminator.csv", "training_log.csv", "distribution.csv",
                 "report_jsd.csv", "config.txt"):
        assert (run / name).is_file()
    log = io.read_columns(run / "training_log.csv")
    assert log["epoch"] == ["1", "2"]
    assert all(np.isfinite(float(v)) for v in log["gen_loss"] + log["disc_loss"] + log["jsd"])
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_train_qgan_grid_directories(tmp_path, scaled_csv):
    args = train_args(scaled_csv, tmp_path / "g", "--qubits", "1,2", "--layers", "0..4", "--epochs", "1")
    assert main(args) == 0
    dirs = sorted(p.name for p in (tmp_path / "g").iterdir() if p.is_dir())
    assert len(dirs) == 10 and "q2_l4" in dirs
    rows = io.read_columns(tmp_path / "g" / "report_jsd.csv")
    assert len(rows["jsd"]) == 10


def test_fit_markov_and_generate_determinism(tmp_path, scaled_csv):
    for name in ("a", "b"):
        assert main(["fit-markov", "--data", str(scaled_csv), "--out-dir", str(tmp_path / name),
                     "--states", "8", "--length", "500", "--seed", "4"]) == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")
    tm = io.read_transition_matrix(tmp_path / "a" / "transition_matrix.csv")
    assert tm.matrix.shape == (8, 8)
    np.testing.assert_allclose(tm.matrix.sum(axis=1), 1.0)
    for name in ("s1", "s2"):
        assert main(["generate", "--model", str(tmp_path / "a"), "--out-dir", str(tmp_path / name),
                     "--count", "20"]) == 0
    assert files(tmp_path / "s1") == files(tmp_path / "s2")
    assert main(["generate", "--model", str(tmp_path / "empty"), "--out-dir", str(tmp_path / "x")]) == 2


def test_evaluate_reports(tmp_path, scaled_csv):
    assert main(train_args(scaled_csv, tmp_path / "q")) == 0
    assert main(["fit-markov", "--data", str(scaled_csv), "--out-dir", str(tmp_path / "m"),
                 "--length", "2000"]) == 0
    out = tmp_path / "ev"
    assert main(["evaluate", "--real", str(scaled_csv), "--qgan-run", str(tmp_path / "q" / "q3_l1"),
                 "--markov-run", str(tmp_path / "m"), "--series", f"self={scaled_csv}",
                 "--out-dir", str(out)]) == 0
    jsd_lines = (out / "report_jsd.csv").read_text().splitlines()
    assert jsd_lines[0].startswith("#") and jsd_lines[1] == "model_label,qubits,layers,jsd"
    rows = {ln.split(",")[0]: ln.split(",") for ln in jsd_lines[2:]}
    assert rows["markov"][1:3] == ["-", "-"]
    assert rows["self"][3] == "0"
    assert rows["qgan"][1:3] == ["3", "1"]

    # plumbing equality with the metrics module
    probs = np.array([float(v) for v in io.read_columns(tmp_path / "q" / "q3_l1" / "distribution.csv")["probability"]])
    real = io.read_series(scaled_csv)
    expected = metrics.js_divergence(metrics.histogram(real, metrics.uniform_edges(8)).normalized, probs)
    assert float(rows["qgan"][3]) == pytest.approx(expected, rel=1e-11)

    moments = io.read_columns(out / "report_moments.csv")
    assert moments["series_label"][0] == "real"
    assert (out / "hist_markov.csv").is_file() and (out / "hist_self_log.csv").is_file()
    hist = io.read_columns(out / "hist_real.csv")
    assert sum(int(c) for c in hist["count"]) == real.size


def test_evaluate_mismatched_bins(tmp_path, scaled_csv):
    assert main(train_args(scaled_csv, tmp_path / "q")) == 0
    assert main(["evaluate", "--real", str(scaled_csv), "--qgan-run", str(tmp_path / "q" / "q3_l1"),
                 "--bins", "16", "--out-dir", str(tmp_path / "ev")]) == 2
    assert main(["evaluate", "--real", str(scaled_csv), "--out-dir", str(tmp_path / "ev")]) == 2
