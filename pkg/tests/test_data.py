import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gazeqgan import data
from gazeqgan.exceptions import ConfigurationError, DataError, DegenerateDataError, SchemaError

HEADER = "t,x_left,y_left,x_right,y_right\n"


def write(tmp_path, text, name="gaze.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_three_row_fixture_gives_two_velocities(tmp_path):
    p = write(tmp_path, HEADER + "0,0,0,0,0\n0.005,3,4,0,0\n0.010,3,4,0,1\n")
    records = data.load_gaze_csv(p)
    assert len(records) == 3
    v = data.compute_velocity(records, "left", dt=0.005)
    np.testing.assert_allclose(v.values, [5 / 0.005, 0.0])
    np.testing.assert_allclose(data.compute_velocity(records, "right", dt=0.005).values, [0.0, 200.0])


def test_missing_samples_split_the_series(tmp_path):
    p = write(tmp_path, HEADER + "0,0,0,,\n1,1,0,,\n2,,,,\n3,5,0,,\n4,6,0,,\n")
    v = data.compute_velocity(data.load_gaze_csv(p), "left", dt=1.0)
    np.testing.assert_allclose(v.values, [1.0, 1.0])


def test_loader_errors_name_the_line(tmp_path):
    with pytest.raises(DataError, match="line 3"):
        data.load_gaze_csv(write(tmp_path, HEADER + "0,0,0,0,0\n1,abc,0,0,0\n"))
    with pytest.raises(DataError, match="line 3"):
        data.load_gaze_csv(write(tmp_path, HEADER + "1,0,0,0,0\n0,0,0,0,0\n"))
    with pytest.raises(SchemaError):
        data.load_gaze_csv(write(tmp_path, "t,x,y\n0,0,0\n"))
    with pytest.raises(DataError):
        data.load_gaze_csv(write(tmp_path, HEADER))


def test_velocity_needs_two_samples(tmp_path):
    with pytest.raises(DataError):
        data.compute_velocity(data.load_gaze_csv(write(tmp_path, HEADER + "0,1,1,1,1\n")))
    with pytest.raises(ConfigurationError):
        data.compute_velocity([], eye="both")


def test_resample_mean_windows_and_remainder():
    s = data.VelocitySeries(np.arange(7, dtype=float), sample_rate=2.0)
    out = data.resample_mean(s, interval=1.5)  # window of 3 samples
    np.testing.assert_allclose(out.values, [1.0, 4.0, 6.0])
    assert out.sample_rate == pytest.approx(2.0 / 3)
    assert data.resample_mean(s, interval=0.5) is s
    with pytest.raises(ConfigurationError):
        data.resample_mean(s, interval=0)


def test_minmax_scale_and_inverse():
    s = data.minmax_scale(data.VelocitySeries(np.array([2.0, 4.0, 3.0])))
    np.testing.assert_allclose(s.values, [0.0, 1.0, 0.5])
    np.testing.assert_allclose(data.inverse_scale(s).values, [2.0, 4.0, 3.0])
    with pytest.raises(DegenerateDataError):
        data.minmax_scale(data.VelocitySeries(np.ones(3)))


def test_discretize_edges():
    d = data.discretize(np.array([0.0, 0.124, 0.125, 0.999, 1.0]), 8)
    np.testing.assert_array_equal(d.indices, [0, 0, 1, 7, 7])
    np.testing.assert_allclose(d.values, [0.0625, 0.0625, 0.1875, 0.9375, 0.9375])
    with pytest.raises(ConfigurationError):
        data.discretize(np.array([0.5]), 6)
    with pytest.raises(ConfigurationError):
        data.discretize(np.array([1.5]), 8)
    with pytest.raises(ConfigurationError):
        data.discretize(data.VelocitySeries(np.array([0.5])), 8)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 50), elements=st.floats(0, 1)), st.sampled_from([2, 4, 8, 16]))
def test_discretize_bins_contain_values_property(x, levels):
    d = data.discretize(x, levels)
    lo, hi = d.indices / levels, (d.indices + 1) / levels
    assert np.all((x >= lo) & ((x < hi) | (x == 1.0)))


def test_make_sequences():
    seq = data.make_sequences(np.arange(10.0), length=4)
    np.testing.assert_array_equal(seq, [[0, 1, 2, 3], [4, 5, 6, 7]])
    assert data.make_sequences(np.arange(10.0), length=4, stride=2).shape == (4, 4)
    with pytest.raises(DataError):
        data.make_sequences(np.arange(3.0), length=4)


def test_synth_heavytail_marginal_is_lognormal():
    x = data.synth_heavytail(200_000, seed=1).values
    z = np.log(x)
    assert z.mean() == pytest.approx(-3.0, abs=0.03)
    assert z.std() == pytest.approx(1.2, abs=0.02)
    lag1 = np.corrcoef(z[:-1], z[1:])[0, 1]
    assert lag1 == pytest.approx(0.7, abs=0.01)


def test_synth_heavytail_is_seeded():
    np.testing.assert_array_equal(data.synth_heavytail(50, 3).values, data.synth_heavytail(50, 3).values)
    assert not np.array_equal(data.synth_heavytail(50, 3).values, data.synth_heavytail(50, 4).values)
