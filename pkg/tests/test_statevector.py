import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gazeqgan import statevector as sv
from gazeqgan.exceptions import ConfigurationError

from conftest import cx_operator, single_qubit_operator

RY = lambda t: np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]])
RZ = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def test_init_zero():
    s = sv.init_zero(3)
    assert s.dim == 8
    assert s.amplitudes[0] == 1 and np.count_nonzero(s.amplitudes) == 1


@pytest.mark.parametrize("n", [0, 21, 2.5])
def test_init_zero_rejects_bad_sizes(n):
    with pytest.raises(ConfigurationError):
        sv.init_zero(n)


def test_states_are_read_only():
    s = sv.init_zero(2)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_rotation_matrices_match_closed_forms():
    for t in np.linspace(-7, 7, 11):
        np.testing.assert_allclose(sv.rotation_matrix("Y", t), RY(t), atol=1e-15)
        np.testing.assert_allclose(sv.rotation_matrix("Z", t), RZ(t), atol=1e-15)
    with pytest.raises(ConfigurationError):
        sv.rotation_matrix("X", 0.1)


def test_ry_pi_on_qubit0_is_msb():
    s = sv.apply_rotation(sv.init_zero(3), "Y", 0, np.pi)
    p = sv.probabilities(s)
    assert p[4] == pytest.approx(1.0, abs=1e-15)


def test_bell_state():
    s = sv.apply_matrix(sv.init_zero(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), 0)
    s = sv.apply_cx(s, 0, 1)
    expected = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.max(np.abs(s.amplitudes - expected)) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_cx_truth_table(n):
    for control in range(n):
        for target in range(n):
            if control == target:
                continue
            for j in range(2 ** n):
                amps = np.zeros(2 ** n)
                amps[j] = 1
                out = sv.apply_cx(sv.StateVector(n, amps), control, target).amplitudes
                bits = [(j >> (n - 1 - q)) & 1 for q in range(n)]
                if bits[control]:
                    bits[target] ^= 1
                k = int("".join(map(str, bits)), 2)
                assert abs(out[k] - 1) < 1e-12 and np.sum(np.abs(out)) == pytest.approx(1, abs=1e-12)


def test_cx_errors():
    s = sv.init_zero(2)
    with pytest.raises(ConfigurationError):
        sv.apply_cx(s, 1, 1)
    with pytest.raises(IndexError):
        sv.apply_cx(s, 0, 2)
    with pytest.raises(IndexError):
        sv.apply_rotation(s, "Y", 5, 0.3)
    with pytest.raises(ConfigurationError):
        sv.apply_rotation(s, "Y", 0, np.nan)


def test_gates_match_dense_kronecker_oracle(rng):
    n = 4
    amps = rng.normal(size=16) + 1j * rng.normal(size=16)
    amps /= np.linalg.norm(amps)
    s = sv.StateVector(n, amps)
    for q in range(n):
        t = rng.uniform(-np.pi, np.pi)
        for axis, mat in (("Y", RY(t)), ("Z", RZ(t))):
            got = sv.apply_rotation(s, axis, q, t).amplitudes
            np.testing.assert_allclose(got, single_qubit_operator(mat, q, n) @ amps, atol=1e-13)
    for c in range(n):
        for t in range(n):
            if c != t:
                got = sv.apply_cx(s, c, t).amplitudes
                np.testing.assert_allclose(got, cx_operator(c, t, n) @ amps, atol=1e-15)


def test_norm_preserved_over_random_circuits(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        s = sv.init_zero(n)
        for _ in range(int(rng.integers(1, 12))):
            if n > 1 and rng.random() < 0.3:
                c, t = rng.choice(n, size=2, replace=False)
                s = sv.apply_cx(s, int(c), int(t))
            else:
                s = sv.apply_rotation(s, "YZ"[int(rng.integers(2))], int(rng.integers(n)),
                                      rng.uniform(-10, 10))
            worst = max(worst, abs(sv.probabilities(s).sum() - 1))
    assert worst < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.lists(st.floats(-20, 20), min_size=1, max_size=8))
def test_rotations_preserve_norm_property(n, angles):
    s = sv.init_zero(n)
    for k, a in enumerate(angles):
        s = sv.apply_rotation(s, "Y" if k % 2 == 0 else "Z", k % n, a)
    assert abs(np.sum(sv.probabilities(s)) - 1) < 1e-12


def test_sample_outcomes_frequencies(rng):
    p = np.array([0.5, 0.25, 0.125, 0.125])
    draws = sv.sample_outcomes(p, 200_000, rng)
    freq = np.bincount(draws, minlength=4) / draws.size
    # 5 sigma of a binomial proportion
    assert np.all(np.abs(freq - p) < 5 * np.sqrt(p * (1 - p) / draws.size))


def test_sample_outcomes_validation(rng):
    with pytest.raises(ConfigurationError):
        sv.sample_outcomes([0.5, 0.5], 0, rng)
    with pytest.raises(ConfigurationError):
        sv.sample_outcomes([1.5, -0.5], 3, rng)


def test_single_qubit_rotation_fixtures():
    half = sv.probabilities(sv.apply_rotation(sv.init_zero(1), "Y", 0, np.pi / 2))
    np.testing.assert_allclose(half, [0.5, 0.5], atol=1e-15)
    flip = sv.probabilities(sv.apply_rotation(sv.init_zero(1), "Y", 0, np.pi))
    np.testing.assert_allclose(flip, [0.0, 1.0], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20), st.integers(0, 2))
def test_rz_leaves_probabilities_unchanged_property(a, b, q):
    s = sv.apply_rotation(sv.apply_rotation(sv.init_zero(3), "Y", q, a), "Y", (q + 1) % 3, a / 3)
    np.testing.assert_allclose(sv.probabilities(sv.apply_rotation(s, "Z", q, b)), sv.probabilities(s), atol=1e-14)
