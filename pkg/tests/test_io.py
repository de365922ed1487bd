import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gazeqgan import discriminator as disc, generator as gen, io, markov
from gazeqgan.exceptions import ConfigurationError, ParseError


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 8, elements=st.floats(-1e6, 1e6)))
def test_generator_checkpoint_is_bit_exact(tmp_path_factory, theta):
    path = tmp_path_factory.mktemp("g") / "generator.csv"
    io.write_generator(path, gen.AnsatzConfig(2, 1), theta)
    cfg, back = io.read_generator(path)
    assert cfg == gen.AnsatzConfig(2, 1)
    np.testing.assert_array_equal(back, theta)


def test_generator_checkpoint_format(tmp_path):
    path = tmp_path / "g.csv"
    io.write_generator(path, gen.AnsatzConfig(1, 0), np.array([0.1, -2.0]))
    assert path.read_bytes() == b"n_qubits,layers\n1,0\n0.10000000000000001\n-2\n"


def test_truncated_generator_names_section(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("n_qubits,layers\n2,1\n0.1\n0.2\n")
    with pytest.raises(ParseError, match="angles") as info:
        io.read_generator(path)
    assert info.value.line == 5
    path.write_text("")
    with pytest.raises(ParseError, match="header"):
        io.read_generator(path)


def test_discriminator_roundtrip_and_mismatch(tmp_path, rng):
    cfg = disc.DiscriminatorConfig(architecture="lstm", input_length=4, hidden_size=2,
                                   num_recurrent_layers=2, bidirectional=False, mlp_hidden=(3,))
    params = disc.init_params(cfg, rng)
    path = tmp_path / "d.csv"
    io.write_discriminator(path, params)
    back = io.read_discriminator(path, cfg)
    assert back.config == cfg
    np.testing.assert_array_equal(back.values, params.values)
    with pytest.raises(ConfigurationError):
        io.read_discriminator(path, disc.DiscriminatorConfig())
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(ParseError, match="weights"):
        io.read_discriminator(path)


def test_transition_matrix_roundtrip(tmp_path):
    tm = markov.TransitionMatrix(np.linspace(0, 1, 4), np.array([[1 / 3, 1 / 3, 1 / 3], [0.1, 0.2, 0.7], [0, 0, 1]]))
    path = tmp_path / "tm.csv"
    io.write_transition_matrix(path, tm)
    back = io.read_transition_matrix(path)
    np.testing.assert_allclose(back.matrix, tm.matrix, atol=1e-12)
    np.testing.assert_allclose(back.bin_edges, tm.bin_edges)
    assert path.read_text().splitlines()[0] == "3"
    path.write_text("3\n0,0.5,1\n")
    with pytest.raises(ParseError):
        io.read_transition_matrix(path)


def test_columns_roundtrip_and_comments(tmp_path):
    path = tmp_path / "c.csv"
    io.write_columns(path, ["index", "value"], [range(3), [0.5, 1e-20, 3.0]])
    assert path.read_text() == "index,value\n0,0.5\n1,1e-20\n2,3\n"
    path.write_text("# note\n" + path.read_text())
    np.testing.assert_array_equal(io.read_series(path), [0.5, 1e-20, 3.0])
    with pytest.raises(ParseError):
        io.read_series(path, "missing")
