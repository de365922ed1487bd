"""scikit-learn style wrappers around the generator, baseline and pipeline.

All estimators take a 1-D series (or a single-column 2-D array) as ``X``.

>>> from gazeqgan.data import minmax_scale, synth_heavytail
>>> x = minmax_scale(synth_heavytail(2000, seed=1)).values
>>> chain = MarkovChainGenerator(n_states=8).fit(x)
>>> chain.transition_matrix_.matrix.shape
(8, 8)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import data, markov, metrics, trainer
from .discriminator import DiscriminatorConfig
from .generator import AnsatzConfig, output_distribution
from .exceptions import ConfigurationError
from .statevector import sample_outcomes


def check_series(X, unit_interval=False) -> np.ndarray:
    """Validate a 1-D series or an ``(n, 1)`` column and return it flat."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single column, got shape {arr.shape}")
        arr = arr[:, 0]
    if unit_interval and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("values must be MinMax-scaled into [0, 1]")
    return arr


def _rng(random_state):
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


class QGANGenerator(BaseEstimator):
    """Quantum-circuit GAN generator over ``2**n_qubits`` uniform levels of [0, 1].

    After ``fit``: ``theta_``, ``discriminator_``, ``log_``, ``probabilities_``
    and ``target_probabilities_``.
    """

    def __init__(self, n_qubits=3, layers=1, epochs=300, batch_size=500, disc_arch="mlp",
                 seq_len=None, hidden_size=128, recurrent_layers=3, bidirectional=True,
                 dropout=0.3, mlp_hidden=(64, 32), penalty_weight=0.0, lr=0.002, beta1=0.9,
                 beta2=0.999, disc_updates=1, gen_updates=1, random_state=0, track_jsd=True):
        self.n_qubits = n_qubits
        self.layers = layers
        self.epochs = epochs
        self.batch_size = batch_size
        self.disc_arch = disc_arch
        self.seq_len = seq_len
        self.hidden_size = hidden_size
        self.recurrent_layers = recurrent_layers
        self.bidirectional = bidirectional
        self.dropout = dropout
        self.mlp_hidden = mlp_hidden
        self.penalty_weight = penalty_weight
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.disc_updates = disc_updates
        self.gen_updates = gen_updates
        self.random_state = random_state
        self.track_jsd = track_jsd

    def _configs(self):
        gen_cfg = AnsatzConfig(self.n_qubits, self.layers)
        disc_cfg = DiscriminatorConfig(
            architecture=self.disc_arch, input_length=self.seq_len, hidden_size=self.hidden_size,
            num_recurrent_layers=self.recurrent_layers, bidirectional=self.bidirectional,
            dropout_rate=self.dropout, mlp_hidden=tuple(self.mlp_hidden),
        )
        train_cfg = trainer.TrainingConfig(
            epochs=self.epochs, batch_size=self.batch_size, seed=self.random_state,
            disc_updates_per_batch=self.disc_updates, gen_updates_per_batch=self.gen_updates,
            penalty_weight=self.penalty_weight, gen_lr=self.lr, disc_lr=self.lr,
            beta1=self.beta1, beta2=self.beta2,
        )
        return gen_cfg, disc_cfg, train_cfg

    def fit(self, X, y=None):
        x = check_series(X, unit_interval=True)
        gen_cfg, disc_cfg, train_cfg = self._configs()
        ds = data.discretize(x, gen_cfg.levels)
        self.target_probabilities_ = np.bincount(ds.indices, minlength=gen_cfg.levels) / len(ds)
        result = trainer.train(
            gen_cfg, disc_cfg, train_cfg, ds,
            self.target_probabilities_ if self.track_jsd else None,
        )
        self.ansatz_ = gen_cfg
        self.theta_ = result.theta
        self.discriminator_ = result.disc_params
        self.log_ = result.log
        self.probabilities_ = output_distribution(gen_cfg, result.theta)
        return self

    @property
    def bin_centers_(self):
        check_is_fitted(self, "theta_")
        return data.bin_centers(self.ansatz_.levels)

    def sample(self, n_samples=1, random_state=None):
        """Draw values (bin centres) from the trained generator."""
        check_is_fitted(self, "theta_")
        idx = sample_outcomes(self.probabilities_, n_samples, _rng(random_state))
        return self.bin_centers_[idx]

    def score(self, X, y=None):
        """Negative JSD between the generator and the histogram of ``X``."""
        check_is_fitted(self, "theta_")
        x = check_series(X)
        edges = metrics.uniform_edges(self.ansatz_.levels)
        return -metrics.js_divergence(metrics.histogram(x, edges).normalized, self.probabilities_)


class MarkovChainGenerator(BaseEstimator):
    """KDE-smoothed Markov chain over ``n_states`` uniform bins.

    ``bin_range=None`` spans the observed data range.
    """

    def __init__(self, n_states=8, bandwidth=None, bin_range=None, conditioning="bin"):
        self.n_states = n_states
        self.bandwidth = bandwidth
        self.bin_range = bin_range
        self.conditioning = conditioning

    def fit(self, X, y=None):
        x = check_series(X)
        self.kde_ = markov.fit_kde(x, self.bandwidth)
        edges = None
        if self.bin_range is not None:
            lo, hi = self.bin_range
            edges = np.linspace(lo, hi, self.n_states + 1)
        self.transition_matrix_ = markov.build_transition_matrix(
            self.kde_, self.n_states, edges, self.conditioning
        )
        first = metrics.histogram(x[:1], self.transition_matrix_.bin_edges).counts
        self.start_state_ = int(np.argmax(first))
        return self

    def sample(self, n_samples=1, start_state=None, random_state=None):
        """Generate a chain of ``n_samples`` steps; returns bin-centre values."""
        return self.sample_states(n_samples, start_state, random_state).values

    def sample_states(self, n_samples=1, start_state=None, random_state=None):
        check_is_fitted(self, "transition_matrix_")
        start = self.start_state_ if start_state is None else start_state
        return markov.generate_series(self.transition_matrix_, start, n_samples, _rng(random_state))

    def score(self, X, y=None, n_samples=100_000, random_state=0):
        """Negative JSD between a generated chain and ``X`` over the model's bins."""
        edges = self.transition_matrix_.bin_edges
        gen = self.sample(n_samples, random_state=random_state)
        return -metrics.histogram_jsd(check_series(X), gen, edges)


class WindowMeanResampler(TransformerMixin, BaseEstimator):
    """Non-overlapping window means of ``interval`` seconds."""

    def __init__(self, interval=10.0, sample_rate=data.DEFAULT_SAMPLE_RATE):
        self.interval = interval
        self.sample_rate = sample_rate

    def fit(self, X, y=None):
        check_series(X)
        return self

    def transform(self, X):
        series = data.VelocitySeries(check_series(X), sample_rate=self.sample_rate)
        return data.resample_mean(series, self.interval).values


class UnitIntervalScaler(TransformerMixin, BaseEstimator):
    """MinMax scaling into [0, 1] with the fitted minimum and maximum."""

    def fit(self, X, y=None):
        x = check_series(X)
        scaled = data.minmax_scale(data.VelocitySeries(x))
        self.data_min_ = scaled.scale_min
        self.data_max_ = scaled.scale_max
        return self

    def transform(self, X):
        check_is_fitted(self, "data_min_")
        return (check_series(X) - self.data_min_) / (self.data_max_ - self.data_min_)

    def inverse_transform(self, X):
        check_is_fitted(self, "data_min_")
        return check_series(X) * (self.data_max_ - self.data_min_) + self.data_min_


class LevelDiscretizer(TransformerMixin, BaseEstimator):
    """Map [0, 1] values to ``levels`` uniform bin indices."""

    def __init__(self, levels=8):
        self.levels = levels

    def fit(self, X, y=None):
        check_series(X, unit_interval=True)
        if self.levels < 2 or self.levels & (self.levels - 1):
            raise ConfigurationError("levels must be a power of two >= 2")
        return self

    def transform(self, X):
        return data.discretize(check_series(X, unit_interval=True), self.levels).indices

    def inverse_transform(self, X):
        idx = np.asarray(X, dtype=np.int64)
        return data.bin_centers(self.levels)[idx]
