"""Quantum-circuit GAN and KDE Markov-chain generators for gaze-velocity series."""
from .estimators import (
    LevelDiscretizer, MarkovChainGenerator, QGANGenerator, UnitIntervalScaler, WindowMeanResampler,
)

__version__ = "0.1.0"

__all__ = [
    "LevelDiscretizer", "MarkovChainGenerator", "QGANGenerator", "UnitIntervalScaler",
    "WindowMeanResampler",
]
