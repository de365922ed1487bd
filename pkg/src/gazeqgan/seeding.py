"""One master seed, split into labelled independent streams."""
import numpy as np

STREAMS = {
    "init_generator": 0,
    "init_discriminator": 1,
    "dropout": 2,
    "sampling": 3,
    "shuffle": 4,
    "penalty": 5,
    "markov": 6,
    "generate": 7,
    "evaluate": 8,
}


def substream(seed, label) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), STREAMS[label]]))
