"""Reproducible random number streams.

All samplers in this package take an explicit ``numpy.random.Generator``.
Streams are built on the counter-based Philox bit generator so that
(seed, stream) pairs give statistically independent, platform-stable
sequences; concurrent workers should use stream = worker id.
"""

import numpy as np


def make_rng(seed, stream=0):
    """Return a Generator for the given 64-bit seed and stream index."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 bits")
    return np.random.Generator(np.random.Philox(key=[seed, int(stream)]))
