"""Reproducible random streams.

Every random draw in the package goes through a Philox counter-based
generator keyed by (seed, *path), so a run is reproducible across
platforms and independent draws never share a stream.  Stream path
constants used by the other modules:

    0  gradient sample set (one sub-path per outer iteration)
    1  Hessian sample set  (one sub-path per outer iteration)
    2  train/test split
    3  epoch shuffling (one sub-path per epoch)
    4  power-iteration start vector
"""

import numpy as np

GRAD_STREAM = 0
HESS_STREAM = 1
SPLIT_STREAM = 2
SHUFFLE_STREAM = 3
POWER_STREAM = 4

_MASK64 = (1 << 64) - 1


def stream_rng(seed, *path):
    """Philox generator for the stream identified by (seed, *path).

    Identical arguments give an identical stream on every platform;
    distinct paths give statistically independent streams.
    """
    entropy = [int(seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    return np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(entropy)))
