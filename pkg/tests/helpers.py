"""Random small instances shared by several test modules."""

import numpy as np

from star_isac.metrics import BeamformerSet, StarCoefficients
from star_isac.scenario import ChannelSet


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_star(rng, n):
    split = rng.uniform(0, np.pi / 2, n)
    return StarCoefficients.from_polar(np.cos(split), rng.uniform(0, 2 * np.pi, n),
                                       np.sin(split), rng.uniform(0, 2 * np.pi, n))


def random_instance(rng, n=None, m=None, k=None, q=None):
    n = n or int(rng.integers(1, 7))
    m = m or int(rng.integers(1, 5))
    k = k or int(rng.integers(1, 4))
    q = q or int(rng.integers(1, 4))
    a = [np.exp(-1j * np.pi * rng.uniform(-1, 1) * np.arange(n)) for _ in range(q)]
    ch = ChannelSet(crandn(rng, n, m), [crandn(rng, n) for _ in range(k)], a)
    bf = BeamformerSet.from_vectors([crandn(rng, m) for _ in range(k)], [crandn(rng, m) for _ in range(q)])
    return ch, bf, random_star(rng, n)
