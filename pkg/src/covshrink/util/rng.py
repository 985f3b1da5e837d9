"""
Seeded random streams

All randomness goes through numpy's PCG64 bit generator seeded by a SeedSequence.
Independent streams of one seed are separated by the spawn key, so a draw never
depends on how many numbers another stage consumed.
"""

import numpy as np

CROSS_STREAM = 0
NOISE_STREAM = 1
MONTE_CARLO_STREAM = 2


def stream(seed: int, *key: int) -> np.random.Generator:
    """
    Get the generator of the stream identified by seed and key
    :param seed: user seed (64-bit)
    :param key: stream key
    :return: numpy Generator
    """
    sequence = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))


def draw_seeds(seed: int, count: int) -> list[int]:
    """
    Derive count independent 64-bit seeds, used to split Monte Carlo draws
    """
    generator = stream(seed, MONTE_CARLO_STREAM)
    return [int(value) for value in generator.integers(0, 2**63 - 1, size=count, dtype=np.int64)]
