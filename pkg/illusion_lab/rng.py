"""Seeded random substreams"""
import numpy as np


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for the substream `key` of `seed`.

    Replicate r draws from rng_for(seed, r) and stream batch t from
    rng_for(seed, t), so work items can run in any order.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(seed: int, *key: int) -> int:
    """Integer seed for the substream `key` of `seed`"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
