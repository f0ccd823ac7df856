"""
Independent random streams for replicas.

Replica i of a run always draws from SeedSequence(master_seed, spawn_key=(i,)),
so its values depend on (master_seed, i) only and never on thread scheduling.
"""

import numpy as np

MAX_SEED = 2**64 - 1


def _check_seed(master_seed: int) -> int:
    seed = int(master_seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"Master seed must be an unsigned 64-bit integer: {master_seed}")
    return seed


def replica_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    if index < 0:
        raise ValueError(f"Replica index must be non-negative: {index}")
    return np.random.SeedSequence(_check_seed(master_seed), spawn_key=(int(index),))


def replica_stream(master_seed: int, index: int) -> np.random.Generator:
    """Generator of replica `index` under `master_seed`."""
    return np.random.default_rng(replica_seed(master_seed, index))


def auxiliary_stream(master_seed: int, tag: int) -> np.random.Generator:
    """Stream outside the replica family (oracle Monte Carlo, limit sampling)."""
    return np.random.default_rng(
        np.random.SeedSequence(_check_seed(master_seed), spawn_key=(2**32 + int(tag),)))
