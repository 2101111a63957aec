"""
Seed helpers.

Every component takes a ``seed`` that numpy's ``default_rng`` understands
(None, an int or a ``SeedSequence``). Sub-streams are derived with
``SeedSequence`` spawn keys so that the first k children do not depend on
how many are requested.
"""
from typing import List

from numpy.random import SeedSequence


def as_seed_sequence(seed) -> SeedSequence:
    if isinstance(seed, SeedSequence):
        return seed
    return SeedSequence(seed)


def child_seeds(seed, count: int) -> List[SeedSequence]:
    """``count`` independent children of ``seed``; does not mutate it."""
    parent = as_seed_sequence(seed)
    return [
        SeedSequence(parent.entropy, spawn_key=parent.spawn_key + (i,), pool_size=parent.pool_size)
        for i in range(count)
    ]


def child_seed(seed, index: int) -> SeedSequence:
    parent = as_seed_sequence(seed)
    return SeedSequence(parent.entropy, spawn_key=parent.spawn_key + (index,), pool_size=parent.pool_size)
