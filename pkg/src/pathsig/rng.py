"""Seed derivation for reproducible, order-independent replication streams.

Replication r of a study with master seed ``seed`` draws from streams keyed
by ``seed ^ r``; independent sub-streams within a replication (design draw,
noise draw, one stream per alternative) come from splitmix64 mixing of that
base.  Everything downstream is a pure function of the derived integer seed,
so replications can run in any order or on any worker.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def rep_seed(seed: int, rep: int) -> int:
    """Per-replication stream base: ``seed XOR rep`` (order independent)."""
    return (int(seed) ^ int(rep)) & _MASK64


def substream_seed(base: int, index: int) -> int:
    """The ``index``-th independent sub-stream seed derived from ``base``."""
    return _splitmix64((int(base) + int(index) * _GOLDEN) & _MASK64)


def generator(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator (normals via numpy's exact ziggurat)."""
    return np.random.default_rng(int(seed) & _MASK64)
