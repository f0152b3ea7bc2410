"""Portable deterministic random streams.

Everything that must be reproducible bit-for-bit across runs, platforms
and language implementations (data splits, augmentation donor draws)
runs on SplitMix64, a public-domain 64-bit generator with a three-line
state transition.  It is trivial to reimplement anywhere that has
64-bit integer arithmetic, which is exactly what the cross-component
golden tests rely on.

Heavier numerical sampling (synthetic data, swarm initialisation) uses
numpy's PCG64 seeded from the same derivation scheme; those streams are
stable across platforms for a fixed numpy version but are not expected
to be reimplemented outside Python.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """SplitMix64 output scrambler (Stafford variant 13)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *parts: int) -> int:
    """Fold integer tags into a base seed, order-sensitively.

    Used to give every (purpose, subject, class, ...) combination its
    own independent stream while keeping a single user-facing seed.
    The exact recipe is part of the on-disk contract (see
    docs/FORMATS.md) and must not change.
    """
    h = base & _MASK64
    for p in parts:
        h = _mix64((h ^ _mix64(p & _MASK64)) + _GAMMA)
    return h


class SplitMix64:
    """Minimal counter-based generator for portable integer draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix64(self._state)

    def randbelow(self, n: int) -> int:
        """Uniform draw from {0, ..., n-1} by 64-bit modulo.

        The modulo bias is below 2**-50 for any n that fits this
        codebase; accepting it keeps the algorithm one line in every
        language.
        """
        if n <= 0:
            raise ValueError(f"randbelow requires n >= 1, got {n}")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, high index first."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


# Stream purpose tags; part of the documented split/augment contract.
PURPOSE_SYNTH = 1
PURPOSE_OUTER_SPLIT = 2
PURPOSE_INNER_SPLIT = 3
PURPOSE_AUGMENT = 4
PURPOSE_PSO = 5
PURPOSE_ANFIS_INIT = 6


def numpy_rng(base: int, *parts: int) -> np.random.Generator:
    """PCG64 generator seeded through the shared derivation scheme."""
    return np.random.Generator(np.random.PCG64(derive_seed(base, *parts)))
