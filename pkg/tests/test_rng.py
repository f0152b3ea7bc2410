"""The SplitMix64 stream is a cross-language contract; pin its output."""

import numpy as np

from mibci._rng import SplitMix64, derive_seed


def test_splitmix64_reference_values():
    # Published SplitMix64 outputs for seed 1234567 (first three draws).
    rng = SplitMix64(1234567)
    assert rng.next_u64() == 6457827717110365317
    assert rng.next_u64() == 3203168211198807973
    assert rng.next_u64() == 9817491932198370423


def test_splitmix64_seed_zero_reference():
    rng = SplitMix64(0)
    assert rng.next_u64() == 16294208416658607535


def test_derive_seed_is_order_sensitive():
    assert derive_seed(42, 1, 2) != derive_seed(42, 2, 1)
    assert derive_seed(42, 1, 2) == derive_seed(42, 1, 2)


def test_shuffle_is_a_permutation_and_deterministic():
    items = list(range(20))
    a, b = list(items), list(items)
    SplitMix64(derive_seed(7, 2, 1, 1)).shuffle(a)
    SplitMix64(derive_seed(7, 2, 1, 1)).shuffle(b)
    assert a == b
    assert sorted(a) == items
    c = list(items)
    SplitMix64(derive_seed(8, 2, 1, 1)).shuffle(c)
    assert c != a  # different seed, different order (20! makes ties absurd)


def test_randbelow_range_and_rejection():
    rng = SplitMix64(3)
    draws = [rng.randbelow(7) for _ in range(500)]
    assert min(draws) >= 0 and max(draws) <= 6
    assert len(set(draws)) == 7  # all residues hit in 500 draws
    try:
        rng.randbelow(0)
    except ValueError:
        pass
    else:
        raise AssertionError("randbelow(0) must raise")


def test_shuffle_pinned_order():
    # Frozen expected permutation; the TypeScript twin pins the same.
    items = list(range(8))
    SplitMix64(derive_seed(42, 2, 1, 1)).shuffle(items)
    assert items == _expected_shuffle()


def _expected_shuffle():
    # Independently recomputed with the documented algorithm:
    # state updates s += GAMMA; mix via shift-xor-multiply chain.
    mask = (1 << 64) - 1

    def mix(z):
        z &= mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    def derive(base, *parts):
        h = base & mask
        for p in parts:
            h = mix((h ^ mix(p)) + 0x9E3779B97F4A7C15)
        return h

    state = derive(42, 2, 1, 1)
    items = list(range(8))
    for i in range(7, 0, -1):
        state = (state + 0x9E3779B97F4A7C15) & mask
        j = mix(state) % (i + 1)
        items[i], items[j] = items[j], items[i]
    return items
