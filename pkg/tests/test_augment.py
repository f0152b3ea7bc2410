import numpy as np
import pytest

from mibci.augment import SrConfig, segment_bounds, sr_augment
from mibci.trials import Trial


def make_trials(n, label=2, channels=2, samples=12, seed=0):
    rng = np.random.default_rng(seed)
    return [
        Trial(data=rng.standard_normal((channels, samples)).astype(np.float32),
              label=label, subject=1)
        for _ in range(n)
    ]


def test_even_division():
    assert segment_bounds(1000, 4) == [(0, 250), (250, 500), (500, 750), (750, 1000)]


def test_remainder_goes_to_earliest_segments():
    bounds = segment_bounds(10, 3)
    assert bounds == [(0, 4), (4, 7), (7, 10)]
    assert [e - s for s, e in bounds] == [4, 3, 3]


def test_single_segment_identity_partition():
    assert segment_bounds(37, 1) == [(0, 37)]


def test_segment_bounds_cover_and_disjoint():
    for n, k in ((100, 7), (5, 5), (8, 3)):
        bounds = segment_bounds(n, k)
        assert bounds[0][0] == 0 and bounds[-1][1] == n
        for (_, e1), (s2, _) in zip(bounds, bounds[1:]):
            assert e1 == s2


def test_segment_bounds_invalid():
    with pytest.raises(ValueError):
        segment_bounds(4, 5)
    with pytest.raises(ValueError):
        segment_bounds(4, 0)


def test_single_donor_reproduces_original():
    trials = make_trials(1)
    for k in (1, 3, 12):
        out = sr_augment(trials, SrConfig(segments=k, multiplier=3.0, seed=1))
        assert len(out) == 3
        for synth in out:
            np.testing.assert_array_equal(synth.trial.data, trials[0].data)
            assert all(donor == 0 for donor, _ in synth.provenance)


def test_k1_copies_whole_donor_trials():
    trials = make_trials(4, seed=1)
    out = sr_augment(trials, SrConfig(segments=1, multiplier=2.0, seed=2))
    assert len(out) == 8
    for synth in out:
        (donor, seg), = synth.provenance
        assert seg == 0
        np.testing.assert_array_equal(synth.trial.data, trials[donor].data)


def test_two_by_two_enumeration_membership():
    trials = make_trials(2, seed=3, samples=10)
    out = sr_augment(trials, SrConfig(segments=2, multiplier=10.0, seed=4))
    assert len(out) == 20
    bounds = segment_bounds(10, 2)
    enumerated = []
    for a in (0, 1):
        for b in (0, 1):
            data = np.empty_like(trials[0].data)
            data[:, bounds[0][0]:bounds[0][1]] = trials[a].data[:, bounds[0][0]:bounds[0][1]]
            data[:, bounds[1][0]:bounds[1][1]] = trials[b].data[:, bounds[1][0]:bounds[1][1]]
            enumerated.append(data)
    for synth in out:
        assert any(np.array_equal(synth.trial.data, e) for e in enumerated)


def test_sample_values_come_from_donor_positions():
    trials = make_trials(5, seed=5, samples=11)
    out = sr_augment(trials, SrConfig(segments=3, multiplier=4.0, seed=6))
    bounds = segment_bounds(11, 3)
    for synth in out:
        for donor, seg in synth.provenance:
            s, e = bounds[seg]
            np.testing.assert_array_equal(
                synth.trial.data[:, s:e], trials[donor].data[:, s:e]
            )


def test_class_preserved_and_mixing_rejected():
    trials = make_trials(3, label=4, seed=7)
    out = sr_augment(trials, SrConfig(segments=2, multiplier=1.0, seed=8))
    assert all(s.trial.label == 4 for s in out)
    mixed = trials + make_trials(1, label=1, seed=9)
    with pytest.raises(ValueError, match="mix classes"):
        sr_augment(mixed, SrConfig(segments=2, multiplier=1.0, seed=8))


def test_multiplier_floor_and_zero():
    trials = make_trials(3, seed=10)
    assert len(sr_augment(trials, SrConfig(segments=2, multiplier=1.5, seed=0))) == 4
    assert len(sr_augment(trials, SrConfig(segments=2, multiplier=0.0, seed=0))) == 0


def test_deterministic_per_seed():
    trials = make_trials(6, seed=11)
    a = sr_augment(trials, SrConfig(segments=4, multiplier=2.0, seed=42))
    b = sr_augment(trials, SrConfig(segments=4, multiplier=2.0, seed=42))
    assert [s.provenance for s in a] == [s.provenance for s in b]
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.trial.data, y.trial.data)
    c = sr_augment(trials, SrConfig(segments=4, multiplier=2.0, seed=43))
    assert [s.provenance for s in a] != [s.provenance for s in c]


def test_empty_class_rejected():
    with pytest.raises(ValueError, match="empty"):
        sr_augment([], SrConfig())


def test_originals_untouched():
    trials = make_trials(3, seed=12)
    snapshots = [t.data.copy() for t in trials]
    sr_augment(trials, SrConfig(segments=3, multiplier=5.0, seed=13))
    for t, snap in zip(trials, snapshots):
        np.testing.assert_array_equal(t.data, snap)
