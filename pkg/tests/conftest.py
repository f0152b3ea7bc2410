import numpy as np
import pytest

from mibci.trials import Trial, TrialSet, synth_trialset


@pytest.fixture(scope="session")
def small_synth() -> TrialSet:
    """Two subjects, 8 trials per class, short epochs; fast everywhere."""
    return synth_trialset(subjects=2, trials_per_class=8, seed=101, n_samples=256)


@pytest.fixture(scope="session")
def medium_synth() -> TrialSet:
    """Three subjects at a size where decoding is clearly above chance."""
    return synth_trialset(subjects=3, trials_per_class=16, seed=202, n_samples=500)


def random_trialset(rng: np.random.Generator, n_trials=5, channels=3,
                    samples=16) -> TrialSet:
    trials = [
        Trial(
            data=rng.standard_normal((channels, samples)).astype(np.float32),
            label=int(rng.integers(1, 5)),
            subject=int(rng.integers(1, 4)),
            session=int(rng.integers(1, 3)),
        )
        for _ in range(n_trials)
    ]
    return TrialSet(trials=trials, sample_rate=250.0,
                    channel_names=[f"ch{i}" for i in range(channels)])
