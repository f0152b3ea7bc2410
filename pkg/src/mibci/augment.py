"""Class-preserving segmentation-and-recombination augmentation.

Synthetic trials are assembled by cutting every trial of one class into
K contiguous temporal segments and filling each slot from a uniformly
drawn donor trial of the same class.  Donors are drawn with
replacement, so a synthetic trial may reuse one donor several times.
Only training folds may be augmented; the evaluation harness enforces
that separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import PURPOSE_AUGMENT, SplitMix64, derive_seed
from .trials import Trial


@dataclass(frozen=True)
class SrConfig:
    """Segment count, synthetic-per-real multiplier, and stream seed."""

    segments: int = 4
    multiplier: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.segments < 1:
            raise ValueError(f"segments must be >= 1, got {self.segments}")
        if not np.isfinite(self.multiplier) or self.multiplier < 0:
            raise ValueError(f"multiplier must be finite and >= 0, got {self.multiplier}")


@dataclass
class SyntheticTrial:
    """Recombined trial plus the (donor, segment) provenance per slot."""

    trial: Trial
    provenance: list[tuple[int, int]] = field(default_factory=list)


def segment_bounds(n_samples: int, k: int) -> list[tuple[int, int]]:
    """Split [0, n_samples) into k contiguous spans of near-equal length.

    Lengths differ by at most one; the remainder goes to the earliest
    segments.
    """
    if not 1 <= k <= n_samples:
        raise ValueError(f"need 1 <= k <= samples, got k={k}, samples={n_samples}")
    base, rem = divmod(n_samples, k)
    bounds = []
    start = 0
    for i in range(k):
        end = start + base + (1 if i < rem else 0)
        bounds.append((start, end))
        start = end
    return bounds


def sr_augment(class_trials: list[Trial], config: SrConfig) -> list[SyntheticTrial]:
    """Generate floor(multiplier * M) synthetic trials for one class.

    Parameters
    ----------
    class_trials : list of Trial
        All of the same class, subject-mixed or not; shapes must match.
    config : SrConfig

    Returns
    -------
    list of SyntheticTrial
        Originals are never modified; every synthetic trial carries the
        donor class label and full segment provenance.
    """
    if not class_trials:
        raise ValueError("cannot augment an empty class")
    label = class_trials[0].label
    shape = class_trials[0].data.shape
    for i, t in enumerate(class_trials):
        if t.label != label:
            raise ValueError(
                f"trial {i} has label {t.label}, expected {label}: "
                "augmentation must not mix classes"
            )
        if t.data.shape != shape:
            raise ValueError(f"trial {i} shape {t.data.shape} != {shape}")

    m = len(class_trials)
    n_synth = int(np.floor(config.multiplier * m))
    bounds = segment_bounds(shape[1], config.segments)
    rng = SplitMix64(derive_seed(config.seed, PURPOSE_AUGMENT, label))

    synthetic = []
    for _ in range(n_synth):
        data = np.empty(shape, dtype=class_trials[0].data.dtype)
        provenance = []
        for seg_idx, (start, end) in enumerate(bounds):
            donor = rng.randbelow(m)
            data[:, start:end] = class_trials[donor].data[:, start:end]
            provenance.append((donor, seg_idx))
        synthetic.append(
            SyntheticTrial(
                trial=Trial(
                    data=data,
                    label=label,
                    subject=class_trials[0].subject,
                    session=class_trials[0].session,
                ),
                provenance=provenance,
            )
        )
    return synthetic
