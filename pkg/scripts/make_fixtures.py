"""Regenerate the cross-component test fixtures.

The committed copies are the contract: tests in both the Python package
and the frontend assert byte/index equality against them.  Rerun this
after any deliberate change to the synthetic generator or the split
algorithm, and commit the result.
"""

import json
from pathlib import Path

from mibci.evaluation import loso_folds, within_subject_split
from mibci.trials import read_container, save_trialset, synth_trialset

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

OVERFIT_SEED = 7001
SMALL9_SEED = 7002
SPLIT_SEED = 42


def main():
    FIXTURES.mkdir(exist_ok=True)

    overfit = synth_trialset(subjects=1, trials_per_class=4, seed=OVERFIT_SEED,
                             n_samples=1000)
    save_trialset(overfit, FIXTURES / "overfit16.miec")

    small9 = synth_trialset(subjects=9, trials_per_class=4, seed=SMALL9_SEED,
                            n_samples=200)
    save_trialset(small9, FIXTURES / "small9.miec")

    small9 = read_container(FIXTURES / "small9.miec")
    within = {}
    for subject in small9.subjects():
        train, test = within_subject_split(small9, subject, 0.8, seed=SPLIT_SEED)
        within[str(subject)] = {"train": train, "test": test}
    loso = []
    for train_subjects, held_out in loso_folds(small9):
        train_idx = [i for i, t in enumerate(small9.trials)
                     if t.subject in set(train_subjects)]
        test_idx = [i for i, t in enumerate(small9.trials)
                    if t.subject == held_out]
        loso.append({"held_out": held_out, "train": train_idx, "test": test_idx})

    golden = {
        "container": "small9.miec",
        "seed": SPLIT_SEED,
        "train_fraction": 0.8,
        "within": within,
        "loso": loso,
    }
    (FIXTURES / "splits_golden.json").write_text(json.dumps(golden, indent=1) + "\n")
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
