"""Evaluation protocols, per-subject reports, and leakage-safe folds.

Two protocols are provided: a stratified 80/20 within-subject split and
leave-one-subject-out.  Splits are computed with the portable
SplitMix64 shuffle (documented in docs/FORMATS.md) so that any other
implementation can reproduce the same index sets from the same seed.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from ._rng import PURPOSE_OUTER_SPLIT, SplitMix64, derive_seed
from .augment import SrConfig, sr_augment
from .classifier import AnfisPsoClassifier
from .fbcsp import FbcspTransformer
from .filters import BandSpec
from .metrics import confusion, metrics
from .preprocessing import (
    artifact_components,
    fastica_fit,
    ica_clean,
    session_standardize,
    zscore_trial,
)
from .trials import Trial, TrialSet

REPORT_SCHEMA = "mibci-evalreport/1"
METRIC_FIELDS = ("accuracy", "precision", "recall", "f1", "kappa")

# seed-derivation tags for per-fold streams
_TAG_WITHIN_FOLD = 11
_TAG_LOSO_FOLD = 12


@dataclass
class MetricRow:
    """One subject's scores (percentages) plus timing."""

    subject: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    kappa: float
    train_duration_s: float
    mean_predict_latency_s: float


@dataclass
class EvalReport:
    """Per-subject rows with mean/std summary, config snapshot and seed."""

    protocol: str
    model_id: str
    rows: list[MetricRow]
    mean: dict[str, float]
    std: dict[str, float]
    config: dict
    seed: int

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "protocol": self.protocol,
            "model": self.model_id,
            "seed": self.seed,
            "config": self.config,
            "rows": [asdict(r) for r in self.rows],
            "mean": self.mean,
            "std": self.std,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        if d.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(
            protocol=d["protocol"],
            model_id=d["model"],
            rows=[MetricRow(**r) for r in d["rows"]],
            mean=d["mean"],
            std=d["std"],
            config=d.get("config", {}),
            seed=d.get("seed", 0),
        )

    def render_table(self) -> str:
        header = (
            f"{'Subj.':<6}{'Acc.':>8}{'Prec.':>8}{'Rec.':>8}{'F1':>8}"
            f"{'Kappa':>8}{'Train s':>10}{'Pred s':>10}"
        )
        lines = [f"[{self.model_id} | {self.protocol}]", header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"S{r.subject:<5}{r.accuracy:>8.2f}{r.precision:>8.2f}"
                f"{r.recall:>8.2f}{r.f1:>8.2f}{r.kappa:>8.2f}"
                f"{r.train_duration_s:>10.3f}{r.mean_predict_latency_s:>10.3f}"
            )
        lines.append("-" * len(header))
        lines.append(
            f"{'Mean':<6}" + "".join(f"{self.mean[m]:>8.2f}" for m in METRIC_FIELDS)
        )
        lines.append(
            f"{'Std':<6}" + "".join(f"{self.std[m]:>8.2f}" for m in METRIC_FIELDS)
        )
        return "\n".join(lines) + "\n"


def summarize_rows(rows: list[MetricRow], std_mode: str = "population"):
    """Mean and std per metric over the report rows."""
    ddof = 0 if std_mode == "population" else 1
    mean, std = {}, {}
    for m in METRIC_FIELDS:
        vals = np.array([getattr(r, m) for r in rows], dtype=np.float64)
        mean[m] = float(vals.mean())
        std[m] = float(vals.std(ddof=ddof))
    return mean, std


def within_subject_split(
    trial_set: TrialSet,
    subject: int,
    train_fraction: float = 0.8,
    seed: int = 0,
    sessions=None,
) -> tuple[list[int], list[int]]:
    """Stratified train/test indices for one subject.

    Per class, the subject's trial indices (container order) are
    shuffled with a SplitMix64 stream derived from (seed, subject,
    class); the first floor(train_fraction * n) go to train.  Both
    lists are returned ascending.

    Parameters
    ----------
    sessions : None, int or iterable of int
        Restrict to these sessions before splitting (None = pool all).
    """
    if sessions is None:
        keep = None
    elif isinstance(sessions, int):
        keep = {sessions}
    else:
        keep = set(sessions)

    by_class: dict[int, list[int]] = {}
    for i, t in enumerate(trial_set.trials):
        if t.subject != subject:
            continue
        if keep is not None and t.session not in keep:
            continue
        by_class.setdefault(t.label, []).append(i)
    if not by_class:
        raise ValueError(f"subject {subject} has no trials")

    train_idx, test_idx = [], []
    for label in sorted(by_class):
        indices = by_class[label]
        if len(indices) < 2:
            raise ValueError(
                f"subject {subject} class {label} has {len(indices)} trial(s); "
                "need at least 2 to split"
            )
        rng = SplitMix64(derive_seed(seed, PURPOSE_OUTER_SPLIT, subject, label))
        rng.shuffle(indices)
        n_train = int(np.floor(train_fraction * len(indices)))
        train_idx.extend(indices[:n_train])
        test_idx.extend(indices[n_train:])
    return sorted(train_idx), sorted(test_idx)


def loso_folds(trial_set: TrialSet) -> list[tuple[list[int], int]]:
    """One (training subjects, held-out subject) pair per subject."""
    subjects = trial_set.subjects()
    if len(subjects) < 2:
        raise ValueError(f"leave-one-subject-out needs >= 2 subjects, got {len(subjects)}")
    return [([s for s in subjects if s != held_out], held_out) for held_out in subjects]


def preprocess_trialset(trial_set: TrialSet, cfg: dict) -> TrialSet:
    """Label-free preprocessing chain: session stats -> ICA -> z-score."""
    out = trial_set
    if cfg.get("session_standardize", True):
        out = session_standardize(out)

    ica_cfg = cfg.get("ica", {})
    if ica_cfg.get("enabled", False):
        out = _ica_clean_trialset(out, ica_cfg)

    mode = cfg.get("zscore", "per_channel")
    if mode != "off":
        out = TrialSet(
            trials=[zscore_trial(t, mode) for t in out.trials],
            sample_rate=out.sample_rate,
            channel_names=list(out.channel_names),
            cue_window=out.cue_window,
        )
    return out


def _ica_clean_trialset(trial_set: TrialSet, ica_cfg: dict) -> TrialSet:
    """Per-session ICA with kurtosis-screened component rejection."""
    groups: dict[tuple[int, int], list[int]] = {}
    for i, t in enumerate(trial_set.trials):
        groups.setdefault((t.subject, t.session), []).append(i)

    new_trials: list[Trial | None] = [None] * len(trial_set.trials)
    for (subject, session), indices in sorted(groups.items()):
        stacked = np.concatenate(
            [trial_set.trials[i].data.astype(np.float64) for i in indices], axis=1
        )
        decomp = fastica_fit(
            stacked,
            n_components=ica_cfg.get("components"),
            seed=ica_cfg.get("seed", 0),
            max_iter=ica_cfg.get("max_iter", 200),
            tol=ica_cfg.get("tol", 1e-6),
        )
        reject = ica_cfg.get("reject")
        if reject is None:
            reject = artifact_components(
                decomp, ica_cfg.get("kurtosis_threshold", 5.0)
            )
        for i in indices:
            t = trial_set.trials[i]
            cleaned = ica_clean(decomp, t.data, reject)
            new_trials[i] = Trial(
                data=cleaned, label=t.label, subject=t.subject, session=t.session
            )
    return TrialSet(
        trials=list(new_trials),
        sample_rate=trial_set.sample_rate,
        channel_names=list(trial_set.channel_names),
        cue_window=trial_set.cue_window,
    )


def _augment_training(train_trials: list[Trial], cfg: dict, seed: int):
    """Per-class recombination; returns (synthetic trials, donor row ids)."""
    if not cfg.get("enabled", True) or cfg.get("multiplier", 1.0) <= 0:
        return [], []
    by_class: dict[int, list[int]] = {}
    for i, t in enumerate(train_trials):
        by_class.setdefault(t.label, []).append(i)
    synthetic, donor_rows = [], []
    for label in sorted(by_class):
        rows = by_class[label]
        out = sr_augment(
            [train_trials[i] for i in rows],
            SrConfig(
                segments=cfg.get("segments", 4),
                multiplier=cfg.get("multiplier", 1.0),
                seed=seed,
            ),
        )
        for synth in out:
            synthetic.append(synth.trial)
            donor_rows.extend(rows[d] for d, _ in synth.provenance)
    return synthetic, sorted(set(donor_rows))


def _fit_eval_fold(pre: TrialSet, train_idx, test_idx, config: dict,
                   fold_seed: int, subject: int):
    """Train the feature extractor + classifier on one fold and score it."""
    fb = config.get("fbcsp", {})
    an = config.get("anfis", {})
    ps = config.get("pso", {})

    train_trials = [pre.trials[i] for i in train_idx]
    synthetic, donor_rows = _augment_training(
        train_trials, config.get("augment", {}), fold_seed
    )
    all_train = train_trials + synthetic
    real_mask = np.array([True] * len(train_trials) + [False] * len(synthetic))

    X_train = np.stack([t.data for t in all_train]).astype(np.float64)
    y_train = np.array([t.label for t in all_train], dtype=np.int64)
    y_test = np.array([pre.trials[i].label for i in test_idx], dtype=np.int64)

    bands = fb.get("bands")
    if bands is not None:
        bands = [BandSpec(*b) for b in bands]

    t0 = time.perf_counter()
    extractor = FbcspTransformer(
        bands=bands,
        filter_order=fb.get("filter_order", 5),
        sample_rate=pre.sample_rate,
        components_per_band=fb.get("components_per_band", 4),
        select_k=fb.get("select_k", 4),
        selection=fb.get("selection", "global"),
        shrinkage=fb.get("shrinkage", 0.05),
        n_bins=fb.get("mi_bins", 8),
    )
    features_train = extractor.fit_transform(X_train, y_train)

    clf = AnfisPsoClassifier(
        mfs_per_input=an.get("mfs_per_input", 2),
        mf_kind=an.get("mf_kind", "gaussian"),
        ridge=an.get("ridge", 1e-3),
        particles=ps.get("particles", 40),
        iterations=ps.get("iterations", 75),
        c1=ps.get("c1", 1.7),
        c2=ps.get("c2", 1.7),
        inertia=(ps.get("inertia_start", 0.9), ps.get("inertia_end", 0.7)),
        velocity_clamp=ps.get("velocity_clamp", 0.2),
        val_fraction=config.get("evaluation", {}).get("inner_val_fraction", 0.25),
        finetune=an.get("finetune", {}).get("enabled", False),
        finetune_epochs=an.get("finetune", {}).get("epochs", 200),
        finetune_lr=an.get("finetune", {}).get("learning_rate", 0.02),
        seed=fold_seed,
    )
    clf.fit(features_train, y_train, real_mask=real_mask)
    train_duration = time.perf_counter() - t0

    # Per-trial prediction latency measured one trial at a time, the way
    # an online decoder would see them.
    predictions = np.empty(len(test_idx), dtype=np.int64)
    t0 = time.perf_counter()
    for j, i in enumerate(test_idx):
        feat = extractor.transform(pre.trials[i].data[None, :, :].astype(np.float64))
        predictions[j] = clf.predict(feat)[0]
    latency = (time.perf_counter() - t0) / max(1, len(test_idx))

    scores = metrics(confusion(y_test, predictions)).as_percentages()
    row = MetricRow(
        subject=subject,
        train_duration_s=train_duration,
        mean_predict_latency_s=latency,
        **scores,
    )
    audit = {
        "subject": subject,
        "train": list(map(int, train_idx)),
        "test": list(map(int, test_idx)),
        "n_synthetic": len(synthetic),
        "donor_train_rows": list(map(int, donor_rows)),
        "donor_global": [int(train_idx[r]) for r in donor_rows],
        "inner_train_rows": clf.inner_split_["train"],
        "inner_val_rows": clf.inner_split_["val"],
        "pso_history": clf.history_,
        "pso_best_fitness": clf.best_fitness_,
    }
    return row, audit, extractor, clf


def run_protocol(
    trial_set: TrialSet,
    model_id: str,
    protocol: str,
    config: dict,
    seed: int,
    n_jobs=None,
):
    """Run a full evaluation study and assemble the report.

    Parameters
    ----------
    trial_set : TrialSet
    model_id : str
        Must name a registered pipeline ("anfis" / "anfis-fbcsp-pso").
    protocol : {"within", "loso"}
    config : dict
        Validated run configuration (see config.py).
    seed : int
    n_jobs : int, optional
        Folds run concurrently; rows are assembled in subject order
        regardless.

    Returns
    -------
    (EvalReport, list of dict, dict)
        Report, per-fold leakage-audit records, and per-fold fitted
        artifacts keyed by subject id.
    """
    if model_id not in ("anfis", "anfis-fbcsp-pso"):
        raise ValueError(
            f"unknown model id {model_id!r}; this harness runs 'anfis' "
            "(alias 'anfis-fbcsp-pso'); external baselines produce their own "
            "reports for `compare`"
        )
    if protocol not in ("within", "loso"):
        raise ValueError(f"unknown protocol {protocol!r}; expected 'within' or 'loso'")

    pre = preprocess_trialset(trial_set, config.get("preprocessing", {}))
    ev = config.get("evaluation", {})
    sessions = ev.get("sessions", "all")
    sessions = None if sessions == "all" else sessions

    folds = []
    if protocol == "within":
        for subject in pre.subjects():
            train_idx, test_idx = within_subject_split(
                pre, subject,
                train_fraction=ev.get("train_fraction", 0.8),
                seed=seed,
                sessions=sessions,
            )
            fold_seed = derive_seed(seed, _TAG_WITHIN_FOLD, subject)
            folds.append((subject, train_idx, test_idx, fold_seed))
    else:
        for train_subjects, held_out in loso_folds(pre):
            train_idx = [
                i for i, t in enumerate(pre.trials) if t.subject in set(train_subjects)
            ]
            test_idx = [i for i, t in enumerate(pre.trials) if t.subject == held_out]
            fold_seed = derive_seed(seed, _TAG_LOSO_FOLD, held_out)
            folds.append((held_out, train_idx, test_idx, fold_seed))

    def _one(subject, train_idx, test_idx, fold_seed):
        try:
            return _fit_eval_fold(pre, train_idx, test_idx, config, fold_seed, subject)
        except Exception as exc:
            raise RuntimeError(
                f"{protocol} fold for subject {subject} failed: {exc}"
            ) from exc

    if n_jobs in (None, 0, 1):
        results = [_one(*f) for f in folds]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(_one)(*f) for f in folds)

    rows = [r for r, _, _, _ in results]
    audits = [a for _, a, _, _ in results]
    artifacts = {
        a["subject"]: {"extractor": ex, "classifier": clf}
        for _, a, ex, clf in results
    }
    mean, std = summarize_rows(rows, ev.get("std_mode", "population"))
    report = EvalReport(
        protocol=protocol,
        model_id=model_id,
        rows=rows,
        mean=mean,
        std=std,
        config=config,
        seed=seed,
    )
    return report, audits, artifacts
