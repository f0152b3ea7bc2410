"""Motor-imagery EEG classification toolkit.

Filter-bank spatial-pattern features, an interpretable Sugeno fuzzy
classifier tuned by particle swarm, class-preserving trial
augmentation, and a two-protocol evaluation harness over a portable
binary epoch container.
"""

from .anfis import (
    AnfisModel,
    MembershipFunction,
    RuleBase,
    anfis_finetune,
    anfis_forward,
    fit_consequents,
    forward_batch,
    mf_eval,
    predict,
    rules_report,
)
from .augment import SrConfig, SyntheticTrial, segment_bounds, sr_augment
from .classifier import AnfisPsoClassifier
from .csp import CspModel, csp_features, csp_fit, regularized_covariance
from .evaluation import (
    EvalReport,
    MetricRow,
    loso_folds,
    run_protocol,
    within_subject_split,
)
from .fbcsp import FbcspTransformer, mutual_information_rank
from .filters import (
    DEFAULT_BANDS,
    BandSpec,
    FilterBank,
    IirFilter,
    design_bandpass,
    filtfilt,
)
from .metrics import MetricValues, confusion, metrics
from .preprocessing import (
    IcaDecomposition,
    fastica_fit,
    ica_clean,
    session_standardize,
    zscore_trial,
)
from .pso import ParameterCodec, PsoConfig, PsoResult, make_validation_fitness, pso_optimize
from .trials import (
    ContainerFormatError,
    Trial,
    TrialSet,
    epoch_cue_window,
    read_container,
    save_trialset,
    synth_trialset,
    write_container,
)

__version__ = "0.1.0"

__all__ = [
    "AnfisModel",
    "AnfisPsoClassifier",
    "BandSpec",
    "ContainerFormatError",
    "CspModel",
    "DEFAULT_BANDS",
    "EvalReport",
    "FbcspTransformer",
    "FilterBank",
    "IcaDecomposition",
    "IirFilter",
    "MembershipFunction",
    "MetricRow",
    "MetricValues",
    "ParameterCodec",
    "PsoConfig",
    "PsoResult",
    "RuleBase",
    "SrConfig",
    "SyntheticTrial",
    "Trial",
    "TrialSet",
    "anfis_finetune",
    "anfis_forward",
    "confusion",
    "csp_features",
    "csp_fit",
    "design_bandpass",
    "epoch_cue_window",
    "fastica_fit",
    "filtfilt",
    "fit_consequents",
    "forward_batch",
    "ica_clean",
    "loso_folds",
    "make_validation_fitness",
    "metrics",
    "mf_eval",
    "mutual_information_rank",
    "predict",
    "pso_optimize",
    "read_container",
    "regularized_covariance",
    "rules_report",
    "run_protocol",
    "save_trialset",
    "segment_bounds",
    "session_standardize",
    "sr_augment",
    "synth_trialset",
    "within_subject_split",
    "write_container",
    "zscore_trial",
]
