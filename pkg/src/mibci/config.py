"""Run configuration: defaults, JSON loading, and range validation.

Hyperparameters are validated against the declared operating bands
(swarm size 30-50, 50-100 iterations, cognitive/social coefficients
1.5-2.0, inertia 0.7-1.0, 2-3 fuzzy sets per input, 100-300 fine-tune
epochs at learning rate 0.01-0.05).  Anything outside those bands is
rejected with a full list of violations unless ``allow_out_of_range``
is set.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .filters import DEFAULT_BANDS

CONFIG_SCHEMA = "mibci-config/1"


class ConfigError(ValueError):
    """Invalid run configuration; ``violations`` lists every problem."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__(
            "invalid configuration:\n" + "\n".join(f"  - {v}" for v in violations)
        )


def default_config() -> dict:
    return {
        "schema": CONFIG_SCHEMA,
        "seed": 42,
        "preprocessing": {
            "session_standardize": True,
            "zscore": "per_channel",
            "ica": {
                "enabled": False,
                "components": None,
                "kurtosis_threshold": 5.0,
                "reject": None,
                "seed": 0,
                "max_iter": 200,
                "tol": 1e-6,
            },
        },
        "fbcsp": {
            "bands": [[b.name, b.low_hz, b.high_hz] for b in DEFAULT_BANDS],
            "filter_order": 5,
            "components_per_band": 4,
            "select_k": 4,
            "selection": "global",
            "shrinkage": 0.05,
            "mi_bins": 8,
        },
        "anfis": {
            "mfs_per_input": 2,
            "mf_kind": "gaussian",
            "ridge": 1e-3,
            "finetune": {"enabled": False, "epochs": 200, "learning_rate": 0.02},
        },
        "pso": {
            "particles": 40,
            "iterations": 75,
            "c1": 1.7,
            "c2": 1.7,
            "inertia_start": 0.9,
            "inertia_end": 0.7,
            "velocity_clamp": 0.2,
        },
        "augment": {"enabled": True, "segments": 4, "multiplier": 1.0},
        "evaluation": {
            "train_fraction": 0.8,
            "inner_val_fraction": 0.25,
            "std_mode": "population",
            "sessions": "all",
        },
        "allow_out_of_range": False,
    }


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


_RANGE_CHECKS = [
    # (section, key, low, high, band description)
    ("pso", "particles", 30, 50, "swarm size"),
    ("pso", "iterations", 50, 100, "swarm iterations"),
    ("pso", "c1", 1.5, 2.0, "cognitive coefficient"),
    ("pso", "c2", 1.5, 2.0, "social coefficient"),
    ("pso", "inertia_start", 0.7, 1.0, "inertia weight"),
    ("pso", "inertia_end", 0.7, 1.0, "inertia weight"),
]


def validate_config(config: dict) -> dict:
    """Check types and declared ranges; raise ConfigError with all issues."""
    violations: list[str] = []
    allow = bool(config.get("allow_out_of_range", False))

    for section, key, low, high, what in _RANGE_CHECKS:
        value = config.get(section, {}).get(key)
        if value is None:
            violations.append(f"{section}.{key} is missing")
        elif not (low <= value <= high) and not allow:
            violations.append(
                f"{section}.{key}={value} outside the declared {what} "
                f"range [{low}, {high}]; set allow_out_of_range to override"
            )

    an = config.get("anfis", {})
    if an.get("mfs_per_input") not in (2, 3):
        if not allow:
            violations.append(
                f"anfis.mfs_per_input={an.get('mfs_per_input')} outside the "
                "declared choice {2, 3}; set allow_out_of_range to override"
            )
    if an.get("mf_kind") not in ("gaussian", "bell", "triangular"):
        violations.append(
            f"anfis.mf_kind={an.get('mf_kind')!r} must be gaussian, bell or triangular"
        )
    if an.get("ridge", 0) < 0:
        violations.append(f"anfis.ridge={an.get('ridge')} must be >= 0")
    ft = an.get("finetune", {})
    if ft.get("enabled", False) and not allow:
        if not 100 <= ft.get("epochs", 0) <= 300:
            violations.append(
                f"anfis.finetune.epochs={ft.get('epochs')} outside the declared "
                "range [100, 300]; set allow_out_of_range to override"
            )
        if not 0.01 <= ft.get("learning_rate", 0) <= 0.05:
            violations.append(
                f"anfis.finetune.learning_rate={ft.get('learning_rate')} outside "
                "the declared range [0.01, 0.05]; set allow_out_of_range to override"
            )

    fb = config.get("fbcsp", {})
    m = fb.get("components_per_band", 0)
    if m < 2 or m % 2 != 0:
        violations.append(
            f"fbcsp.components_per_band={m} must be a positive even count"
        )
    if fb.get("select_k", 0) < 1:
        violations.append(f"fbcsp.select_k={fb.get('select_k')} must be >= 1")
    if fb.get("selection") not in ("global", "per_pairing"):
        violations.append(
            f"fbcsp.selection={fb.get('selection')!r} must be 'global' or 'per_pairing'"
        )
    if not 0.0 <= fb.get("shrinkage", -1) <= 1.0:
        violations.append(f"fbcsp.shrinkage={fb.get('shrinkage')} must be in [0, 1]")
    for band in fb.get("bands", []):
        if len(band) != 3 or not band[0] or band[1] >= band[2]:
            violations.append(f"fbcsp.bands entry {band!r} must be [name, low, high]")

    au = config.get("augment", {})
    if au.get("segments", 0) < 1:
        violations.append(f"augment.segments={au.get('segments')} must be >= 1")
    if au.get("multiplier", -1) < 0:
        violations.append(f"augment.multiplier={au.get('multiplier')} must be >= 0")

    ev = config.get("evaluation", {})
    if not 0.0 < ev.get("train_fraction", 0) < 1.0:
        violations.append(
            f"evaluation.train_fraction={ev.get('train_fraction')} must be in (0, 1)"
        )
    if not 0.0 < ev.get("inner_val_fraction", 0) < 1.0:
        violations.append(
            f"evaluation.inner_val_fraction={ev.get('inner_val_fraction')} "
            "must be in (0, 1)"
        )
    if ev.get("std_mode") not in ("population", "sample"):
        violations.append(
            f"evaluation.std_mode={ev.get('std_mode')!r} must be 'population' or 'sample'"
        )

    pp = config.get("preprocessing", {})
    if pp.get("zscore") not in ("per_channel", "per_trial", "off"):
        violations.append(
            f"preprocessing.zscore={pp.get('zscore')!r} must be "
            "'per_channel', 'per_trial' or 'off'"
        )

    if not isinstance(config.get("seed"), int):
        violations.append(f"seed={config.get('seed')!r} must be an integer")

    if violations:
        raise ConfigError(violations)
    return config


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Merge defaults <- file <- overrides, then validate."""
    config = default_config()
    if path is not None:
        loaded = json.loads(Path(path).read_text())
        if loaded.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
            raise ConfigError([f"unsupported config schema {loaded.get('schema')!r}"])
        config = _deep_merge(config, loaded)
    if overrides:
        config = _deep_merge(config, overrides)
    return validate_config(config)
