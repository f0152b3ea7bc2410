"""Command-line entry point.

Commands: synth (generate a synthetic container), ingest (validate or
merge containers), run (train + evaluate and write reports), compare
(side-by-side report summary), rules (dump the fuzzy rule listing of a
trained bundle).  Exit codes: 0 success, 1 runtime failure, 2
configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .anfis import model_from_dict, model_to_dict, rules_report
from .config import ConfigError, load_config
from .evaluation import EvalReport, preprocess_trialset, run_protocol
from .fbcsp import FbcspTransformer
from .trials import (
    ContainerFormatError,
    TrialSet,
    read_container,
    save_trialset,
    synth_trialset,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

PIPELINE_SCHEMA = "mibci-pipeline/1"


def _container_path(out: str) -> Path:
    path = Path(out)
    if path.suffix == ".miec":
        path.parent.mkdir(parents=True, exist_ok=True)
        return path
    path.mkdir(parents=True, exist_ok=True)
    return path / "synthetic.miec"


def cmd_synth(args) -> int:
    seed = _env_seed(args.seed)
    trial_set = synth_trialset(
        subjects=args.subjects,
        trials_per_class=args.trials_per_class,
        sessions=args.sessions,
        seed=seed,
        n_channels=args.channels,
        n_samples=args.samples,
        sample_rate=args.sample_rate,
        class_gain=args.class_gain,
    )
    path = _container_path(args.out)
    n_bytes = save_trialset(trial_set, path)
    print(f"wrote {len(trial_set)} trials ({n_bytes} bytes) to {path}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    sets = []
    for path in args.containers:
        trial_set = read_container(path)
        counts = trial_set.class_counts()
        print(
            f"{path}: {len(trial_set)} trials, {trial_set.n_channels} ch x "
            f"{trial_set.n_samples} samples @ {trial_set.sample_rate} Hz, "
            f"{len(counts)} subject-session block(s)"
        )
        sets.append(trial_set)
    if args.out:
        first = sets[0]
        merged = []
        for i, s in enumerate(sets):
            if (s.n_channels, s.n_samples, s.sample_rate) != (
                first.n_channels, first.n_samples, first.sample_rate,
            ):
                raise ValueError(
                    f"{args.containers[i]}: geometry "
                    f"({s.n_channels}, {s.n_samples}, {s.sample_rate}) does not "
                    f"match the first container"
                )
            merged.extend(s.trials)
        out_set = TrialSet(
            trials=merged,
            sample_rate=first.sample_rate,
            channel_names=list(first.channel_names),
            cue_window=first.cue_window,
        )
        path = _container_path(args.out)
        save_trialset(out_set, path)
        print(f"merged {len(merged)} trials into {path}")
    return EXIT_OK


def _env_seed(default: int) -> int:
    env = os.environ.get("MIBCI_SEED")
    return int(env) if env else default


def cmd_run(args) -> int:
    overrides: dict = {}
    if args.allow_out_of_range:
        overrides["allow_out_of_range"] = True
    config = load_config(args.config, overrides)
    seed = _env_seed(config["seed"])

    trial_set = read_container(args.data)
    report, audits, artifacts = run_protocol(
        trial_set, args.model, args.protocol, config, seed, n_jobs=args.jobs
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    (out_dir / "report.txt").write_text(report.render_table())

    models_dir = out_dir / "models"
    models_dir.mkdir(exist_ok=True)
    for subject, parts in sorted(artifacts.items()):
        bundle = {
            "schema": PIPELINE_SCHEMA,
            "model": args.model,
            "protocol": args.protocol,
            "subject": subject,
            "preprocessing": config.get("preprocessing", {}),
            "extractor": parts["extractor"].to_dict(),
            "anfis": model_to_dict(parts["classifier"].model_),
        }
        (models_dir / f"{args.model}_{args.protocol}_S{subject}.json").write_text(
            json.dumps(bundle)
        )
    for audit in audits:
        history_path = out_dir / f"pso_history_S{audit['subject']}.jsonl"
        with open(history_path, "w") as fh:
            for entry in audit["pso_history"]:
                fh.write(json.dumps(entry) + "\n")

    print(report.render_table())
    print(f"report written to {report_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    reports = [EvalReport.from_dict(json.loads(Path(p).read_text())) for p in args.reports]
    protocols = {r.protocol for r in reports}
    if len(protocols) != 1:
        raise ValueError(f"reports mix protocols {sorted(protocols)}; compare needs one")
    subject_sets = {tuple(row.subject for row in r.rows) for r in reports}
    if len(subject_sets) != 1:
        raise ValueError("reports cover different subject sets")

    protocol = reports[0].protocol
    lines = [
        f"{protocol} protocol, {len(reports[0].rows)} subjects",
        f"{'Model':<24}{'Accuracy (%)':>18}{'Kappa (%)':>18}",
    ]
    for r in reports:
        lines.append(
            f"{r.model_id:<24}"
            f"{r.mean['accuracy']:>9.2f} ± {r.std['accuracy']:<6.2f}"
            f"{r.mean['kappa']:>9.2f} ± {r.std['kappa']:<6.2f}"
        )
    text = "\n".join(lines) + "\n"
    print(text)
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_rules(args) -> int:
    bundle = json.loads(Path(args.bundle).read_text())
    if bundle.get("schema") != PIPELINE_SCHEMA:
        raise ValueError(f"unsupported bundle schema {bundle.get('schema')!r}")
    extractor = FbcspTransformer.from_dict(bundle["extractor"])
    model = model_from_dict(bundle["anfis"])

    trial_set = read_container(args.data)
    pre = preprocess_trialset(trial_set, bundle.get("preprocessing", {}))
    trials = [t for t in pre.trials
              if args.subject is None or t.subject == args.subject]
    if not trials:
        raise ValueError(f"no reference trials for subject {args.subject}")
    X = np.stack([t.data for t in trials]).astype(np.float64)
    features = extractor.transform(X)

    text = rules_report(model, features, input_names=extractor.feature_names())
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mibci",
        description="Motor-imagery EEG classification toolkit "
        "(filter-bank CSP + fuzzy inference + swarm tuning)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled container")
    p.add_argument("--subjects", type=int, default=9)
    p.add_argument("--trials-per-class", type=int, default=72)
    p.add_argument("--sessions", type=int, default=1)
    p.add_argument("--channels", type=int, default=22)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--sample-rate", type=float, default=250.0)
    p.add_argument("--class-gain", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory or .miec path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate and optionally merge containers")
    p.add_argument("containers", nargs="+")
    p.add_argument("--out", help="write the merged container here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="train and evaluate a pipeline")
    p.add_argument("--model", default="anfis",
                   help="registered pipeline id (anfis | anfis-fbcsp-pso)")
    p.add_argument("--protocol", required=True, choices=["within", "loso"])
    p.add_argument("--config", help="JSON config; defaults apply when omitted")
    p.add_argument("--data", required=True, help="MIEC container path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=None,
                   help="concurrent folds (default sequential)")
    p.add_argument("--allow-out-of-range", action="store_true",
                   help="accept hyperparameters outside the declared bands")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="summarize reports side by side")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--out", help="also write the summary here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("rules", help="print the rule listing of a trained bundle")
    p.add_argument("--bundle", required=True, help="model bundle JSON from `run`")
    p.add_argument("--data", required=True, help="reference MIEC container")
    p.add_argument("--subject", type=int, default=None,
                   help="restrict the reference set to one subject")
    p.add_argument("--out", help="also write the listing here")
    p.set_defaults(func=cmd_rules)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContainerFormatError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
