"""Command line front end: validate, run, metrics, synth.

Exit codes: 0 success, 1 domain error (bad schema, bad flag values, failed
pipeline preconditions), 2 unreadable or unwritable files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .adasyn import SamplerConfig
from .cart import TreeConfig
from .corpus import audit_csv, class_summary, load_corpus, save_corpus, synth_corpus
from .errors import SchemaError, SevpredictError
from .metrics import (
    REPORT_CSV_HEADER,
    EconConfig,
    full_report,
    parse_predictions,
)
from .pipeline import (
    PipelineConfig,
    average_reports,
    report_to_json,
    run_experiment,
    run_kfold,
    write_comparison_tables,
)
from .selftrain import SelfTrainConfig
from .severity import SEVERITY_ORDER, SeverityClass

SEED_ENV_VAR = "SEVPREDICT_SEED"

DEFAULTS = {
    "gamma": 0.99,
    "delta": 100.0,
    "k_neighbors": 5,
    "beta": 1.0,
    "d_threshold": 1.0,
    "test_fraction": 0.2,
    "folds": None,
    "weights": (0.1, 0.2, 0.3, 0.4, 0.5),
    "bst_oversample": True,
    "oversample_first": True,
    "max_iterations": 50,
    "min_samples_split": 2,
    "max_depth": None,
    "seed": None,
}


def _parse_weights(raw) -> tuple[float, ...]:
    if isinstance(raw, (list, tuple)):
        values = [float(v) for v in raw]
    else:
        try:
            values = [float(part) for part in str(raw).split(",")]
        except ValueError:
            raise SevpredictError(f"--weights must be 5 comma-separated numbers, got {raw!r}") from None
    if len(values) != 5:
        raise SevpredictError(f"--weights must list exactly 5 values, got {len(values)}")
    return tuple(values)


def _resolve_settings(args) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    settings = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as err:
                raise SevpredictError(f"config file {config_path}: {err}") from None
        unknown = sorted(set(file_cfg) - set(DEFAULTS))
        if unknown:
            raise SevpredictError(f"config file {config_path}: unknown keys {', '.join(unknown)}")
        settings.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "bst_raw", False):
        settings["bst_oversample"] = False
    settings["weights"] = _parse_weights(settings["weights"])
    return settings


def _resolve_seed(args, settings=None) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if settings is not None and settings.get("seed") is not None:
        return int(settings["seed"])
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SevpredictError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    raise SevpredictError(f"a seed is required: pass --seed or set {SEED_ENV_VAR}")


def _pipeline_config(settings: dict, seed: int) -> PipelineConfig:
    return PipelineConfig(
        seed=seed,
        test_fraction=float(settings["test_fraction"]),
        folds=None if settings["folds"] is None else int(settings["folds"]),
        sampler=SamplerConfig(
            k_neighbors=int(settings["k_neighbors"]),
            beta=float(settings["beta"]),
            d_threshold=float(settings["d_threshold"]),
            seed=seed,
        ),
        tree=TreeConfig(
            min_samples_split=int(settings["min_samples_split"]),
            max_depth=None if settings["max_depth"] is None else int(settings["max_depth"]),
        ),
        selftrain=SelfTrainConfig(
            gamma=float(settings["gamma"]),
            max_iterations=int(settings["max_iterations"]),
            oversample_first=bool(settings["oversample_first"]),
        ),
        econ=EconConfig(delta=float(settings["delta"]), ordinal_weights=settings["weights"]),
        bst_oversample=bool(settings["bst_oversample"]),
    )


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> int:
    try:
        with open(args.csv, newline="") as fh:
            corpus, diagnostics = audit_csv(fh)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 1
    for diag in diagnostics:
        print(diag, file=sys.stderr)
    summary = class_summary(corpus)
    print(f"modules        {summary['modules']}")
    print(f"total_loc      {summary['total_loc']}")
    for cls in SEVERITY_ORDER:
        name = cls.value
        count = summary["class_counts"][name]
        pct = summary["class_percentages"][name]
        print(f"{name:<15}{count}  ({pct}%)")
    print(f"{'unlabelled':<15}{summary['unlabelled']}  ({summary['unlabelled_percentage']}%)")
    return 1 if diagnostics else 0


def _one_line_summary(report) -> str:
    b, a = report.bst, report.ast
    return (
        f"{report.project}: "
        f"BST acc={b.accuracy:.4f} f={b.f_measure_weighted:.4f} psb={b.psb:.4f} rst={b.rst_hours:.2f}h"
        f" | AST acc={a.accuracy:.4f} f={a.f_measure_weighted:.4f} psb={a.psb:.4f} rst={a.rst_hours:.2f}h"
    )


def cmd_run(args) -> int:
    settings = _resolve_settings(args)
    seed = _resolve_seed(args, settings)
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for index, path in enumerate(args.csv):
        corpus = load_corpus(path)
        project = os.path.splitext(os.path.basename(path))[0]
        cfg = _pipeline_config(settings, seed + index)
        if cfg.folds is not None:
            fold_reports = run_kfold(corpus, cfg, project)
            for fold in fold_reports:
                with open(os.path.join(args.out, f"report_{fold.project}.json"), "w") as fh:
                    fh.write(report_to_json(fold))
            report = average_reports(fold_reports, project)
        else:
            report = run_experiment(corpus, cfg, project)
        with open(os.path.join(args.out, f"report_{project}.json"), "w") as fh:
            fh.write(report_to_json(report))
        print(_one_line_summary(report))
        reports.append(report)
    if len(reports) > 1:
        avg = average_reports(reports, "average")
        with open(os.path.join(args.out, "report_average.json"), "w") as fh:
            fh.write(report_to_json(avg))
        print(_one_line_summary(avg))
    if args.table:
        for path in write_comparison_tables(reports, args.out):
            print(f"wrote {path}")
    return 0


def cmd_metrics(args) -> int:
    settings = _resolve_settings(args)
    with open(args.predictions, newline="") as fh:
        outcomes = parse_predictions(fh)
    econ = EconConfig(delta=float(settings["delta"]), ordinal_weights=settings["weights"])
    report = full_report(outcomes, econ)
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "metrics.json")
    with open(json_path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.join(args.out, "metrics.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(REPORT_CSV_HEADER) + "\n")
        fh.write(",".join(repr(v) for v in report.csv_values()) + "\n")
    print(
        f"n={len(outcomes)} acc={report.accuracy:.4f} f={report.f_measure_weighted:.4f} "
        f"psb={report.psb:.4f} lsb={report.lsb:.4f} pre={report.pre:.4f} "
        f"rst={report.rst_hours:.2f}h gst={report.gst_hours:.2f}h system_rf={report.system_rf:.4f}"
    )
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    counts = {
        SeverityClass.HIGH_SEVERITY: args.high_severity,
        SeverityClass.CRITICAL: args.critical,
        SeverityClass.MAJOR: args.major,
        SeverityClass.NON_TRIVIAL: args.non_trivial,
        SeverityClass.CLEAN: args.clean,
    }
    corpus = synth_corpus(counts, args.features, args.separation, args.unlabelled, seed)
    save_corpus(corpus, args.out)
    print(f"wrote {args.out}: {len(corpus.labelled)} labelled + {len(corpus.unlabelled)} unlabelled modules")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sevpredict",
        description="Defect severity prediction: tree self-training with project-economics reporting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a module CSV and print its class summary")
    p_validate.add_argument("csv")
    p_validate.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="train both arms on one or more corpora and write reports")
    p_run.add_argument("csv", nargs="+")
    p_run.add_argument("--config", help="JSON file with the same keys as the flags")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--gamma", type=float, help="pseudo-label acceptance confidence")
    p_run.add_argument("--delta", type=float, help="LoC serviced per hour")
    p_run.add_argument("--k-neighbors", dest="k_neighbors", type=int)
    p_run.add_argument("--beta", type=float, help="fraction of each class deficit to synthesize")
    p_run.add_argument("--test-fraction", dest="test_fraction", type=float)
    p_run.add_argument("--folds", type=int, help="stratified k-fold instead of a single holdout")
    p_run.add_argument("--weights", help="5 comma-separated ordinal weights")
    p_run.add_argument("--max-iterations", dest="max_iterations", type=int)
    p_run.add_argument("--max-depth", dest="max_depth", type=int)
    p_run.add_argument("--bst-raw", dest="bst_raw", action="store_true",
                       help="skip oversampling in the baseline arm")
    p_run.add_argument("--table", action="store_true", help="also write side-by-side CSV tables")
    p_run.add_argument("--out", default=".")
    p_run.set_defaults(func=cmd_run)

    p_metrics = sub.add_parser("metrics", help="score a predictions file (module_id,loc,actual,predicted)")
    p_metrics.add_argument("predictions")
    p_metrics.add_argument("--config", help="JSON file with the same keys as the flags")
    p_metrics.add_argument("--delta", type=float)
    p_metrics.add_argument("--weights")
    p_metrics.add_argument("--out", default=".")
    p_metrics.set_defaults(func=cmd_metrics)

    p_synth = sub.add_parser("synth", help="generate a Gaussian-cluster corpus CSV")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--high-severity", dest="high_severity", type=int, default=0)
    p_synth.add_argument("--critical", type=int, default=0)
    p_synth.add_argument("--major", type=int, default=0)
    p_synth.add_argument("--non-trivial", dest="non_trivial", type=int, default=0)
    p_synth.add_argument("--clean", type=int, default=0)
    p_synth.add_argument("--unlabelled", type=int, default=0)
    p_synth.add_argument("--features", type=int, default=3)
    p_synth.add_argument("--separation", type=float, default=3.0)
    p_synth.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SevpredictError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
