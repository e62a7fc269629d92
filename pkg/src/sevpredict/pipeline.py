"""End-to-end experiment: split, train both arms, evaluate, compare.

The baseline arm (BST) fits one tree on the labelled training data,
balanced by default. The self-training arm (AST) additionally absorbs
confident pseudo-labels from the unlabelled pool. Both arms are scored on
the identical held-out test set, so their metric deltas isolate the
contribution of the unlabelled data.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace
from typing import Sequence

from .adasyn import SamplerConfig, adasyn_balance
from .cart import DecisionTree, TreeConfig, fit_tree, predict_label
from .corpus import Corpus, LabelledInstance, class_summary, stratified_kfold, stratified_split
from .errors import SevpredictError
from .metrics import EconConfig, MetricReport, Outcome, OutcomeSet, full_report
from .selftrain import SelfTrainConfig, SelfTrainTrace, self_train
from .severity import DEFECTIVE_CLASSES


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    test_fraction: float = 0.2
    folds: int | None = None
    sampler: SamplerConfig = SamplerConfig()
    tree: TreeConfig = TreeConfig()
    selftrain: SelfTrainConfig = SelfTrainConfig()
    econ: EconConfig = EconConfig()
    bst_oversample: bool = True  # False gives the raw-baseline reading

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise SevpredictError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.folds is not None and self.folds < 2:
            raise SevpredictError(f"folds must be >= 2, got {self.folds}")

    @classmethod
    def with_seed(cls, seed: int, **overrides) -> "PipelineConfig":
        """Config whose sampler seed is wired to the base seed."""
        overrides.setdefault("sampler", SamplerConfig(seed=seed))
        return cls(seed=seed, **overrides)

    def reseeded(self, seed: int) -> "PipelineConfig":
        return replace(self, seed=seed, sampler=replace(self.sampler, seed=seed))


@dataclass
class ExperimentReport:
    project: str
    corpus_summary: dict
    training: dict
    bst: MetricReport
    ast: MetricReport
    deltas: dict
    trace: SelfTrainTrace | None
    test_outcomes: list[dict]
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "project": self.project,
            "corpus": self.corpus_summary,
            "training": self.training,
            "bst": self.bst.to_json_dict(),
            "ast": self.ast.to_json_dict(),
            "deltas": self.deltas,
            "self_training": self.trace.to_dict() if self.trace is not None else None,
            "test_outcomes": self.test_outcomes,
            "config": self.config,
        }


def report_to_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"


SCALAR_FIELDS: tuple[str, ...] = (
    "accuracy",
    "f_measure_macro",
    "f_measure_weighted",
    "system_rf",
    "ptn",
    "psb",
    "saved_budget",
    "lsb",
    "pntn",
    "pre",
    "remaining_edits",
    "rst_hours",
    "gst_hours",
)


def compare(baseline: MetricReport, other: MetricReport) -> dict:
    """Field-wise deltas (other minus baseline) over comparable reports."""
    if baseline.delta != other.delta or baseline.ordinal_weights != other.ordinal_weights:
        raise SevpredictError("cannot compare reports computed under different economics configs")
    deltas: dict = {name: getattr(other, name) - getattr(baseline, name) for name in SCALAR_FIELDS}
    deltas["risk_factor"] = {
        name: other.risk_factor[name] - baseline.risk_factor[name] for name in baseline.risk_factor
    }
    return deltas


def _evaluate(tree: DecisionTree, test: Sequence[LabelledInstance]) -> OutcomeSet:
    return OutcomeSet(
        Outcome(inst.label, predict_label(tree, inst.features), inst.loc, inst.module_id)
        for inst in test
    )


def _config_echo(cfg: PipelineConfig) -> dict:
    return {
        "seed": cfg.seed,
        "test_fraction": cfg.test_fraction,
        "folds": cfg.folds,
        "bst_oversample": cfg.bst_oversample,
        "k_neighbors": cfg.sampler.k_neighbors,
        "beta": cfg.sampler.beta,
        "d_threshold": cfg.sampler.d_threshold,
        "sampler_seed": cfg.sampler.seed,
        "min_samples_split": cfg.tree.min_samples_split,
        "max_depth": cfg.tree.max_depth,
        "gamma": cfg.selftrain.gamma,
        "max_iterations": cfg.selftrain.max_iterations,
        "oversample_first": cfg.selftrain.oversample_first,
        "delta": cfg.econ.delta,
        "ordinal_weights": list(cfg.econ.ordinal_weights),
    }


def _run_arms(
    corpus: Corpus,
    train: Corpus,
    test: Sequence[LabelledInstance],
    cfg: PipelineConfig,
    project: str,
) -> ExperimentReport:
    if not test:
        raise SevpredictError("test split is empty; raise test_fraction or enlarge the corpus")
    train_labelled = list(train.labelled)
    bst_train = (
        adasyn_balance(train_labelled, cfg.sampler) if cfg.bst_oversample else train_labelled
    )
    bst_tree = fit_tree(bst_train, cfg.tree, corpus.schema)

    st = self_train(
        train_labelled, list(train.unlabelled), cfg.selftrain, cfg.tree, cfg.sampler, corpus.schema
    )

    bst_outcomes = _evaluate(bst_tree, test)
    ast_outcomes = _evaluate(st.tree, test)
    bst_report = full_report(bst_outcomes, cfg.econ)
    ast_report = full_report(ast_outcomes, cfg.econ)

    accepted = sum(inst.provenance == "pseudo" for inst in st.labelled)
    test_rows = [
        {
            "module_id": b.module_id,
            "loc": b.loc,
            "actual": b.actual.value,
            "bst": b.predicted.value,
            "ast": a.predicted.value,
        }
        for b, a in zip(bst_outcomes, ast_outcomes)
    ]
    return ExperimentReport(
        project=project,
        corpus_summary=class_summary(corpus),
        training={
            "bst_train_size": len(bst_train),
            "ast_train_size": len(st.labelled),
            "accepted_pseudo": accepted,
            "residual_unlabelled": len(st.residual_unlabelled),
            "test_modules": len(test),
            "test_total_loc": sum(i.loc for i in test),
        },
        bst=bst_report,
        ast=ast_report,
        deltas=compare(bst_report, ast_report),
        trace=st.trace,
        test_outcomes=test_rows,
        config=_config_echo(cfg),
    )


def run_experiment(corpus: Corpus, cfg: PipelineConfig, project: str = "corpus") -> ExperimentReport:
    """Single stratified holdout run of both arms on one corpus."""
    if len({inst.label for inst in corpus.labelled}) < 2:
        raise SevpredictError("experiment needs at least 2 labelled classes")
    train, test = stratified_split(corpus, cfg.test_fraction, cfg.seed)
    return _run_arms(corpus, train, test, cfg, project)


def run_kfold(corpus: Corpus, cfg: PipelineConfig, project: str = "corpus") -> list[ExperimentReport]:
    """One experiment per stratified fold, with per-fold derived seeds."""
    if cfg.folds is None:
        raise SevpredictError("run_kfold needs cfg.folds")
    if len({inst.label for inst in corpus.labelled}) < 2:
        raise SevpredictError("experiment needs at least 2 labelled classes")
    reports = []
    for i, (train, test) in enumerate(stratified_kfold(corpus, cfg.folds, cfg.seed)):
        fold_cfg = cfg.reseeded(cfg.seed + i)
        reports.append(_run_arms(corpus, train, test, fold_cfg, f"{project}_fold{i}"))
    return reports


def _mean_metric_report(reports: Sequence[MetricReport]) -> MetricReport:
    first = reports[0]
    for other in reports[1:]:
        if other.delta != first.delta or other.ordinal_weights != first.ordinal_weights:
            raise SevpredictError("cannot average reports computed under different economics configs")
    n = len(reports)
    mean = lambda name: sum(getattr(r, name) for r in reports) / n
    per_class = {
        cls: {
            score: sum(r.per_class[cls][score] for r in reports) / n
            for score in ("precision", "recall", "f1")
        }
        for cls in first.per_class
    }
    rf = {cls: sum(r.risk_factor[cls] for r in reports) / n for cls in first.risk_factor}
    return MetricReport(
        accuracy=mean("accuracy"),
        per_class=per_class,
        f_measure_macro=mean("f_measure_macro"),
        f_measure_weighted=mean("f_measure_weighted"),
        risk_factor=rf,
        system_rf=mean("system_rf"),
        ptn=mean("ptn"),
        psb=mean("psb"),
        saved_budget=mean("saved_budget"),
        lsb=mean("lsb"),
        pntn=mean("pntn"),
        pre=mean("pre"),
        remaining_edits=mean("remaining_edits"),
        rst_hours=mean("rst_hours"),
        gst_hours=mean("gst_hours"),
        delta=first.delta,
        ordinal_weights=first.ordinal_weights,
    )


def average_reports(reports: Sequence[ExperimentReport], project: str = "average") -> ExperimentReport:
    """Unweighted mean of several runs (folds or projects)."""
    if not reports:
        raise SevpredictError("nothing to average")
    bst = _mean_metric_report([r.bst for r in reports])
    ast = _mean_metric_report([r.ast for r in reports])
    n = len(reports)
    training = {
        key: sum(r.training[key] for r in reports) / n for key in reports[0].training
    }
    return ExperimentReport(
        project=project,
        corpus_summary={"aggregated_from": [r.project for r in reports]},
        training=training,
        bst=bst,
        ast=ast,
        deltas=compare(bst, ast),
        trace=None,
        test_outcomes=[],
        config=reports[0].config,
    )


# ---------------------------------------------------------------------------
# Comparison tables: one row per report, BST and AST side by side.

RISK_TABLE_HEADER = (
    ["project"]
    + [f"{cls.value}_{arm}" for cls in DEFECTIVE_CLASSES for arm in ("bst", "ast")]
    + ["system_rf_bst", "system_rf_ast"]
)

PERFORMANCE_TABLE_HEADER = ["project"] + [
    f"{name}_{arm}"
    for name in ("accuracy", "f_measure", "psb", "lsb", "pre", "rst", "gst")
    for arm in ("bst", "ast")
]

BUDGET_TABLE_HEADER = [
    "project",
    "total_loc",
    "saved_budget_bst",
    "saved_budget_ast",
    "remaining_edits_bst",
    "remaining_edits_ast",
]


def _risk_row(r: ExperimentReport) -> list:
    row: list = [r.project]
    for cls in DEFECTIVE_CLASSES:
        row += [f"{r.bst.risk_factor[cls.value]:.4f}", f"{r.ast.risk_factor[cls.value]:.4f}"]
    row += [f"{r.bst.system_rf:.4f}", f"{r.ast.system_rf:.4f}"]
    return row


def _performance_row(r: ExperimentReport) -> list:
    pairs = [
        (r.bst.accuracy, r.ast.accuracy),
        (r.bst.f_measure_weighted, r.ast.f_measure_weighted),
        (r.bst.psb, r.ast.psb),
        (r.bst.lsb, r.ast.lsb),
        (r.bst.pre, r.ast.pre),
        (r.bst.rst_hours, r.ast.rst_hours),
        (r.bst.gst_hours, r.ast.gst_hours),
    ]
    row: list = [r.project]
    for i, (b, a) in enumerate(pairs):
        fmt = "{:.2f}" if i >= 5 else "{:.4f}"
        row += [fmt.format(b), fmt.format(a)]
    return row


def _fmt_loc(value) -> str:
    f = float(value)
    return str(int(f)) if f.is_integer() else f"{f:.2f}"


def _budget_row(r: ExperimentReport) -> list:
    return [
        r.project,
        _fmt_loc(r.training["test_total_loc"]),
        _fmt_loc(r.bst.saved_budget),
        _fmt_loc(r.ast.saved_budget),
        _fmt_loc(r.bst.remaining_edits),
        _fmt_loc(r.ast.remaining_edits),
    ]


def write_comparison_tables(reports: Sequence[ExperimentReport], out_dir) -> list[str]:
    """Write the three side-by-side CSV tables; returns the file paths.

    With several reports the risk and performance tables gain an unweighted
    average row and the budget table a total row.
    """
    risk_rows = [_risk_row(r) for r in reports]
    perf_rows = [_performance_row(r) for r in reports]
    budget_rows = [_budget_row(r) for r in reports]
    if len(reports) > 1:
        avg = average_reports(reports, "average")
        risk_rows.append(_risk_row(avg))
        perf_rows.append(_performance_row(avg))
        budget_rows.append(
            [
                "total",
                _fmt_loc(sum(r.training["test_total_loc"] for r in reports)),
                _fmt_loc(sum(r.bst.saved_budget for r in reports)),
                _fmt_loc(sum(r.ast.saved_budget for r in reports)),
                _fmt_loc(sum(r.bst.remaining_edits for r in reports)),
                _fmt_loc(sum(r.ast.remaining_edits for r in reports)),
            ]
        )
    paths = []
    for name, header, rows in (
        ("risk_factors.csv", RISK_TABLE_HEADER, risk_rows),
        ("performance.csv", PERFORMANCE_TABLE_HEADER, perf_rows),
        ("budget_edits.csv", BUDGET_TABLE_HEADER, budget_rows),
    ):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        paths.append(path)
    return paths
