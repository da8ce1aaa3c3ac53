"""Scoring and metric aggregation for pipeline runs.

Accuracies are computed in exact rational arithmetic and only converted to
floats at the edge. Confidence intervals are percentile bootstrap with a
seeded PCG64 generator (1000 resamples by default): for each resample,
draw n indices with ``rng.integers(0, n, n)``, take the metric, then the
2.5th/97.5th percentiles with linear interpolation. The procedure is
pinned here so an independent implementation reproduces CIs bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .casefile import CaseFile, missing_count
from .errors import EmptyResults, IdMismatch
from .stages import Determination

REPORT_SCHEMA_VERSION = 1

ERROR_KINDS = (
    "none",
    "false_denial",
    "false_approval",
    "false_deferral",
    "wrong_decision",
    "unparseable",
)

MISSING_LEVELS = ("missing-1", "missing-2", "missing-3", "missing-4")


@dataclass(frozen=True)
class ScoredResult:
    case_id: str
    predicted: str  # a label or "unparseable"
    gold: str
    correct: bool
    completeness: str
    error_kind: str

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "predicted": self.predicted,
            "gold": self.gold,
            "correct": self.correct,
            "completeness": self.completeness,
            "error_kind": self.error_kind,
        }


def classify_error(gold: str, predicted: str) -> str:
    if predicted == gold:
        return "none"
    if predicted == "unparseable":
        return "unparseable"
    if gold == "inconclusive":
        if predicted in ("ineligible", "no"):
            return "false_denial"
        return "false_approval"  # eligible / yes
    if predicted == "inconclusive":
        return "false_deferral"
    return "wrong_decision"


def score_case(prediction: Determination, case: CaseFile) -> ScoredResult:
    if prediction.trace_id and not prediction.trace_id.startswith(case.id + "-"):
        raise IdMismatch(
            f"prediction trace {prediction.trace_id!r} is not for case {case.id!r}"
        )
    predicted = prediction.label
    return ScoredResult(
        case_id=case.id,
        predicted=predicted,
        gold=case.gold_label,
        correct=predicted == case.gold_label,
        completeness=case.completeness,
        error_kind=classify_error(case.gold_label, predicted),
    )


def scored_result_from_dict(obj: dict) -> ScoredResult:
    return ScoredResult(
        case_id=obj["case_id"],
        predicted=obj["predicted"],
        gold=obj["gold"],
        correct=bool(obj["correct"]),
        completeness=obj["completeness"],
        error_kind=obj["error_kind"],
    )


# ---------------------------------------------------------------------------
# Bootstrap


def _percentile(sorted_vals: Sequence[float], p: float) -> float:
    m = len(sorted_vals)
    if m == 1:
        return float(sorted_vals[0])
    h = (m - 1) * p
    f = math.floor(h)
    c = math.ceil(h)
    if f == c:
        return float(sorted_vals[f])
    return float(sorted_vals[f] + (sorted_vals[c] - sorted_vals[f]) * (h - f))


def accuracy_metric(results: Sequence[ScoredResult]) -> float:
    return sum(r.correct for r in results) / len(results)


def bootstrap_ci(
    results: Sequence[ScoredResult],
    metric_selector: Callable[[Sequence[ScoredResult]], float] = accuracy_metric,
    n_resamples: int = 1000,
    seed: int = 42,
) -> tuple[float, float]:
    """95% percentile bootstrap CI; deterministic given the seed."""
    if not results:
        raise EmptyResults("cannot bootstrap an empty result list")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = len(results)
    values = []
    for _ in range(n_resamples):
        idx = rng.integers(0, n, n)
        values.append(metric_selector([results[i] for i in idx]))
    values.sort()
    return _percentile(values, 0.025), _percentile(values, 0.975)


# ---------------------------------------------------------------------------
# Aggregation


@dataclass
class MetricsReport:
    n_total: int
    n_complete: int
    n_inconclusive: int
    accuracy_all: float
    accuracy_complete: float | None
    accuracy_inconclusive: float | None
    accuracy_by_missing_k: dict[str, float]
    error_breakdown: dict[str, int]
    ci_95: dict[str, tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "n_total": self.n_total,
            "n_complete": self.n_complete,
            "n_inconclusive": self.n_inconclusive,
            "accuracy_all": self.accuracy_all,
            "accuracy_complete": self.accuracy_complete,
            "accuracy_inconclusive": self.accuracy_inconclusive,
            "accuracy_by_missing_k": self.accuracy_by_missing_k,
            "error_breakdown": self.error_breakdown,
            "ci_95": {k: list(v) for k, v in self.ci_95.items()},
        }


def report_from_dict(obj: dict) -> MetricsReport:
    return MetricsReport(
        n_total=obj["n_total"],
        n_complete=obj["n_complete"],
        n_inconclusive=obj["n_inconclusive"],
        accuracy_all=obj["accuracy_all"],
        accuracy_complete=obj["accuracy_complete"],
        accuracy_inconclusive=obj["accuracy_inconclusive"],
        accuracy_by_missing_k=dict(obj["accuracy_by_missing_k"]),
        error_breakdown=dict(obj["error_breakdown"]),
        ci_95={k: (v[0], v[1]) for k, v in obj["ci_95"].items()},
    )


def _exact_accuracy(results: Sequence[ScoredResult]) -> Fraction:
    return Fraction(sum(r.correct for r in results), len(results))


def aggregate_metrics(
    results: Sequence[ScoredResult],
    *,
    n_resamples: int = 1000,
    seed: int = 42,
    with_ci: bool = True,
) -> MetricsReport:
    if not results:
        raise EmptyResults("no results to aggregate")
    complete = [r for r in results if r.completeness == "complete"]
    inconclusive = [r for r in results if r.completeness != "complete"]
    by_k: dict[str, float] = {}
    for level in MISSING_LEVELS:
        bucket = [r for r in inconclusive if r.completeness == level]
        if bucket:
            by_k[level] = float(_exact_accuracy(bucket))
    breakdown = {kind: 0 for kind in ERROR_KINDS}
    for r in results:
        breakdown[r.error_kind] += 1
    ci: dict[str, tuple[float, float]] = {}
    if with_ci:
        ci["accuracy_all"] = bootstrap_ci(results, n_resamples=n_resamples, seed=seed)
        if complete:
            ci["accuracy_complete"] = bootstrap_ci(complete, n_resamples=n_resamples, seed=seed)
        if inconclusive:
            ci["accuracy_inconclusive"] = bootstrap_ci(
                inconclusive, n_resamples=n_resamples, seed=seed
            )
    return MetricsReport(
        n_total=len(results),
        n_complete=len(complete),
        n_inconclusive=len(inconclusive),
        accuracy_all=float(_exact_accuracy(results)),
        accuracy_complete=float(_exact_accuracy(complete)) if complete else None,
        accuracy_inconclusive=float(_exact_accuracy(inconclusive)) if inconclusive else None,
        accuracy_by_missing_k=by_k,
        error_breakdown=breakdown,
        ci_95=ci,
    )


def error_analysis(results: Sequence[ScoredResult]) -> dict:
    """Counts and rates of deferral failures among gold-inconclusive cases."""
    inconclusive = [r for r in results if r.gold == "inconclusive"]
    if not inconclusive:
        return {"n": 0, "counts": {}, "rates": {}}
    counts = {"false_denial": 0, "false_approval": 0, "correct_deferral": 0, "unparseable": 0}
    for r in inconclusive:
        if r.correct:
            counts["correct_deferral"] += 1
        elif r.error_kind in ("false_denial", "false_approval", "unparseable"):
            counts[r.error_kind] += 1
    n = len(inconclusive)
    return {
        "n": n,
        "counts": counts,
        "rates": {k: v / n for k, v in counts.items()},
    }


# ---------------------------------------------------------------------------
# Emission


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.2f}"


def emit_report(report: MetricsReport, format: str = "json", *, run_name: str = "run") -> str:
    if format == "json":
        return json.dumps(report.to_dict(), indent=2)
    if format == "markdown":
        lines = [
            "| Run | All Cases | Complete | Inconclusive |",
            "| --- | --- | --- | --- |",
            f"| {run_name} | {_fmt(report.accuracy_all)} | "
            f"{_fmt(report.accuracy_complete)} | {_fmt(report.accuracy_inconclusive)} |",
        ]
        return "\n".join(lines) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["metric", "value"])
        flat = {
            "n_total": report.n_total,
            "n_complete": report.n_complete,
            "n_inconclusive": report.n_inconclusive,
            "accuracy_all": report.accuracy_all,
            "accuracy_complete": report.accuracy_complete,
            "accuracy_inconclusive": report.accuracy_inconclusive,
        }
        flat.update({f"accuracy_{k}": v for k, v in report.accuracy_by_missing_k.items()})
        flat.update({f"errors_{k}": v for k, v in report.error_breakdown.items()})
        for k, (lo, hi) in report.ci_95.items():
            flat[f"ci95_{k}_lower"] = lo
            flat[f"ci95_{k}_upper"] = hi
        for k, v in flat.items():
            w.writerow([k, "" if v is None else v])
        return buf.getvalue()
    raise ValueError(f"unknown report format {format!r}")
