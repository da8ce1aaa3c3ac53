"""Dataset-scale evaluation: run every case, score, and report.

Cases run in parallel up to the configured worker count; results keep
dataset order, so reports are identical for any worker count. A failed
case is scored as unparseable and the run continues.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .backend import Backend
from .casefile import CaseFile, Dataset
from .corpus import Corpus
from .errors import AdjudicatorError
from .evalharness import MetricsReport, ScoredResult, aggregate_metrics, emit_report, score_case
from .pipeline import CaseAborted, PipelineTrace, run_pipeline
from .prompts import MODES
from .stages import Determination


@dataclass
class CaseRun:
    result: ScoredResult
    trace: PipelineTrace
    failed: bool


def run_one(
    case: CaseFile, corpus: Corpus, mode: str, backend: Backend, *, k: int = 8
) -> CaseRun:
    try:
        det, trace = run_pipeline(case, corpus, mode, backend, k=k)
        return CaseRun(result=score_case(det, case), trace=trace, failed=False)
    except CaseAborted as exc:
        failed_det = Determination(
            label="unparseable",
            reasoning=str(exc),
            missing_information=(),
            trace_id=exc.trace.trace_id,
        )
        return CaseRun(result=score_case(failed_det, case), trace=exc.trace, failed=True)


@dataclass
class EvaluationRun:
    mode: str
    runs: list[CaseRun]
    report: MetricsReport
    error_fraction: float

    @property
    def results(self) -> list[ScoredResult]:
        return [r.result for r in self.runs]


def dataset_hash(dataset: Dataset) -> str:
    payload = json.dumps(dataset.to_list(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def evaluate(
    dataset: Dataset,
    corpus: Corpus,
    mode: str,
    backend: Backend,
    *,
    k: int = 8,
    workers: int = 1,
    seed: int = 42,
    n_resamples: int = 1000,
) -> EvaluationRun:
    def work(case: CaseFile) -> CaseRun:
        return run_one(case, corpus, mode, backend, k=k)

    if workers == 1:
        runs = [work(c) for c in dataset.cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(work, dataset.cases))
    report = aggregate_metrics([r.result for r in runs], seed=seed)
    failed = sum(r.failed for r in runs)
    return EvaluationRun(
        mode=mode, runs=runs, report=report, error_fraction=failed / max(len(runs), 1)
    )


def write_outputs(
    run: EvaluationRun,
    dataset: Dataset,
    out_dir: str | Path,
    *,
    backend_name: str = "backend",
) -> dict[str, Path]:
    """Write per-case traces, scored results, and reports; returns the paths."""
    out = Path(out_dir)
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    for r in run.runs:
        (traces_dir / f"{r.trace.trace_id}.json").write_text(
            r.trace.to_json() + "\n", encoding="utf-8"
        )
    stem = f"{run.mode}-{backend_name}-{dataset_hash(dataset)}"
    paths = {
        "results": out / f"results-{stem}.json",
        "report_json": out / f"report-{stem}.json",
        "report_md": out / f"report-{stem}.md",
        "report_csv": out / f"report-{stem}.csv",
    }
    paths["results"].write_text(
        json.dumps([r.to_dict() for r in run.results], indent=2) + "\n", encoding="utf-8"
    )
    paths["report_json"].write_text(emit_report(run.report, "json") + "\n", encoding="utf-8")
    paths["report_md"].write_text(
        emit_report(run.report, "markdown", run_name=stem), encoding="utf-8"
    )
    paths["report_csv"].write_text(emit_report(run.report, "csv"), encoding="utf-8")
    return paths


def ablate(
    dataset: Dataset,
    corpus: Corpus,
    backend_factory,
    *,
    k: int = 8,
    workers: int = 1,
    seed: int = 42,
) -> dict[str, EvaluationRun]:
    """Run evaluate once per pipeline mode with a fresh backend each time."""
    return {
        mode: evaluate(
            dataset, corpus, mode, backend_factory(), k=k, workers=workers, seed=seed
        )
        for mode in MODES
    }


def ablation_table(runs: dict[str, EvaluationRun]) -> str:
    def fmt(x):
        return "-" if x is None else f"{x:.2f}"

    lines = [
        "| Configuration | All Cases | Complete | Inconclusive |",
        "| --- | --- | --- | --- |",
    ]
    for mode, run in runs.items():
        r = run.report
        lines.append(
            f"| {mode} | {fmt(r.accuracy_all)} | {fmt(r.accuracy_complete)} | "
            f"{fmt(r.accuracy_inconclusive)} |"
        )
    return "\n".join(lines) + "\n"
