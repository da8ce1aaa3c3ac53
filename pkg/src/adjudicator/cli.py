"""Command-line entry points: adjudicate, evaluate, ablate, serve.

Exit codes for `adjudicate`: 0 on a determination, 10 on inconclusive (so
shell pipelines can branch on deferral), 1 on any error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .casefile import QUESTION_TYPES, RedactedCase, load_dataset
from .config import RunConfig, apply_overrides, load_config, make_backend
from .corpus import load_corpus
from .errors import AdjudicatorError
from .pipeline import CaseAborted, run_pipeline
from .prompts import MODES
from .runner import ablate as run_ablation
from .runner import ablation_table, evaluate, write_outputs

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 10


def _build_config(config_path, **overrides) -> RunConfig:
    base = load_config(config_path) if config_path else RunConfig(corpus_path="")
    return apply_overrides(base, **overrides)


_shared_options = [
    click.option("--config", "config_path", type=click.Path(), help="TOML or JSON run config."),
    click.option("--corpus", "corpus_path", type=click.Path(), help="Corpus file or directory."),
    click.option("--dataset", "dataset_path", type=click.Path(), help="Dataset JSON file."),
    click.option("--mode", type=click.Choice(MODES), default=None, help="Pipeline mode."),
    click.option("--backend", "backend_kind", type=str, default=None,
                 help="Backend kind override (rule-oracle or http)."),
    click.option("--seed", type=int, default=None),
    click.option("--workers", type=int, default=None),
    click.option("--k", "retrieval_k", type=int, default=None, help="Passages to retrieve."),
    click.option("--out", "output_dir", type=click.Path(), default=None),
]


def shared_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


def _config_from_cli(config_path, backend_kind, **overrides) -> RunConfig:
    cfg = _build_config(config_path, **overrides)
    if backend_kind:
        cfg = apply_overrides(cfg, backend={"kind": backend_kind})
    return cfg


@click.group()
def main() -> None:
    """Gap-aware benefits adjudication pipeline."""


@main.command()
@shared_options
@click.option("--case-id", default=None, help="Id of a dataset case to run.")
@click.option("--narrative", default=None, help="Ad-hoc case narrative.")
@click.option("--question-type", type=click.Choice(QUESTION_TYPES), default="eligibility")
def adjudicate(config_path, backend_kind, case_id, narrative, question_type, **overrides):
    """Run one case and print the determination."""
    try:
        cfg = _config_from_cli(config_path, backend_kind, **overrides).validated(
            need_dataset=case_id is not None
        )
        corpus = load_corpus(cfg.corpus_path)
        backend = make_backend(cfg.backend)
        if case_id is not None:
            case = load_dataset(cfg.dataset_path).get(case_id)
        elif narrative:
            case = RedactedCase(id="adhoc", narrative=narrative, question_type=question_type)
        else:
            raise AdjudicatorError("provide --case-id or --narrative")
        det, trace = run_pipeline(case, corpus, cfg.mode, backend, k=cfg.retrieval_k)
        out = Path(cfg.output_dir) / "traces"
        out.mkdir(parents=True, exist_ok=True)
        trace_path = out / f"{trace.trace_id}.json"
        trace_path.write_text(trace.to_json() + "\n", encoding="utf-8")
    except (AdjudicatorError, CaseAborted, KeyError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    click.echo(f"label: {det.label}")
    click.echo(f"reasoning: {det.reasoning}")
    if det.missing_information:
        click.echo("missing information:")
        for line in det.missing_information:
            click.echo(f"  - {line}")
    click.echo(f"trace: {trace_path}")
    sys.exit(EXIT_INCONCLUSIVE if det.label == "inconclusive" else EXIT_OK)


@main.command("evaluate")
@shared_options
def evaluate_cmd(config_path, backend_kind, **overrides):
    """Run every dataset case and write traces, results, and reports."""
    try:
        cfg = _config_from_cli(config_path, backend_kind, **overrides).validated(need_dataset=True)
        corpus = load_corpus(cfg.corpus_path)
        dataset = load_dataset(cfg.dataset_path)
        backend = make_backend(cfg.backend)
        run = evaluate(
            dataset, corpus, cfg.mode, backend,
            k=cfg.retrieval_k, workers=cfg.workers, seed=cfg.seed,
        )
        paths = write_outputs(
            run, dataset, cfg.output_dir, backend_name=cfg.backend.get("kind", "backend")
        )
    except (AdjudicatorError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    click.echo(json.dumps(run.report.to_dict(), indent=2))
    for name, p in paths.items():
        click.echo(f"{name}: {p}")
    if run.error_fraction > 0.10:
        click.echo(
            f"error: {run.error_fraction:.0%} of cases failed (threshold 10%)", err=True
        )
        sys.exit(EXIT_ERROR)
    sys.exit(EXIT_OK)


@main.command("ablate")
@shared_options
def ablate_cmd(config_path, backend_kind, **overrides):
    """Run evaluate for every pipeline mode and print a comparison table."""
    try:
        cfg = _config_from_cli(config_path, backend_kind, **overrides).validated(need_dataset=True)
        corpus = load_corpus(cfg.corpus_path)
        dataset = load_dataset(cfg.dataset_path)
        runs = run_ablation(
            dataset, corpus, lambda: make_backend(cfg.backend),
            k=cfg.retrieval_k, workers=cfg.workers, seed=cfg.seed,
        )
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for mode, run in runs.items():
            write_outputs(
                run, dataset, out / mode, backend_name=cfg.backend.get("kind", "backend")
            )
        table = ablation_table(runs)
        (out / "ablation.md").write_text(table, encoding="utf-8")
    except (AdjudicatorError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    click.echo(table)
    sys.exit(EXIT_OK)


@main.command()
@shared_options
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8700)
def serve(config_path, backend_kind, host, port, **overrides):
    """Serve the HTTP API for the case-review workbench."""
    import uvicorn

    from .service import create_app

    try:
        cfg = _config_from_cli(config_path, backend_kind, **overrides).validated()
        app = create_app(cfg)
    except AdjudicatorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
