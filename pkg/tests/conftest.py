"""Shared fixtures: the packaged corpus/dataset and cached full-mode runs."""

from __future__ import annotations

import pytest

from adjudicator.casefile import load_dataset
from adjudicator.corpus import load_corpus
from adjudicator.fixtures import corpus_path, dataset_path
from adjudicator.oracle import RuleOracleBackend
from adjudicator.pipeline import run_pipeline


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(corpus_path())


@pytest.fixture(scope="session")
def dataset():
    return load_dataset(dataset_path())


@pytest.fixture(scope="session")
def oracle():
    return RuleOracleBackend()


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call":
                continue
            if "test_acceptance.py" not in str(getattr(rep, "nodeid", "")):
                continue
            name = rep.nodeid.split("::")[-1]
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((name, status))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}: {name}")


@pytest.fixture(scope="session")
def full_runs(corpus, dataset, oracle):
    """(determination, trace) per case, full mode, computed once per session."""
    return {
        case.id: run_pipeline(case, corpus, "full", oracle) for case in dataset.cases
    }
