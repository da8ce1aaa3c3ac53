"""Gap-aware benefits adjudication: a staged pipeline that issues a
determination only when every extracted requirement is satisfied by the
stated facts, and otherwise defers with the list of missing information."""

from .backend import BackendConfig, ChatRequest, ChatResponse, HttpBackend, ScriptedBackend, scripted_oracle
from .casefile import CaseFile, Dataset, RedactedCase, load_dataset, split_by_completeness
from .corpus import Corpus, Passage, RetrievalResult, load_corpus, retrieve
from .evalharness import (
    MetricsReport,
    ScoredResult,
    aggregate_metrics,
    bootstrap_ci,
    emit_report,
    error_analysis,
    score_case,
)
from .oracle import RuleOracleBackend
from .pipeline import (
    CaseAborted,
    Determination,
    GapSet,
    PipelineTrace,
    compute_gap,
    run_pipeline,
)
from .runner import ablate, evaluate, run_one

__version__ = "0.1.0"
