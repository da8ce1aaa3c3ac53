"""The staged adjudication pipeline and its determination gate.

Flow per case: retrieve -> (planner | static prompts) -> active agent
stages -> compute_gap -> decide. The gate is code, not prompt: when the
gap set is non-empty the label is "inconclusive" and no determination
backend call is made. Every run yields a self-contained trace with raw
model output stored verbatim.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field

from . import prompts as P
from .backend import Backend, ChatRequest, ChatResponse
from .casefile import CaseFile, RedactedCase, labels_for
from .corpus import Corpus, Passage, RetrievalResult, retrieve
from .errors import AdjudicatorError, CoverageGap, EmptyChecklist
from .stages import (
    Assessment,
    Checklist,
    Determination,
    Gap,
    GapSet,
    SupervisorVerdict,
    ValidationFailure,
    mechanical_recommendation,
    parse_assessments,
    parse_checklist,
    parse_determination,
    parse_planner,
    parse_supervisor,
)

TRACE_SCHEMA_VERSION = 1
DEFAULT_RETRIEVAL_K = 8

NEEDED_INFO_TEMPLATE = "Provide facts establishing: {text}"


class CaseAborted(AdjudicatorError):
    """A stage failed; carries the partial trace for the record."""

    def __init__(self, stage: str, cause: Exception, trace: "PipelineTrace"):
        super().__init__(f"case aborted at stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause
        self.trace = trace


@dataclass
class StageRecord:
    stage: str
    system_prompt: str
    user_prompt: str
    raw_text: str
    parsed: dict | None
    attempts: int
    latency_ms: int

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "system_prompt": self.system_prompt,
            "user_prompt": self.user_prompt,
            "raw_text": self.raw_text,
            "parsed": self.parsed,
            "attempts": self.attempts,
            "latency_ms": self.latency_ms,
        }


@dataclass
class PipelineTrace:
    """Append-only record of one case run; replayable without the corpus."""

    trace_id: str
    case_id: str
    mode: str
    retrieved: list[dict] = field(default_factory=list)
    passages: list[dict] = field(default_factory=list)
    planner: dict | None = None
    stage_records: list[StageRecord] = field(default_factory=list)
    supervisor_disagreed: bool = False
    overrides: list[dict] = field(default_factory=list)
    gap_set: dict | None = None
    determination: dict | None = None
    prompt_template_hash: str = P.TEMPLATE_SET_HASH
    error: dict | None = None
    duration_ms: int = 0
    schema_version: int = TRACE_SCHEMA_VERSION

    @property
    def backend_calls(self) -> int:
        return len(self.stage_records) + (1 if self.planner is not None else 0)

    def all_prompts(self) -> list[str]:
        """Every prompt string sent to the backend during this run."""
        out = []
        if self.planner is not None:
            out.extend([self.planner["system_prompt"], self.planner["user_prompt"]])
        for r in self.stage_records:
            out.extend([r.system_prompt, r.user_prompt])
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "trace_id": self.trace_id,
            "case_id": self.case_id,
            "mode": self.mode,
            "prompt_template_hash": self.prompt_template_hash,
            "retrieved": self.retrieved,
            "passages": self.passages,
            "planner": self.planner,
            "stage_records": [r.to_dict() for r in self.stage_records],
            "supervisor_disagreed": self.supervisor_disagreed,
            "overrides": self.overrides,
            "gap_set": self.gap_set,
            "determination": self.determination,
            "error": self.error,
            "duration_ms": self.duration_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _trace_id(case_id: str, mode: str, narrative: str, seq: int) -> str:
    h = hashlib.sha256(f"{case_id}\x00{mode}\x00{narrative}\x00{seq}".encode()).hexdigest()
    return f"{case_id}-{mode}-{h[:12]}"


def _position(stage: str, mode: str) -> str:
    order = P.MODE_STAGES[mode]
    names = {
        "extract": "requirements extraction",
        "verify": "fact verification",
        "supervise": "supervisory review",
        "extract_verify": "combined extraction and verification",
        "verify_supervise": "combined verification and supervisory review",
        "single": "combined extraction, verification, and supervisory review",
        "decide": "determination",
    }
    idx = order.index(stage) + 1
    return f"Stage {idx} of {len(order)} ({names[stage]}) in the adjudication pipeline."


# ---------------------------------------------------------------------------
# Stage operations


def plan_prompts(
    case: RedactedCase, passages: list[Passage], mode: str, backend: Backend
) -> tuple[P.StagePrompts, ChatResponse, ChatRequest]:
    """Run the planner call and turn its output into per-stage instructions."""
    if mode not in P.PLANNER_MODES:
        raise ValueError(f"mode {mode!r} does not use the dynamic planner")
    request = ChatRequest(
        system_prompt=P.SCAFFOLDS["plan"],
        user_prompt=P.planner_user_prompt(case, passages, mode),
        response_schema_id="planner",
        stage="plan",
        case_id=case.id,
    )
    response = backend.complete(request)
    instructions = parse_planner(response.parsed)
    return (
        P.StagePrompts(mode=mode, instructions=instructions, source="planner"),
        response,
        request,
    )


def static_prompts(mode: str) -> P.StagePrompts:
    return P.static_prompts(mode)


def _run_stage(
    stage: str,
    *,
    case: RedactedCase,
    passages: list[Passage],
    sp: P.StagePrompts,
    backend: Backend,
    prior_outputs: list[tuple[str, str]],
    context: dict,
) -> tuple[ChatResponse, ChatRequest]:
    request = ChatRequest(
        system_prompt=P.SCAFFOLDS[stage],
        user_prompt=P.stage_user_prompt(
            stage,
            case=case,
            passages=passages,
            prompts=sp,
            position=_position(stage, sp.mode),
            prior_outputs=prior_outputs,
        ),
        response_schema_id=P.STAGE_SCHEMAS[stage],
        stage=stage,
        case_id=case.id,
        context=context,
    )
    return backend.complete(request), request


def extract_checklist(
    case: RedactedCase,
    passages: list[Passage],
    sp: P.StagePrompts,
    backend: Backend,
) -> tuple[Checklist, ChatResponse, ChatRequest]:
    if not passages:
        raise ValueError("extract_checklist requires at least one passage")
    allowed = [p.id for p in passages]
    response, request = _run_stage(
        "extract",
        case=case,
        passages=passages,
        sp=sp,
        backend=backend,
        prior_outputs=[],
        context={"narrative": case.narrative, "allowed_passage_ids": allowed},
    )
    checklist = parse_checklist(response.parsed)
    _check_sources(checklist, allowed)
    if not checklist.items:
        raise EmptyChecklist(f"case {case.id}: extraction produced zero checklist items")
    return checklist, response, request


def _check_sources(checklist: Checklist, allowed: list[str]) -> None:
    extra = set(checklist.source_passage_ids) - set(allowed)
    if extra:
        raise ValidationFailure(
            f"checklist cites passages that were not retrieved: {sorted(extra)}"
        )


def verify_facts(
    case: RedactedCase,
    checklist: Checklist,
    passages: list[Passage],
    sp: P.StagePrompts,
    backend: Backend,
) -> tuple[tuple[Assessment, ...], ChatResponse, ChatRequest]:
    if not checklist.items:
        raise EmptyChecklist(f"case {case.id}: cannot verify an empty checklist")
    response, request = _run_stage(
        "verify",
        case=case,
        passages=passages,
        sp=sp,
        backend=backend,
        prior_outputs=[("CHECKLIST (JSON)", json.dumps(checklist.to_dict(), indent=2))],
        context={"narrative": case.narrative, "expected_item_ids": checklist.item_ids()},
    )
    assessments = parse_assessments(
        response.parsed, narrative=case.narrative, expected_item_ids=checklist.item_ids()
    )
    return assessments, response, request


def supervise(
    case: RedactedCase,
    checklist: Checklist,
    assessments: tuple[Assessment, ...],
    passages: list[Passage],
    sp: P.StagePrompts,
    backend: Backend,
) -> tuple[SupervisorVerdict, bool, ChatResponse, ChatRequest]:
    response, request = _run_stage(
        "supervise",
        case=case,
        passages=passages,
        sp=sp,
        backend=backend,
        prior_outputs=[
            ("CHECKLIST (JSON)", json.dumps(checklist.to_dict(), indent=2)),
            (
                "ASSESSMENTS (JSON)",
                json.dumps({"assessments": [a.to_dict() for a in assessments]}, indent=2),
            ),
        ],
        context={"narrative": case.narrative, "expected_item_ids": checklist.item_ids()},
    )
    verdict, disagreed = parse_supervisor(
        response.parsed, narrative=case.narrative, expected_item_ids=checklist.item_ids()
    )
    return verdict, disagreed, response, request


def compute_gap(checklist: Checklist, final_assessments: tuple[Assessment, ...]) -> GapSet:
    """The items left unaddressed as critical gaps. Pure; no backend call."""
    if sorted(a.item_id for a in final_assessments) != sorted(checklist.item_ids()):
        raise CoverageGap("final assessments do not cover the checklist exactly")
    gaps = []
    for a in final_assessments:
        if a.status == "unaddressed" and a.criticality == "critical_gap":
            item = checklist.get(a.item_id)
            gaps.append(
                Gap(
                    item_id=item.item_id,
                    requirement_text=item.text,
                    needed_information=NEEDED_INFO_TEMPLATE.format(text=item.text),
                )
            )
    return GapSet(gaps=tuple(gaps))


def decide(
    case: RedactedCase,
    checklist: Checklist,
    verdict: SupervisorVerdict,
    gap: GapSet,
    passages: list[Passage],
    sp: P.StagePrompts,
    backend: Backend,
) -> tuple[Determination, ChatResponse | None, ChatRequest | None]:
    """Gate plus determination. When gaps exist no backend call is made."""
    if gap:
        return (
            Determination(
                label="inconclusive",
                reasoning=(
                    f"Determination withheld: {len(gap.gaps)} critical requirement(s) "
                    "lack factual support."
                ),
                missing_information=tuple(g.needed_information for g in gap.gaps),
            ),
            None,
            None,
        )
    response, request = _run_stage(
        "decide",
        case=case,
        passages=passages,
        sp=sp,
        backend=backend,
        prior_outputs=[
            ("CHECKLIST (JSON)", json.dumps(checklist.to_dict(), indent=2)),
            ("SUPERVISOR VERDICT (JSON)", json.dumps(verdict.to_dict(), indent=2)),
            ("GAP SET (JSON)", json.dumps(gap.to_dict(), indent=2)),
        ],
        context={"narrative": case.narrative, "question_type": case.question_type},
    )
    label, reasoning = parse_determination(response.parsed, question_type=case.question_type)
    return (
        Determination(label=label, reasoning=reasoning, missing_information=()),
        response,
        request,
    )


# ---------------------------------------------------------------------------
# Lenient label extraction for the single-call baseline/enhanced modes

_LABEL_RES = {label: re.compile(rf"\b{label}\b", re.IGNORECASE) for label in
              ("eligible", "ineligible", "inconclusive", "yes", "no")}


def extract_label(text: str, question_type: str) -> str:
    """Last occurrence of a label keyword; absence -> 'unparseable'."""
    best_pos, best_label = -1, "unparseable"
    for label in labels_for(question_type):
        for m in _LABEL_RES[label].finditer(text):
            if m.start() > best_pos:
                best_pos, best_label = m.start(), label
    return best_label


# ---------------------------------------------------------------------------
# Orchestration


def _redact(case: CaseFile | RedactedCase) -> RedactedCase:
    return case.redacted() if isinstance(case, CaseFile) else case


def run_pipeline(
    case: CaseFile | RedactedCase,
    corpus: Corpus,
    mode: str,
    backend: Backend,
    *,
    k: int = DEFAULT_RETRIEVAL_K,
    trace_seq: int = 0,
) -> tuple[Determination, PipelineTrace]:
    """Run one case end to end. Raises CaseAborted (carrying the partial
    trace) when any stage fails."""
    if mode not in P.MODES:
        raise ValueError(f"unknown mode {mode!r}")
    rcase = _redact(case)
    start = time.monotonic()
    trace = PipelineTrace(
        trace_id=_trace_id(rcase.id, mode, rcase.narrative, trace_seq),
        case_id=rcase.id,
        mode=mode,
    )

    def finish(det: Determination) -> tuple[Determination, PipelineTrace]:
        det = Determination(
            label=det.label,
            reasoning=det.reasoning,
            missing_information=det.missing_information,
            trace_id=trace.trace_id,
        )
        trace.determination = det.to_dict()
        trace.duration_ms = int((time.monotonic() - start) * 1000)
        return det, trace

    def record(stage: str, request: ChatRequest, response: ChatResponse) -> None:
        trace.stage_records.append(
            StageRecord(
                stage=stage,
                system_prompt=request.system_prompt,
                user_prompt=request.user_prompt,
                raw_text=response.raw_text,
                parsed=response.parsed,
                attempts=response.attempts,
                latency_ms=response.latency_ms,
            )
        )

    stage = "retrieve"
    try:
        results = retrieve(rcase.narrative, corpus, k)
        passages = [corpus.get(r.passage_id) for r in results]
        trace.retrieved = [
            {"passage_id": r.passage_id, "score": r.score, "rank": r.rank} for r in results
        ]
        trace.passages = [p.to_dict() for p in passages]

        if mode in ("baseline", "enhanced"):
            stage = "answer"
            request = ChatRequest(
                system_prompt=P.SCAFFOLDS[mode],
                user_prompt=P.case_sections(rcase, passages)
                + P.section("OUTPUT FORMAT", P.OUTPUT_FORMATS["free_text"]),
                response_schema_id="free_text",
                stage="answer",
                case_id=rcase.id,
            )
            response = backend.complete(request)
            record("answer", request, response)
            label = extract_label(response.raw_text, rcase.question_type)
            return finish(
                Determination(label=label, reasoning=response.raw_text, missing_information=())
            )

        if mode in P.PLANNER_MODES:
            stage = "plan"
            sp, presp, preq = plan_prompts(rcase, passages, mode, backend)
            trace.planner = {
                "system_prompt": preq.system_prompt,
                "user_prompt": preq.user_prompt,
                "raw_text": presp.raw_text,
                "parsed": presp.parsed,
                "attempts": presp.attempts,
                "latency_ms": presp.latency_ms,
            }
        else:
            sp = static_prompts(mode)

        checklist: Checklist
        verdict: SupervisorVerdict

        if mode in ("full", "static-prompting"):
            stage = "extract"
            checklist, resp, req = extract_checklist(rcase, passages, sp, backend)
            record("extract", req, resp)
            stage = "verify"
            assessments, resp, req = verify_facts(rcase, checklist, passages, sp, backend)
            record("verify", req, resp)
            stage = "supervise"
            verdict, disagreed, resp, req = supervise(
                rcase, checklist, assessments, passages, sp, backend
            )
            record("supervise", req, resp)
            trace.supervisor_disagreed = disagreed
        elif mode == "no-extractor":
            stage = "extract_verify"
            resp, req = _run_stage(
                "extract_verify",
                case=rcase,
                passages=passages,
                sp=sp,
                backend=backend,
                prior_outputs=[],
                context={"narrative": rcase.narrative, "allowed_passage_ids": [p.id for p in passages]},
            )
            record("extract_verify", req, resp)
            checklist = parse_checklist(resp.parsed["checklist"])
            _check_sources(checklist, [p.id for p in passages])
            if not checklist.items:
                raise EmptyChecklist(f"case {rcase.id}: extraction produced zero checklist items")
            assessments = parse_assessments(
                {"assessments": resp.parsed["assessments"]},
                narrative=rcase.narrative,
                expected_item_ids=checklist.item_ids(),
            )
            stage = "supervise"
            verdict, disagreed, resp, req = supervise(
                rcase, checklist, assessments, passages, sp, backend
            )
            record("supervise", req, resp)
            trace.supervisor_disagreed = disagreed
        elif mode == "no-supervisor":
            stage = "extract"
            checklist, resp, req = extract_checklist(rcase, passages, sp, backend)
            record("extract", req, resp)
            stage = "verify_supervise"
            resp, req = _run_stage(
                "verify_supervise",
                case=rcase,
                passages=passages,
                sp=sp,
                backend=backend,
                prior_outputs=[("CHECKLIST (JSON)", json.dumps(checklist.to_dict(), indent=2))],
                context={"narrative": rcase.narrative, "expected_item_ids": checklist.item_ids()},
            )
            record("verify_supervise", req, resp)
            verdict, disagreed = parse_supervisor(
                resp.parsed["supervisor"],
                narrative=rcase.narrative,
                expected_item_ids=checklist.item_ids(),
            )
            trace.supervisor_disagreed = disagreed
        elif mode == "single-agent":
            stage = "single"
            resp, req = _run_stage(
                "single",
                case=rcase,
                passages=passages,
                sp=sp,
                backend=backend,
                prior_outputs=[],
                context={"narrative": rcase.narrative, "allowed_passage_ids": [p.id for p in passages]},
            )
            record("single", req, resp)
            checklist = parse_checklist(resp.parsed["checklist"])
            _check_sources(checklist, [p.id for p in passages])
            if not checklist.items:
                raise EmptyChecklist(f"case {rcase.id}: extraction produced zero checklist items")
            verdict, disagreed = parse_supervisor(
                resp.parsed["supervisor"],
                narrative=rcase.narrative,
                expected_item_ids=checklist.item_ids(),
            )
            trace.supervisor_disagreed = disagreed
        else:  # pragma: no cover
            raise ValueError(mode)

        trace.overrides = [o.to_dict() for o in verdict.overrides]
        stage = "compute_gap"
        gap = compute_gap(checklist, verdict.final_assessments)
        trace.gap_set = gap.to_dict()
        stage = "decide"
        det, resp, req = decide(rcase, checklist, verdict, gap, passages, sp, backend)
        if resp is not None and req is not None:
            record("decide", req, resp)
        return finish(det)
    except (AdjudicatorError, ValidationFailure) as exc:
        trace.error = {"stage": stage, "error": type(exc).__name__, "message": str(exc)}
        trace.duration_ms = int((time.monotonic() - start) * 1000)
        raise CaseAborted(stage, exc, trace) from exc
