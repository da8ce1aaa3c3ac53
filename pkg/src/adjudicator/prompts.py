"""Prompt assembly for every pipeline stage and mode.

Prompt scaffolds live as text assets under ``prompts/``; the whole template
set is hash-pinned so traces can record exactly which templates produced
them. User prompts are built from labeled sections; downstream stages embed
the serialized outputs of every prior stage verbatim, which is what makes
the dependency chain auditable from the trace alone.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from importlib import resources

from .casefile import RedactedCase
from .corpus import Passage

MODES = (
    "full",
    "no-extractor",
    "no-supervisor",
    "single-agent",
    "static-prompting",
    "baseline",
    "enhanced",
)

PLANNER_MODES = ("full", "no-extractor", "no-supervisor", "single-agent")

# Analysis stages per mode, in execution order ("decide" runs only when the
# gap set is empty; "plan" is implicit for planner modes).
MODE_STAGES: dict[str, tuple[str, ...]] = {
    "full": ("extract", "verify", "supervise", "decide"),
    "no-extractor": ("extract_verify", "supervise", "decide"),
    "no-supervisor": ("extract", "verify_supervise", "decide"),
    "single-agent": ("single", "decide"),
    "static-prompting": ("extract", "verify", "supervise", "decide"),
    "baseline": ("answer",),
    "enhanced": ("answer",),
}

STAGE_SCHEMAS = {
    "plan": "planner",
    "extract": "checklist",
    "verify": "assessment",
    "supervise": "supervisor",
    "extract_verify": "extract_verify",
    "verify_supervise": "verify_supervise",
    "single": "single",
    "decide": "determination",
    "answer": "free_text",
}

_SECTION_RE = re.compile(r"^=== (.+?) ===$", re.MULTILINE)


def _asset(name: str) -> str:
    return resources.files("adjudicator").joinpath("prompts", name).read_text(encoding="utf-8").strip()


def _load_scaffolds() -> dict[str, str]:
    scaffolds = {
        "plan": _asset("planner.txt"),
        "extract": _asset("extract.txt"),
        "verify": _asset("verify.txt"),
        "supervise": _asset("supervise.txt"),
        "decide": _asset("decide.txt"),
        "baseline": _asset("baseline.txt"),
        "enhanced": _asset("enhanced.txt"),
    }
    # Merged-stage scaffolds are the concatenation of their constituents.
    scaffolds["extract_verify"] = scaffolds["extract"] + "\n\n" + scaffolds["verify"]
    scaffolds["verify_supervise"] = scaffolds["verify"] + "\n\n" + scaffolds["supervise"]
    scaffolds["single"] = (
        scaffolds["extract"] + "\n\n" + scaffolds["verify"] + "\n\n" + scaffolds["supervise"]
    )
    return scaffolds


def parse_sections(text: str) -> dict[str, str]:
    """Split '=== NAME ===' labeled text into a name -> body map."""
    parts = _SECTION_RE.split(text)
    out: dict[str, str] = {}
    # parts = [preamble, name, body, name, body, ...]
    for i in range(1, len(parts) - 1, 2):
        out[parts[i]] = parts[i + 1].strip()
    return out


def _load_static_instructions() -> dict[str, str]:
    return parse_sections(_asset("static.txt"))


SCAFFOLDS = _load_scaffolds()
STATIC_INSTRUCTIONS = _load_static_instructions()

TEMPLATE_SET_HASH = hashlib.sha256(
    json.dumps({"scaffolds": SCAFFOLDS, "static": STATIC_INSTRUCTIONS}, sort_keys=True).encode()
).hexdigest()


def section(name: str, body: str) -> str:
    return f"=== {name} ===\n{body.strip()}\n"


OUTPUT_FORMATS = {
    "planner": (
        "Respond with a single JSON object and nothing else: "
        '{"stages": {"<stage name>": "<instructions>", ...}} with one entry per active stage.'
    ),
    "checklist": (
        "Respond with a single JSON object and nothing else: "
        '{"items": [{"item_id": str, "category": "required_element"|"consideration"|'
        '"caselaw_requirement", "text": str, "statute_citation": str (required_element), '
        '"case_name": str, "principle": str (caselaw_requirement)}], '
        '"source_passage_ids": [str]}'
    ),
    "assessment": (
        "Respond with a single JSON object and nothing else: "
        '{"assessments": [{"item_id": str, "status": "satisfied"|"unaddressed", '
        '"supporting_quote": str (verbatim narrative text, satisfied only), '
        '"criticality": "critical_gap"|"not_relevant" (unaddressed only), '
        '"accounts_conflict": bool, "rationale": str}]} covering every checklist item exactly once.'
    ),
    "supervisor": (
        "Respond with a single JSON object and nothing else: "
        '{"final_assessments": [<assessment objects covering every checklist item>], '
        '"overrides": [{"item_id": str, "old": str, "new": str, "reason": str}], '
        '"recommendation": "proceed"|"abstain"}'
    ),
    "determination": (
        "Respond with a single JSON object and nothing else: "
        '{"label": <the determination label>, "reasoning": str citing passage ids}'
    ),
    "extract_verify": (
        "Respond with a single JSON object and nothing else: "
        '{"checklist": <checklist object>, "assessments": [<assessment objects>]}'
    ),
    "verify_supervise": (
        "Respond with a single JSON object and nothing else: "
        '{"supervisor": <supervisor object>}'
    ),
    "single": (
        "Respond with a single JSON object and nothing else: "
        '{"checklist": <checklist object>, "supervisor": <supervisor object>}'
    ),
    "free_text": "Answer in one paragraph.",
}


@dataclass(frozen=True)
class StagePrompts:
    """Per-stage tailored instructions plus provenance of how they were made."""

    mode: str
    instructions: dict[str, str]  # stage -> instructions text
    source: str  # "planner" | "static" | "none"
    template_hash: str = TEMPLATE_SET_HASH


def case_sections(case: RedactedCase, passages: list[Passage] | None = None) -> str:
    body = section("QUESTION TYPE", case.question_type)
    body += section("CASE NARRATIVE", case.narrative)
    if passages is not None:
        body += section(
            "RETRIEVED PASSAGES (JSON)",
            json.dumps([p.to_dict() for p in passages], indent=2),
        )
    return body


def planner_user_prompt(case: RedactedCase, passages: list[Passage], mode: str) -> str:
    stages_list = list(MODE_STAGES[mode])
    body = case_sections(case, passages)
    body += section("ACTIVE STAGES", ", ".join(stages_list))
    body += section("OUTPUT FORMAT", OUTPUT_FORMATS["planner"])
    return body


def stage_user_prompt(
    stage: str,
    *,
    case: RedactedCase,
    passages: list[Passage],
    prompts: StagePrompts,
    position: str,
    prior_outputs: list[tuple[str, str]],
) -> str:
    """Assemble a stage's user prompt.

    prior_outputs is a list of (section name, serialized JSON) pairs for
    every earlier stage, embedded verbatim.
    """
    body = section("PIPELINE POSITION", position)
    instr = prompts.instructions.get(stage, "")
    if instr:
        body += section("TAILORED INSTRUCTIONS", instr)
    body += case_sections(case, passages)
    for name, payload in prior_outputs:
        body += section(name, payload)
    body += section("OUTPUT FORMAT", OUTPUT_FORMATS[STAGE_SCHEMAS[stage]])
    return body


def static_prompts(mode: str) -> StagePrompts:
    """Fixed template set, identical for every case.

    Only the case narrative and passages are substituted into designated
    slots at stage-assembly time.
    """
    if mode != "static-prompting":
        raise ValueError("static_prompts is only defined for static-prompting mode")
    return StagePrompts(mode=mode, instructions=dict(STATIC_INSTRUCTIONS), source="static")
