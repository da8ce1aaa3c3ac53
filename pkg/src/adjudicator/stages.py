"""Stage output types and the strict JSON contracts that produce them.

Every agent stage must answer with a single JSON object. The parse
functions here are the only path from raw model text to typed stage
outputs; anything that fails validation triggers a repair re-prompt and,
if retries are exhausted, aborts the case. There is no best-effort parsing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

ITEM_CATEGORIES = ("required_element", "consideration", "caselaw_requirement")
STATUSES = ("satisfied", "unaddressed")
CRITICALITIES = ("critical_gap", "not_relevant")
RECOMMENDATIONS = ("proceed", "abstain")

# Schema ids a ChatRequest can ask for.
SCHEMA_IDS = (
    "planner",
    "checklist",
    "assessment",
    "supervisor",
    "determination",
    "extract_verify",       # merged agent 1+2
    "verify_supervise",     # merged agent 2+3
    "single",               # merged agent 1+2+3
    "free_text",
)


class ValidationFailure(ValueError):
    """Raised by parse functions; the message is fed back to the model."""


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class ChecklistItem:
    item_id: str
    category: str
    text: str
    statute_citation: str = ""
    case_name: str = ""
    principle: str = ""

    def to_dict(self) -> dict:
        d = {"item_id": self.item_id, "category": self.category, "text": self.text}
        if self.statute_citation:
            d["statute_citation"] = self.statute_citation
        if self.case_name:
            d["case_name"] = self.case_name
        if self.principle:
            d["principle"] = self.principle
        return d


@dataclass(frozen=True)
class Checklist:
    items: tuple[ChecklistItem, ...]
    source_passage_ids: tuple[str, ...]

    def item_ids(self) -> list[str]:
        return [i.item_id for i in self.items]

    def get(self, item_id: str) -> ChecklistItem:
        for i in self.items:
            if i.item_id == item_id:
                return i
        raise KeyError(item_id)

    def to_dict(self) -> dict:
        return {
            "items": [i.to_dict() for i in self.items],
            "source_passage_ids": list(self.source_passage_ids),
        }


@dataclass(frozen=True)
class Assessment:
    item_id: str
    status: str
    supporting_quote: str = ""
    criticality: str = ""
    rationale: str = ""
    accounts_conflict: bool = False

    def to_dict(self) -> dict:
        d = {"item_id": self.item_id, "status": self.status, "rationale": self.rationale}
        if self.status == "satisfied":
            d["supporting_quote"] = self.supporting_quote
        else:
            d["criticality"] = self.criticality
        if self.accounts_conflict:
            d["accounts_conflict"] = True
        return d


@dataclass(frozen=True)
class Override:
    item_id: str
    old: str
    new: str
    reason: str

    def to_dict(self) -> dict:
        return {"item_id": self.item_id, "old": self.old, "new": self.new, "reason": self.reason}


@dataclass(frozen=True)
class SupervisorVerdict:
    final_assessments: tuple[Assessment, ...]
    overrides: tuple[Override, ...]
    recommendation: str  # always the mechanical rule, never trusted from the model

    def to_dict(self) -> dict:
        return {
            "final_assessments": [a.to_dict() for a in self.final_assessments],
            "overrides": [o.to_dict() for o in self.overrides],
            "recommendation": self.recommendation,
        }


@dataclass(frozen=True)
class Gap:
    item_id: str
    requirement_text: str
    needed_information: str

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "requirement_text": self.requirement_text,
            "needed_information": self.needed_information,
        }


@dataclass(frozen=True)
class GapSet:
    gaps: tuple[Gap, ...]

    def __bool__(self) -> bool:
        return bool(self.gaps)

    def to_dict(self) -> dict:
        return {"gaps": [g.to_dict() for g in self.gaps]}


@dataclass(frozen=True)
class Determination:
    label: str
    reasoning: str
    missing_information: tuple[str, ...]
    trace_id: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "reasoning": self.reasoning,
            "missing_information": list(self.missing_information),
            "trace_id": self.trace_id,
        }


# ---------------------------------------------------------------------------
# Raw-text helpers


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def extract_json_object(raw_text: str) -> dict:
    """Pull a single JSON object out of a model response.

    Accepts a bare object or one wrapped in a code fence; anything else
    fails validation.
    """
    text = raw_text.strip()
    m = _FENCE_RE.search(text)
    if m:
        text = m.group(1).strip()
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"response is not valid JSON: {exc}")
    if not isinstance(value, dict):
        raise ValidationFailure("response must be a single JSON object")
    return value


def _require(obj: dict, name: str, typ, ctx: str):
    if name not in obj:
        raise ValidationFailure(f"{ctx}: missing field {name!r}")
    if not isinstance(obj[name], typ):
        raise ValidationFailure(f"{ctx}: field {name!r} has wrong type")
    return obj[name]


def _require_enum(obj: dict, name: str, allowed, ctx: str) -> str:
    v = _require(obj, name, str, ctx)
    if v not in allowed:
        raise ValidationFailure(f"{ctx}: field {name!r} must be one of {list(allowed)}")
    return v


# ---------------------------------------------------------------------------
# Parsers, one per schema id

# Words that would make a checklist item an assessment rather than an
# extraction. Checked outside double-quoted spans so quoted statute text
# is exempt.
_STATUS_VOCAB_RE = re.compile(r"\b(satisfied|unaddressed|met|unmet|missing)\b", re.IGNORECASE)
_QUOTED_SPAN_RE = re.compile(r'"[^"]*"')


def _contains_status_vocab(text: str) -> bool:
    return bool(_STATUS_VOCAB_RE.search(_QUOTED_SPAN_RE.sub(" ", text)))


def parse_planner(obj: dict) -> dict[str, str]:
    """Planner output: {"stages": {stage_name: instructions}}."""
    stages = _require(obj, "stages", dict, "planner")
    if not stages:
        raise ValidationFailure("planner: stages is empty")
    out: dict[str, str] = {}
    for name, instructions in stages.items():
        if not isinstance(instructions, str) or not instructions.strip():
            raise ValidationFailure(f"planner: stage {name!r} instructions must be non-empty text")
        out[name] = instructions
    return out


def parse_checklist(obj: dict) -> Checklist:
    items_raw = _require(obj, "items", list, "checklist")
    sources = _require(obj, "source_passage_ids", list, "checklist")
    if not all(isinstance(s, str) for s in sources):
        raise ValidationFailure("checklist: source_passage_ids must be strings")
    items: list[ChecklistItem] = []
    seen: set[str] = set()
    for i, it in enumerate(items_raw):
        ctx = f"checklist item #{i}"
        if not isinstance(it, dict):
            raise ValidationFailure(f"{ctx}: not an object")
        item_id = _require(it, "item_id", str, ctx)
        if item_id in seen:
            raise ValidationFailure(f"{ctx}: duplicate item_id {item_id!r}")
        seen.add(item_id)
        category = _require_enum(it, "category", ITEM_CATEGORIES, ctx)
        text = _require(it, "text", str, ctx)
        if not text.strip():
            raise ValidationFailure(f"{ctx}: empty text")
        if _contains_status_vocab(text):
            raise ValidationFailure(
                f"{ctx}: extraction must not contain assessment language "
                "(satisfied/unaddressed/met/missing) outside quoted statute text"
            )
        citation = it.get("statute_citation", "")
        case_name = it.get("case_name", "")
        principle = it.get("principle", "")
        if category == "required_element" and not citation:
            raise ValidationFailure(f"{ctx}: required_element needs a statute_citation")
        if category == "caselaw_requirement" and not (case_name and principle):
            raise ValidationFailure(f"{ctx}: caselaw_requirement needs case_name and principle")
        items.append(
            ChecklistItem(
                item_id=item_id,
                category=category,
                text=text,
                statute_citation=citation,
                case_name=case_name,
                principle=principle,
            )
        )
    return Checklist(items=tuple(items), source_passage_ids=tuple(sources))


def normalize_ws(text: str) -> str:
    return " ".join(text.split())


def _parse_assessment_entry(it: dict, ctx: str, narrative: str) -> Assessment:
    if not isinstance(it, dict):
        raise ValidationFailure(f"{ctx}: not an object")
    item_id = _require(it, "item_id", str, ctx)
    status = _require_enum(it, "status", STATUSES, ctx)
    rationale = it.get("rationale", "")
    conflict = bool(it.get("accounts_conflict", False))
    if status == "satisfied":
        quote = _require(it, "supporting_quote", str, ctx)
        if not quote.strip():
            raise ValidationFailure(f"{ctx}: satisfied items need a supporting_quote")
        if normalize_ws(quote) not in normalize_ws(narrative):
            raise ValidationFailure(
                f"{ctx}: supporting_quote is not a verbatim passage of the case narrative"
            )
        if conflict:
            raise ValidationFailure(
                f"{ctx}: a conflicting-accounts item cannot be satisfied; "
                "conflicts on outcome-determinative facts are critical gaps"
            )
        return Assessment(
            item_id=item_id, status=status, supporting_quote=quote, rationale=rationale
        )
    criticality = _require_enum(it, "criticality", CRITICALITIES, ctx)
    if conflict and criticality != "critical_gap":
        raise ValidationFailure(
            f"{ctx}: conflicting accounts must be triaged as critical_gap"
        )
    return Assessment(
        item_id=item_id,
        status=status,
        criticality=criticality,
        rationale=rationale,
        accounts_conflict=conflict,
    )


def parse_assessments(obj: dict, *, narrative: str, expected_item_ids: list[str]) -> tuple[Assessment, ...]:
    raws = _require(obj, "assessments", list, "assessment")
    out: list[Assessment] = []
    for i, it in enumerate(raws):
        out.append(_parse_assessment_entry(it, f"assessment #{i}", narrative))
    got = [a.item_id for a in out]
    if sorted(got) != sorted(expected_item_ids):
        raise ValidationFailure(
            "assessment: must cover exactly the checklist item ids "
            f"(expected {sorted(expected_item_ids)}, got {sorted(got)})"
        )
    return tuple(out)


def mechanical_recommendation(final_assessments: tuple[Assessment, ...]) -> str:
    """Proceed iff no final assessment is an unaddressed critical gap."""
    blocked = any(
        a.status == "unaddressed" and a.criticality == "critical_gap"
        for a in final_assessments
    )
    return "abstain" if blocked else "proceed"


def parse_supervisor(
    obj: dict, *, narrative: str, expected_item_ids: list[str]
) -> tuple[SupervisorVerdict, bool]:
    """Parse a supervisor response.

    Returns (verdict, model_disagreed): the recommendation is always
    recomputed mechanically from the final assessments; the flag records
    whether the model's own recommendation disagreed with the rule.
    """
    finals = parse_assessments(
        {"assessments": _require(obj, "final_assessments", list, "supervisor")},
        narrative=narrative,
        expected_item_ids=expected_item_ids,
    )
    overrides_raw = obj.get("overrides", [])
    if not isinstance(overrides_raw, list):
        raise ValidationFailure("supervisor: overrides must be a list")
    overrides: list[Override] = []
    for i, ov in enumerate(overrides_raw):
        ctx = f"supervisor override #{i}"
        if not isinstance(ov, dict):
            raise ValidationFailure(f"{ctx}: not an object")
        overrides.append(
            Override(
                item_id=_require(ov, "item_id", str, ctx),
                old=_require(ov, "old", str, ctx),
                new=_require(ov, "new", str, ctx),
                reason=_require(ov, "reason", str, ctx),
            )
        )
        if not overrides[-1].reason.strip():
            raise ValidationFailure(f"{ctx}: override needs a reason")
    model_rec = _require_enum(obj, "recommendation", RECOMMENDATIONS, "supervisor")
    rule_rec = mechanical_recommendation(finals)
    return (
        SupervisorVerdict(
            final_assessments=finals, overrides=tuple(overrides), recommendation=rule_rec
        ),
        model_rec != rule_rec,
    )


def parse_determination(obj: dict, *, question_type: str) -> tuple[str, str]:
    """Determination stage output: (label, reasoning).

    Only called when the gap set is empty, so 'inconclusive' is not an
    acceptable label here.
    """
    from .casefile import LABELS, labels_for
    from .errors import InvalidLabel

    label = _require(obj, "label", str, "determination")
    allowed = [l for l in labels_for(question_type) if l != "inconclusive"]
    if label not in allowed:
        if label in LABELS and label != "inconclusive":
            # A real label, just the wrong kind: not repairable by re-prompt.
            raise InvalidLabel(
                f"label {label!r} is inconsistent with question type {question_type!r}"
            )
        raise ValidationFailure(
            f"determination: label must be one of {allowed} for a "
            f"{question_type} question with no gaps"
        )
    reasoning = _require(obj, "reasoning", str, "determination")
    if not reasoning.strip():
        raise ValidationFailure("determination: empty reasoning")
    return label, reasoning
