"""Deterministic rule-mode backend for offline pipeline verification.

Behaves like a (very literal-minded) model: it reads the narrative,
retrieved passages, and prior stage outputs out of the prompt it is given,
and never looks at gold labels or withheld-fact metadata. Stage outputs
are fabricated mechanically:

- checklist: one required element per enumerated "(n)" clause of the
  top-ranked statute passage's guide group, plus one item per
  consideration and case-law passage in the same group;
- verification: a requirement is satisfied when the best-matching
  narrative sentence covers enough of its content words, quoted verbatim;
  unmatched required elements are critical gaps, unmatched considerations
  and case-law principles are not relevant to the stated facts;
- supervision: confirms the assessments with no overrides and the
  mechanical proceed/abstain rule;
- determination: the guide group's configured outcome for the question type.

Same prompts in, same bytes out — which is what makes end-to-end pipeline
runs reproducible in tests.
"""

from __future__ import annotations

import json
import re

from .backend import Backend, BackendConfig, ChatRequest
from .corpus import tokenize
from .errors import UnknownScriptKey
from .prompts import parse_sections

SATISFACTION_THRESHOLD = 0.6

STOPWORDS = frozenset(
    "a an and are as at be by for from had has have in is it its of on or "
    "that the this to was were will with".split()
)

# Outcome per guide group when every required element is satisfied.
DEFAULT_ISSUE_OUTCOMES: dict[str, dict[str, str]] = {
    "misconduct": {"eligibility": "ineligible", "direct": "yes"},
    "voluntary-quit": {"eligibility": "eligible", "direct": "yes"},
    "availability": {"eligibility": "eligible", "direct": "yes"},
}

_ENUM_RE = re.compile(r"\((\d+)\)\s*(.+?)(?=\s*\(\d+\)|\Z)", re.DOTALL)
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def statute_requirements(text: str) -> list[str]:
    """The enumerated '(n) ...' clauses of a statute passage, in order."""
    return [" ".join(body.split()) for _, body in _ENUM_RE.findall(text)]


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_RE.split(text.strip()) if s.strip()]


def content_words(text: str) -> set[str]:
    return {t for t in tokenize(text) if t not in STOPWORDS}


def best_sentence(requirement: str, narrative: str) -> tuple[str, float]:
    """Narrative sentence covering most of the requirement's content words."""
    req = content_words(requirement)
    if not req:
        return "", 0.0
    best, best_score = "", -1.0
    for sent in split_sentences(narrative):
        score = len(req & set(tokenize(sent))) / len(req)
        if score > best_score:
            best, best_score = sent, score
    return best, max(best_score, 0.0)


def first_sentence(text: str) -> str:
    sents = split_sentences(text)
    return sents[0] if sents else text.strip()


class RuleOracleBackend(Backend):
    """Prompt-driven deterministic stand-in for a provider model."""

    def __init__(
        self,
        issue_outcomes: dict[str, dict[str, str]] | None = None,
        config: BackendConfig | None = None,
    ):
        super().__init__(config or BackendConfig(kind="scripted", model_name="rule-oracle"))
        self._outcomes = issue_outcomes or DEFAULT_ISSUE_OUTCOMES

    # -- prompt reading ------------------------------------------------

    def _sections(self, request: ChatRequest) -> dict[str, str]:
        return parse_sections(request.user_prompt)

    @staticmethod
    def _passages(sections: dict[str, str]) -> list[dict]:
        raw = sections.get("RETRIEVED PASSAGES (JSON)", "[]")
        return json.loads(raw)

    @staticmethod
    def _issue_group(passages: list[dict]) -> tuple[str, list[dict]]:
        """Guide group of the top-ranked statute passage."""
        for p in passages:
            if p["kind"] == "statute":
                group = p["source_doc"]
                issue = group.removeprefix("guide-")
                return issue, [q for q in passages if q["source_doc"] == group]
        return "", []

    # -- stage output fabrication --------------------------------------

    def _checklist(self, sections: dict[str, str]) -> dict:
        _, group = self._issue_group(self._passages(sections))
        items: list[dict] = []
        sources: list[str] = []
        for p in group:
            sources.append(p["id"])
            if p["kind"] == "statute":
                for n, req in enumerate(statute_requirements(p["text"]), start=1):
                    items.append(
                        {
                            "item_id": f"{p['id']}-r{n}",
                            "category": "required_element",
                            "text": req,
                            "statute_citation": p["citation"],
                        }
                    )
            elif p["kind"] == "consideration":
                items.append(
                    {
                        "item_id": f"{p['id']}-c1",
                        "category": "consideration",
                        "text": " ".join(p["text"].split()),
                    }
                )
            elif p["kind"] == "caselaw":
                items.append(
                    {
                        "item_id": f"{p['id']}-l1",
                        "category": "caselaw_requirement",
                        "text": first_sentence(p["text"]),
                        "case_name": p["title"],
                        "principle": first_sentence(p["text"]),
                    }
                )
        return {"items": items, "source_passage_ids": sources}

    def _assess_item(self, item: dict, narrative: str) -> dict:
        quote, score = best_sentence(item["text"], narrative)
        if score >= SATISFACTION_THRESHOLD:
            return {
                "item_id": item["item_id"],
                "status": "satisfied",
                "supporting_quote": quote,
                "rationale": "The stated facts directly establish this item.",
            }
        if item["category"] == "required_element":
            return {
                "item_id": item["item_id"],
                "status": "unaddressed",
                "criticality": "critical_gap",
                "rationale": "No stated fact establishes this statutory element.",
            }
        return {
            "item_id": item["item_id"],
            "status": "unaddressed",
            "criticality": "not_relevant",
            "rationale": "Not implicated by the stated facts.",
        }

    def _assessments(self, checklist: dict, narrative: str) -> list[dict]:
        return [self._assess_item(it, narrative) for it in checklist["items"]]

    @staticmethod
    def _recommendation(assessments: list[dict]) -> str:
        blocked = any(
            a["status"] == "unaddressed" and a.get("criticality") == "critical_gap"
            for a in assessments
        )
        return "abstain" if blocked else "proceed"

    def _supervisor(self, assessments: list[dict]) -> dict:
        return {
            "final_assessments": assessments,
            "overrides": [],
            "recommendation": self._recommendation(assessments),
        }

    def _determination(self, sections: dict[str, str]) -> dict:
        passages = self._passages(sections)
        issue, group = self._issue_group(passages)
        question_type = sections.get("QUESTION TYPE", "eligibility").strip()
        label = self._outcomes.get(issue, {}).get(question_type)
        if label is None:
            raise UnknownScriptKey(
                f"rule oracle has no configured outcome for issue {issue!r} "
                f"and question type {question_type!r}"
            )
        statute = next(p for p in group if p["kind"] == "statute")
        return {
            "label": label,
            "reasoning": (
                f"Every element of {statute['citation']} (passage {statute['id']}) is "
                "established by the stated facts, so the determination follows directly "
                "from the statute."
            ),
        }

    def _planner(self, sections: dict[str, str]) -> dict:
        passages = self._passages(sections)
        _, group = self._issue_group(passages)
        citations = ", ".join(
            sorted({p["citation"] for p in group if p["kind"] == "statute"})
        ) or "the retrieved passages"
        active = [s.strip() for s in sections.get("ACTIVE STAGES", "").split(",") if s.strip()]
        stages = {}
        for name in active:
            stages[name] = (
                f"You are the {name} stage; you receive the outputs of every prior stage "
                f"verbatim. Center the analysis on {citations} and reference the exact "
                "question text without rephrasing."
            )
        return {"stages": stages}

    def _answer(self, sections: dict[str, str]) -> str:
        checklist = self._checklist(sections)
        narrative = sections.get("CASE NARRATIVE", "")
        assessments = self._assessments(checklist, narrative)
        question_type = sections.get("QUESTION TYPE", "eligibility").strip()
        if self._recommendation(assessments) == "abstain":
            return (
                "Critical facts required by the governing provisions are absent from the "
                "stated record, so the appropriate outcome is inconclusive."
            )
        issue, _ = self._issue_group(self._passages(sections))
        label = self._outcomes.get(issue, {}).get(question_type, "inconclusive")
        return (
            "All governing requirements are established by the stated facts; "
            f"the determination is {label}."
        )

    # -- Backend interface ---------------------------------------------

    def generate_raw(self, request: ChatRequest, attempt: int) -> str:
        sections = self._sections(request)
        stage = request.stage
        if stage == "plan":
            return json.dumps(self._planner(sections))
        if stage == "extract":
            return json.dumps(self._checklist(sections))
        if stage == "verify":
            checklist = json.loads(sections["CHECKLIST (JSON)"])
            narrative = sections.get("CASE NARRATIVE", "")
            return json.dumps({"assessments": self._assessments(checklist, narrative)})
        if stage == "supervise":
            assessments = json.loads(sections["ASSESSMENTS (JSON)"])["assessments"]
            return json.dumps(self._supervisor(assessments))
        if stage == "extract_verify":
            checklist = self._checklist(sections)
            narrative = sections.get("CASE NARRATIVE", "")
            return json.dumps(
                {"checklist": checklist, "assessments": self._assessments(checklist, narrative)}
            )
        if stage == "verify_supervise":
            checklist = json.loads(sections["CHECKLIST (JSON)"])
            narrative = sections.get("CASE NARRATIVE", "")
            return json.dumps(
                {"supervisor": self._supervisor(self._assessments(checklist, narrative))}
            )
        if stage == "single":
            checklist = self._checklist(sections)
            narrative = sections.get("CASE NARRATIVE", "")
            return json.dumps(
                {
                    "checklist": checklist,
                    "supervisor": self._supervisor(self._assessments(checklist, narrative)),
                }
            )
        if stage == "decide":
            return json.dumps(self._determination(sections))
        if stage == "answer":
            return self._answer(sections)
        raise UnknownScriptKey(f"rule oracle cannot answer stage {stage!r}")
