"""Case and dataset schema: loading, validation, and redacted views.

A dataset is a JSON array of cases. Gold fields (label, completeness,
withheld facts) live under ``_meta`` so the pipeline can be handed a
redacted view that provably cannot leak them.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvariantViolation, MalformedDataset

QUESTION_TYPES = ("eligibility", "direct")

LABELS = ("eligible", "ineligible", "yes", "no", "inconclusive")
ELIGIBILITY_LABELS = ("eligible", "ineligible", "inconclusive")
DIRECT_LABELS = ("yes", "no", "inconclusive")

COMPLETENESS_LEVELS = ("complete", "missing-1", "missing-2", "missing-3", "missing-4")


def labels_for(question_type: str) -> tuple[str, ...]:
    return ELIGIBILITY_LABELS if question_type == "eligibility" else DIRECT_LABELS


def missing_count(completeness: str) -> int:
    return 0 if completeness == "complete" else int(completeness.split("-")[1])


@dataclass(frozen=True)
class RedactedCase:
    """What the pipeline is allowed to see: no gold fields, by construction."""

    id: str
    narrative: str
    question_type: str


@dataclass(frozen=True)
class CaseFile:
    id: str
    narrative: str
    question_type: str
    gold_label: str
    completeness: str
    withheld_facts: tuple[str, ...]
    issue_tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.narrative:
            raise InvariantViolation(self.id, "narrative is empty")
        if self.question_type not in QUESTION_TYPES:
            raise InvariantViolation(self.id, f"bad question_type {self.question_type!r}")
        if self.completeness not in COMPLETENESS_LEVELS:
            raise InvariantViolation(self.id, f"bad completeness {self.completeness!r}")
        if self.gold_label not in labels_for(self.question_type):
            raise InvariantViolation(
                self.id,
                f"label {self.gold_label!r} incompatible with "
                f"question_type {self.question_type!r}",
            )
        k = missing_count(self.completeness)
        if (self.completeness == "complete") != (self.gold_label != "inconclusive"):
            raise InvariantViolation(
                self.id, "completeness=complete must coincide with a conclusive gold label"
            )
        if k != len(self.withheld_facts):
            raise InvariantViolation(
                self.id,
                f"completeness {self.completeness} requires {k} withheld facts, "
                f"got {len(self.withheld_facts)}",
            )

    def redacted(self) -> RedactedCase:
        return RedactedCase(id=self.id, narrative=self.narrative, question_type=self.question_type)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "narrative": self.narrative,
            "question_type": self.question_type,
            "issue_tags": list(self.issue_tags),
            "_meta": {
                "gold_label": self.gold_label,
                "completeness": self.completeness,
                "withheld_facts": list(self.withheld_facts),
            },
        }


@dataclass(frozen=True)
class Dataset:
    cases: tuple[CaseFile, ...]
    manifest: dict

    def __len__(self) -> int:
        return len(self.cases)

    def get(self, case_id: str) -> CaseFile:
        for c in self.cases:
            if c.id == case_id:
                return c
        raise KeyError(case_id)

    def to_list(self) -> list[dict]:
        return [c.to_dict() for c in self.cases]


def _build_manifest(cases: list[CaseFile]) -> dict:
    return {
        "n_cases": len(cases),
        "by_completeness": dict(Counter(c.completeness for c in cases)),
        "by_label": dict(Counter(c.gold_label for c in cases)),
    }


def case_from_dict(obj: dict) -> CaseFile:
    if not isinstance(obj, dict):
        raise MalformedDataset("case entry is not an object")
    try:
        meta = obj["_meta"]
        return CaseFile(
            id=obj["id"],
            narrative=obj["narrative"],
            question_type=obj["question_type"],
            issue_tags=tuple(obj.get("issue_tags", [])),
            gold_label=meta["gold_label"],
            completeness=meta["completeness"],
            withheld_facts=tuple(meta["withheld_facts"]),
        )
    except KeyError as exc:
        raise MalformedDataset(f"case {obj.get('id', '?')!r}: missing field {exc}")


def make_dataset(cases: list[CaseFile]) -> Dataset:
    seen = set()
    for c in cases:
        if c.id in seen:
            raise MalformedDataset(f"duplicate case id {c.id!r}")
        seen.add(c.id)
    return Dataset(cases=tuple(cases), manifest=_build_manifest(cases))


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedDataset(f"cannot read dataset file {path}: {exc}")
    if not isinstance(data, list):
        raise MalformedDataset("top-level value is not an array")
    return make_dataset([case_from_dict(obj) for obj in data])


def split_by_completeness(dataset: Dataset) -> dict[str, list[CaseFile]]:
    """Partition cases by completeness level; empty levels are omitted."""
    buckets: dict[str, list[CaseFile]] = {}
    for c in dataset.cases:
        buckets.setdefault(c.completeness, []).append(c)
    return buckets
