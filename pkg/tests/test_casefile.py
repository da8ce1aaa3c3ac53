"""Dataset schema tests: invariants, redaction, round-trips, partitioning."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adjudicator.casefile import (
    CaseFile,
    RedactedCase,
    case_from_dict,
    labels_for,
    load_dataset,
    make_dataset,
    missing_count,
    split_by_completeness,
)
from adjudicator.errors import InvariantViolation, MalformedDataset


def make_case(**kw) -> CaseFile:
    base = dict(
        id="c1",
        narrative="She quit. Is she eligible?",
        question_type="eligibility",
        gold_label="eligible",
        completeness="complete",
        withheld_facts=(),
    )
    base.update(kw)
    return CaseFile(**base)


class TestInvariants:
    def test_complete_case_must_be_conclusive(self):
        with pytest.raises(InvariantViolation):
            make_case(gold_label="inconclusive", completeness="complete")

    def test_missing_case_must_be_inconclusive(self):
        with pytest.raises(InvariantViolation):
            make_case(completeness="missing-1", withheld_facts=("x :: y",))

    def test_withheld_count_must_match_level(self):
        with pytest.raises(InvariantViolation):
            make_case(
                gold_label="inconclusive", completeness="missing-2",
                withheld_facts=("only-one :: d",),
            )

    def test_label_question_type_compatibility(self):
        with pytest.raises(InvariantViolation):
            make_case(question_type="direct", gold_label="eligible")
        make_case(question_type="direct", gold_label="yes")  # fine

    def test_empty_narrative_rejected(self):
        with pytest.raises(InvariantViolation):
            make_case(narrative="")

    def test_bad_completeness_rejected(self):
        with pytest.raises(InvariantViolation):
            make_case(completeness="missing-5")

    def test_valid_missing_case(self):
        c = make_case(
            gold_label="inconclusive",
            completeness="missing-2",
            withheld_facts=("a :: d1", "b :: d2"),
        )
        assert missing_count(c.completeness) == 2


class TestRedaction:
    def test_redacted_view_has_no_gold_fields(self):
        r = make_case().redacted()
        assert isinstance(r, RedactedCase)
        assert set(vars(r)) == {"id", "narrative", "question_type"}

    def test_labels_for(self):
        assert labels_for("eligibility") == ("eligible", "ineligible", "inconclusive")
        assert labels_for("direct") == ("yes", "no", "inconclusive")


class TestDataset:
    def test_fixture_dataset_loads_with_manifest(self, dataset):
        m = dataset.manifest
        assert m["n_cases"] == len(dataset) == 20
        assert sum(m["by_completeness"].values()) == 20
        assert sum(m["by_label"].values()) == 20
        assert m["by_completeness"]["complete"] == 9

    def test_round_trip(self, tmp_path, dataset):
        f = tmp_path / "d.json"
        f.write_text(json.dumps(dataset.to_list()), encoding="utf-8")
        again = load_dataset(f)
        assert again.to_list() == dataset.to_list()
        assert again.manifest == dataset.manifest

    def test_duplicate_case_id_rejected(self):
        with pytest.raises(MalformedDataset):
            make_dataset([make_case(), make_case()])

    def test_missing_meta_rejected(self):
        with pytest.raises(MalformedDataset):
            case_from_dict({"id": "x", "narrative": "n", "question_type": "eligibility"})

    def test_get_unknown_case(self, dataset):
        with pytest.raises(KeyError):
            dataset.get("nope")

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_split_by_completeness_is_a_partition(self, data):
        n = data.draw(st.integers(min_value=1, max_value=12))
        cases = []
        for i in range(n):
            level = data.draw(
                st.sampled_from(["complete", "missing-1", "missing-2", "missing-3"])
            )
            k = missing_count(level)
            cases.append(
                make_case(
                    id=f"c{i}",
                    gold_label="eligible" if k == 0 else "inconclusive",
                    completeness=level,
                    withheld_facts=tuple(f"i{j} :: d" for j in range(k)),
                )
            )
        ds = make_dataset(cases)
        buckets = split_by_completeness(ds)
        # every case in exactly one bucket, order preserved within buckets
        flat = [c.id for bucket in buckets.values() for c in bucket]
        assert sorted(flat) == sorted(c.id for c in cases)
        for level, bucket in buckets.items():
            assert all(c.completeness == level for c in bucket)
