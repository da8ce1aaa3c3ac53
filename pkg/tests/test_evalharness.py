"""Metric tests: exact accuracy arithmetic, error taxonomy, bootstrap CIs
against an independently written resampler, and report emission."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from adjudicator.casefile import CaseFile
from adjudicator.errors import EmptyResults, IdMismatch
from adjudicator.evalharness import (
    ScoredResult,
    aggregate_metrics,
    bootstrap_ci,
    classify_error,
    emit_report,
    error_analysis,
    report_from_dict,
    score_case,
    scored_result_from_dict,
)
from adjudicator.stages import Determination


def result(case_id="c", predicted="eligible", gold="eligible",
           completeness="complete") -> ScoredResult:
    return ScoredResult(
        case_id=case_id, predicted=predicted, gold=gold,
        correct=predicted == gold, completeness=completeness,
        error_kind=classify_error(gold, predicted),
    )


class TestClassifyError:
    @pytest.mark.parametrize(
        "gold,predicted,kind",
        [
            ("eligible", "eligible", "none"),
            ("inconclusive", "inconclusive", "none"),
            ("inconclusive", "ineligible", "false_denial"),
            ("inconclusive", "no", "false_denial"),
            ("inconclusive", "eligible", "false_approval"),
            ("inconclusive", "yes", "false_approval"),
            ("eligible", "inconclusive", "false_deferral"),
            ("eligible", "ineligible", "wrong_decision"),
            ("yes", "no", "wrong_decision"),
            ("eligible", "unparseable", "unparseable"),
        ],
    )
    def test_taxonomy(self, gold, predicted, kind):
        assert classify_error(gold, predicted) == kind


class TestScoreCase:
    def case(self):
        return CaseFile(
            id="c9", narrative="n", question_type="eligibility",
            gold_label="eligible", completeness="complete", withheld_facts=(),
        )

    def test_scores_against_gold(self):
        det = Determination(
            label="eligible", reasoning="r", missing_information=(), trace_id="c9-full-abc"
        )
        r = score_case(det, self.case())
        assert r.correct and r.error_kind == "none"

    def test_foreign_trace_id_rejected(self):
        det = Determination(
            label="eligible", reasoning="r", missing_information=(),
            trace_id="other-full-abc",
        )
        with pytest.raises(IdMismatch):
            score_case(det, self.case())


def table1_echo_results() -> list[ScoredResult]:
    """100 synthetic results shaped like the headline accuracy table:
    44 conclusive cases with 39 correct, 56 deferral cases with 50 correct."""
    out = []
    for i in range(44):
        out.append(result(f"c{i}", "eligible" if i < 39 else "ineligible",
                          "eligible", "complete"))
    for i in range(56):
        out.append(result(f"m{i}", "inconclusive" if i < 50 else "eligible",
                          "inconclusive", "missing-1"))
    return out


class TestAggregateArithmetic:
    def test_hand_computed_small_fixture(self):
        results = [
            result("a", "eligible", "eligible", "complete"),
            result("b", "ineligible", "eligible", "complete"),
            result("c", "inconclusive", "inconclusive", "missing-1"),
            result("d", "eligible", "inconclusive", "missing-2"),
        ]
        rep = aggregate_metrics(results, with_ci=False)
        assert rep.n_total == 4 and rep.n_complete == 2 and rep.n_inconclusive == 2
        assert rep.accuracy_all == 0.5
        assert rep.accuracy_complete == 0.5
        assert rep.accuracy_inconclusive == 0.5
        assert rep.accuracy_by_missing_k == {"missing-1": 1.0, "missing-2": 0.0}
        assert rep.error_breakdown["wrong_decision"] == 1
        assert rep.error_breakdown["false_approval"] == 1
        assert rep.error_breakdown["none"] == 2

    def test_headline_echo(self):
        rep = aggregate_metrics(table1_echo_results(), with_ci=False)
        assert abs(rep.accuracy_all - 0.89) < 1e-9
        assert abs(rep.accuracy_complete - 39 / 44) < 1e-9
        assert abs(rep.accuracy_inconclusive - 50 / 56) < 1e-9

    def test_false_denial_rate_echo(self):
        # 139 deferral-gold cases, 94 denied outright.
        results = [
            result(f"x{i}", "ineligible" if i < 94 else "inconclusive",
                   "inconclusive", "missing-1")
            for i in range(139)
        ]
        analysis = error_analysis(results)
        assert analysis["n"] == 139
        assert analysis["counts"]["false_denial"] == 94
        assert abs(analysis["rates"]["false_denial"] - 94 / 139) < 1e-9

    def test_weighted_combination_identity(self):
        # exact rational identity: acc_all * n == acc_c * n_c + acc_i * n_i
        results = table1_echo_results()
        rep = aggregate_metrics(results, with_ci=False)
        lhs = Fraction(rep.accuracy_all).limit_denominator(10**6) * rep.n_total
        rhs = (
            Fraction(rep.accuracy_complete).limit_denominator(10**6) * rep.n_complete
            + Fraction(rep.accuracy_inconclusive).limit_denominator(10**6)
            * rep.n_inconclusive
        )
        assert lhs == rhs

    def test_empty_results_rejected(self):
        with pytest.raises(EmptyResults):
            aggregate_metrics([])

    def test_missing_k_buckets_only_over_observed_levels(self):
        rep = aggregate_metrics(
            [result("a", completeness="complete"),
             result("b", "inconclusive", "inconclusive", "missing-3")],
            with_ci=False,
        )
        assert list(rep.accuracy_by_missing_k) == ["missing-3"]


def reference_bootstrap(results, n_resamples=1000, seed=42):
    """Independent percentile-bootstrap implementation, frozen procedure:
    PCG64(seed); per resample idx = rng.integers(0, n, n); accuracy of the
    resample; sort; linear-interpolated percentiles at 2.5% / 97.5%."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = len(results)
    flags = [r.correct for r in results]
    vals = []
    for _ in range(n_resamples):
        idx = rng.integers(0, n, n)
        vals.append(sum(flags[i] for i in idx) / n)
    vals.sort()

    def pct(p):
        h = (n_resamples - 1) * p
        f, c = math.floor(h), math.ceil(h)
        if f == c:
            return float(vals[f])
        return float(vals[f] + (vals[c] - vals[f]) * (h - f))

    return pct(0.025), pct(0.975)


class TestBootstrap:
    @pytest.mark.parametrize("n_correct,n_total", [(39, 44), (50, 56), (89, 100)])
    def test_bit_for_bit_against_reference(self, n_correct, n_total):
        results = [
            result(f"c{i}", "eligible" if i < n_correct else "ineligible", "eligible")
            for i in range(n_total)
        ]
        assert bootstrap_ci(results) == reference_bootstrap(results)

    def test_degenerate_all_correct(self):
        results = [result(f"c{i}") for i in range(10)]
        assert bootstrap_ci(results) == (1.0, 1.0)

    def test_seed_changes_interval(self):
        results = [
            result(f"c{i}", "eligible" if i % 3 else "ineligible", "eligible")
            for i in range(30)
        ]
        assert bootstrap_ci(results, seed=42) != bootstrap_ci(results, seed=43)

    def test_interval_brackets_point_estimate(self):
        results = [
            result(f"c{i}", "eligible" if i % 4 else "ineligible", "eligible")
            for i in range(40)
        ]
        lo, hi = bootstrap_ci(results)
        acc = sum(r.correct for r in results) / len(results)
        assert lo <= acc <= hi

    def test_empty_rejected(self):
        with pytest.raises(EmptyResults):
            bootstrap_ci([])


class TestEmission:
    def report(self):
        return aggregate_metrics(table1_echo_results(), n_resamples=50)

    def test_json_round_trip(self):
        rep = self.report()
        again = report_from_dict(json.loads(emit_report(rep, "json")))
        assert again == rep

    def test_markdown_table(self):
        md = emit_report(self.report(), "markdown", run_name="echo")
        lines = md.strip().splitlines()
        assert lines[0] == "| Run | All Cases | Complete | Inconclusive |"
        assert lines[2] == "| echo | 0.89 | 0.89 | 0.89 |"

    def test_csv_has_all_metrics(self):
        rows = dict(
            (r[0], r[1])
            for r in csv.reader(io.StringIO(emit_report(self.report(), "csv")))
        )
        assert rows["accuracy_all"] == "0.89"
        assert rows["n_total"] == "100"
        assert "ci95_accuracy_all_lower" in rows

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            emit_report(self.report(), "xml")

    def test_scored_result_round_trip(self):
        r = result("a", "inconclusive", "inconclusive", "missing-2")
        assert scored_result_from_dict(json.loads(json.dumps(r.to_dict()))) == r
