"""CLI and run-config tests: exit codes, output files, worker determinism."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from adjudicator.cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, main
from adjudicator.config import RunConfig, apply_overrides, load_config, make_backend
from adjudicator.errors import ConfigError
from adjudicator.fixtures import corpus_path, dataset_path


@pytest.fixture()
def runner():
    return CliRunner()


def base_args(tmp_path, *extra):
    return [
        "--corpus", str(corpus_path()),
        "--dataset", str(dataset_path()),
        "--backend", "rule-oracle",
        "--out", str(tmp_path / "out"),
        *extra,
    ]


class TestAdjudicate:
    def test_decided_case_exits_zero(self, runner, tmp_path):
        res = runner.invoke(main, ["adjudicate", *base_args(tmp_path), "--case-id", "ms-c1"])
        assert res.exit_code == EXIT_OK, res.output
        assert "label: ineligible" in res.output
        assert "trace:" in res.output

    def test_deferred_case_exits_ten_with_missing_info(self, runner, tmp_path):
        res = runner.invoke(main, ["adjudicate", *base_args(tmp_path), "--case-id", "ms-m2a"])
        assert res.exit_code == EXIT_INCONCLUSIVE, res.output
        assert "label: inconclusive" in res.output
        assert "missing information:" in res.output
        assert res.output.count("Provide facts establishing:") == 2

    def test_adhoc_narrative(self, runner, tmp_path):
        res = runner.invoke(
            main,
            ["adjudicate", *base_args(tmp_path), "--narrative",
             "Rosa quit her employment over a reduction in pay. Is she eligible?"],
        )
        assert res.exit_code == EXIT_INCONCLUSIVE, res.output

    def test_unknown_case_exits_one(self, runner, tmp_path):
        res = runner.invoke(main, ["adjudicate", *base_args(tmp_path), "--case-id", "nope"])
        assert res.exit_code == EXIT_ERROR

    def test_no_case_or_narrative_exits_one(self, runner, tmp_path):
        res = runner.invoke(main, ["adjudicate", *base_args(tmp_path)])
        assert res.exit_code == EXIT_ERROR

    def test_trace_written(self, runner, tmp_path):
        res = runner.invoke(main, ["adjudicate", *base_args(tmp_path), "--case-id", "ms-c1"])
        trace_path = Path(res.output.rsplit("trace: ", 1)[1].strip())
        blob = json.loads(trace_path.read_text(encoding="utf-8"))
        assert blob["case_id"] == "ms-c1"
        assert blob["determination"]["label"] == "ineligible"


class TestEvaluate:
    def run_evaluate(self, runner, tmp_path, *extra):
        res = runner.invoke(main, ["evaluate", *base_args(tmp_path, *extra)])
        assert res.exit_code == EXIT_OK, res.output
        out = tmp_path / "out"
        report = next(out.glob("report-*.json"))
        return json.loads(report.read_text(encoding="utf-8"))

    def test_writes_reports_and_traces(self, runner, tmp_path):
        report = self.run_evaluate(runner, tmp_path)
        assert report["n_total"] == 20
        assert report["accuracy_all"] == 1.0
        assert len(list((tmp_path / "out" / "traces").glob("*.json"))) == 20

    def test_worker_count_does_not_change_report(self, runner, tmp_path):
        r1 = self.run_evaluate(runner, tmp_path / "w1", "--workers", "1")
        r4 = self.run_evaluate(runner, tmp_path / "w4", "--workers", "4")
        assert r1 == r4

    def test_results_file_in_dataset_order(self, runner, tmp_path):
        self.run_evaluate(runner, tmp_path, "--workers", "4")
        results = json.loads(
            next((tmp_path / "out").glob("results-*.json")).read_text(encoding="utf-8")
        )
        data = json.loads(Path(dataset_path()).read_text(encoding="utf-8"))
        assert [r["case_id"] for r in results] == [c["id"] for c in data]


class TestAblateCommand:
    def test_table_covers_every_mode(self, runner, tmp_path):
        res = runner.invoke(main, ["ablate", *base_args(tmp_path)])
        assert res.exit_code == EXIT_OK, res.output
        table = (tmp_path / "out" / "ablation.md").read_text(encoding="utf-8")
        for mode in ("full", "no-extractor", "no-supervisor", "single-agent",
                     "static-prompting", "baseline", "enhanced"):
            assert f"| {mode} |" in table


class TestConfig:
    def test_toml_config(self, tmp_path):
        f = tmp_path / "run.toml"
        f.write_text(
            f'corpus_path = "{corpus_path()}"\nmode = "full"\n'
            '[backend]\nkind = "rule-oracle"\n',
            encoding="utf-8",
        )
        cfg = load_config(f)
        assert cfg.mode == "full" and cfg.backend["kind"] == "rule-oracle"

    def test_json_config(self, tmp_path):
        f = tmp_path / "run.json"
        f.write_text(json.dumps({"corpus_path": str(corpus_path()), "seed": 7}))
        assert load_config(f).seed == 7

    def test_unknown_field_rejected(self, tmp_path):
        f = tmp_path / "run.json"
        f.write_text(json.dumps({"corpus_path": "x", "api_key": "nope"}))
        with pytest.raises(ConfigError):
            load_config(f)

    def test_http_backend_config_stores_env_var_name_not_secret(self):
        b = make_backend(
            {"kind": "http", "endpoint_url": "https://api.test/v1", "auth_env_var": "KEY"}
        )
        assert b.config.auth_env_var == "KEY"

    def test_unknown_backend_kind_rejected(self):
        with pytest.raises(ConfigError):
            make_backend({"kind": "telepathy"})

    def test_validation_catches_bad_mode(self):
        cfg = RunConfig(corpus_path=str(corpus_path()), mode="imaginary")
        with pytest.raises(ConfigError):
            cfg.validated()

    def test_overrides_skip_none(self):
        cfg = RunConfig(corpus_path="c", seed=1)
        out = apply_overrides(cfg, seed=None, workers=3)
        assert out.seed == 1 and out.workers == 3
