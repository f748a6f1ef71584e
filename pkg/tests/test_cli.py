import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from bankflow.cli import main

ROOT = Path(__file__).parent.parent
DEMO_CONFIG = str(ROOT / "config" / "demo.json")
LOAN_SCENARIO = str(ROOT / "scenarios" / "loan-escalation.json")


@pytest.fixture
def runner():
    return CliRunner()


class TestScenarioCommand:
    def test_shipped_scenario_exits_0(self, runner):
        result = runner.invoke(main, ["scenario", "run", LOAN_SCENARIO, "--fixed-clock"])
        assert result.exit_code == 0, result.output
        assert "13/13 steps passed" in result.output

    def test_failing_assertion_exits_1_with_step_report(self, runner, tmp_path):
        steps = [
            {"step": "submit", "ref": "r", "kind": "loan", "amount": 2_000_000,
             "customer_id": "c1"},
            {"step": "decide", "ref": "r", "tier_id": "BSC", "actor_id": "o",
             "action": "approve"},
        ]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(steps))
        result = runner.invoke(main, ["scenario", "run", str(path), "--fixed-clock"])
        assert result.exit_code == 1
        assert "AuthorityExceeded" in result.output

    def test_writes_a_log_when_asked(self, runner, tmp_path):
        log = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "scenario", "run", LOAN_SCENARIO, "--fixed-clock", "--log", str(log),
        ])
        assert result.exit_code == 0
        assert log.exists() and log.read_text().count("\n") > 0


class TestConfigValidate:
    def test_demo_config_is_valid(self, runner):
        result = runner.invoke(main, ["config", "validate", DEMO_CONFIG])
        assert result.exit_code == 0
        assert "ok" in result.output

    def test_non_monotone_limits_name_the_tier(self, runner, tmp_path):
        doc = {
            "chains": [{
                "chain_id": "c",
                "applies_to_kind": "loan",
                "tiers": [
                    {"tier_id": "BSC", "authority_limit": 500000},
                    {"tier_id": "OZSSC", "authority_limit": 400000},
                    {"tier_id": "HO", "authority_limit": "UNBOUNDED"},
                ],
            }],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["config", "validate", str(path)])
        assert result.exit_code == 1
        assert "OZSSC" in result.output

    def test_bare_chain_document_is_accepted(self, runner, tmp_path):
        doc = {
            "chain_id": "solo",
            "applies_to_kind": "loan",
            "tiers": [{"tier_id": "HO", "authority_limit": "UNBOUNDED"}],
        }
        path = tmp_path / "solo.json"
        path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["config", "validate", str(path)])
        assert result.exit_code == 0


class TestCatalogCommands:
    def test_shipped_catalog_validates(self, runner):
        result = runner.invoke(main, ["catalog", "validate", str(ROOT / "catalog" / "patterns.json")])
        assert result.exit_code == 0
        assert "2 pattern(s)" in result.output

    def test_missing_field_is_reported(self, runner, tmp_path):
        entries = json.loads((ROOT / "catalog" / "patterns.json").read_text())
        del entries[0]["forces"]
        path = tmp_path / "cat.json"
        path.write_text(json.dumps(entries))
        result = runner.invoke(main, ["catalog", "validate", str(path)])
        assert result.exit_code == 1
        assert "forces" in result.output

    def test_render_round_trips_shipped_docs(self, runner, tmp_path):
        out = tmp_path / "patterns.md"
        result = runner.invoke(main, [
            "catalog", "render", str(ROOT / "catalog" / "patterns.json"), "-o", str(out),
        ])
        assert result.exit_code == 0
        assert out.read_text(encoding="utf-8") == (ROOT / "docs" / "patterns.md").read_text(
            encoding="utf-8"
        )


class TestOfflineViews:
    @pytest.fixture
    def log_from_scenario(self, runner, tmp_path):
        log = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "scenario", "run", LOAN_SCENARIO, "--fixed-clock", "--log", str(log),
        ])
        assert result.exit_code == 0
        return log

    def test_queue_list_from_log(self, runner, log_from_scenario):
        result = runner.invoke(main, ["queue", "list", "BSC", "--log", str(log_from_scenario)])
        assert result.exit_code == 0
        assert "0 pending at BSC" in result.output

    def test_inbox_from_log(self, runner, log_from_scenario):
        result = runner.invoke(main, ["inbox", "alice", "--log", str(log_from_scenario)])
        assert result.exit_code == 0
        assert "request.approved" in result.output
        assert "1 notification(s)" in result.output

    def test_queue_list_unknown_tier_fails(self, runner, log_from_scenario):
        result = runner.invoke(main, ["queue", "list", "NOPE", "--log", str(log_from_scenario)])
        assert result.exit_code == 1
        assert "UnknownTier" in result.output

    def test_needs_a_source(self, runner):
        result = runner.invoke(main, ["inbox", "alice"])
        assert result.exit_code == 1
