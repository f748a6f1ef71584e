from pathlib import Path

import pytest

from bankflow.chain import RequestKind, default_chain_configs
from bankflow.config import Role, load_app_config, parse_app_config
from bankflow.errors import ConfigError

DEMO = Path(__file__).parent.parent / "config" / "demo.json"


def chain_doc(**overrides):
    doc = {
        "chain_id": "loan-chain",
        "applies_to_kind": "loan",
        "tiers": [
            {"tier_id": "BSC", "authority_limit": 500000},
            {"tier_id": "HO", "authority_limit": "UNBOUNDED"},
        ],
    }
    doc.update(overrides)
    return doc


class TestChains:
    def test_single_chain_document(self):
        config = parse_app_config(chain_doc())
        assert len(config.chains) == 1
        assert config.chains[0].tiers[0].display_name == "BSC"  # defaults to tier_id

    def test_array_of_chains(self):
        insurance = chain_doc(chain_id="ins", applies_to_kind="insurance_claim")
        config = parse_app_config([chain_doc(), insurance])
        assert {c.applies_to_kind for c in config.chains} == {
            RequestKind.LOAN, RequestKind.INSURANCE_CLAIM,
        }

    def test_two_chains_for_one_kind_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_app_config([chain_doc(), chain_doc(chain_id="dup")])
        assert any("already handled" in d for d in err.value.diagnostics)

    def test_bad_limit_value_names_the_path(self):
        doc = chain_doc()
        doc["tiers"][0]["authority_limit"] = "lots"
        with pytest.raises(ConfigError) as err:
            parse_app_config(doc)
        assert any("tiers[0]" in d for d in err.value.diagnostics)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError) as err:
            parse_app_config(chain_doc(applies_to_kind="mortgage"))
        assert any("applies_to_kind" in d for d in err.value.diagnostics)

    def test_all_chain_problems_reported_together(self):
        doc = {
            "chains": [
                chain_doc(applies_to_kind="mortgage"),
                chain_doc(chain_id="", applies_to_kind="insurance_claim"),
            ]
        }
        with pytest.raises(ConfigError) as err:
            parse_app_config(doc)
        assert len(err.value.diagnostics) >= 2


class TestTokens:
    def base(self):
        return {"chains": [chain_doc()], "tokens": []}

    def test_officer_requires_configured_tier(self):
        doc = self.base()
        doc["tokens"] = [{"token": "t", "actor_id": "a", "role": "officer", "tier_id": "NOPE"}]
        with pytest.raises(ConfigError) as err:
            parse_app_config(doc)
        assert any("not a configured tier" in d for d in err.value.diagnostics)

    def test_officer_without_tier(self):
        doc = self.base()
        doc["tokens"] = [{"token": "t", "actor_id": "a", "role": "officer"}]
        with pytest.raises(ConfigError):
            parse_app_config(doc)

    def test_customer_with_tier_is_rejected(self):
        doc = self.base()
        doc["tokens"] = [{"token": "t", "actor_id": "a", "role": "customer", "tier_id": "BSC"}]
        with pytest.raises(ConfigError):
            parse_app_config(doc)

    def test_duplicate_token_strings(self):
        doc = self.base()
        doc["tokens"] = [
            {"token": "t", "actor_id": "a", "role": "customer"},
            {"token": "t", "actor_id": "b", "role": "admin"},
        ]
        with pytest.raises(ConfigError) as err:
            parse_app_config(doc)
        assert any("duplicate token" in d for d in err.value.diagnostics)

    def test_token_table(self):
        doc = self.base()
        doc["tokens"] = [{"token": "t1", "actor_id": "a", "role": "admin"}]
        table = parse_app_config(doc).token_table()
        assert table["t1"].role is Role.ADMIN


class TestDemoConfig:
    def test_parses_with_expected_principals(self):
        config = load_app_config(DEMO)
        roles = [t.role for t in config.tokens]
        assert roles.count(Role.OFFICER) == 3
        assert roles.count(Role.CUSTOMER) == 2
        assert roles.count(Role.ADMIN) == 1

    def test_demo_chains_match_builtin_defaults(self):
        shipped = {c.applies_to_kind: c for c in load_app_config(DEMO).chains}
        builtin = default_chain_configs()
        assert shipped.keys() == builtin.keys()
        for kind, config in builtin.items():
            other = shipped[kind]
            assert [t.tier_id for t in other.tiers] == [t.tier_id for t in config.tiers]
            assert [t.authority_limit for t in other.tiers] == [
                t.authority_limit for t in config.tiers
            ]
