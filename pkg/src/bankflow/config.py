"""Application configuration: chain definitions and the static token table.

The canonical layout is an object with ``chains`` and ``tokens``; a bare
chain object or a bare array of chains is also accepted so a single-chain
document can be validated or served as-is. Tier order is the array order
(index 0 handles a request first) and every diagnostic names the exact
``chains[i].tiers[j]`` path that violated an invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .chain import ChainConfig, HandlerTier, RequestKind, limit_from_json, validate_chain_config
from .errors import ConfigError


class Role(str, Enum):
    CUSTOMER = "customer"
    OFFICER = "officer"
    ADMIN = "admin"


@dataclass(frozen=True, slots=True)
class RoleToken:
    """One row of the static auth table. Officers are scoped to a tier."""

    token: str
    actor_id: str
    role: Role
    tier_id: str | None = None


@dataclass(frozen=True, slots=True)
class AppConfig:
    chains: tuple[ChainConfig, ...]
    tokens: tuple[RoleToken, ...]

    def configs_by_kind(self) -> dict[RequestKind, ChainConfig]:
        return {c.applies_to_kind: c for c in self.chains}

    def token_table(self) -> dict[str, RoleToken]:
        return {t.token: t for t in self.tokens}


def _chain_from_dict(doc: object, where: str) -> ChainConfig:
    if not isinstance(doc, dict):
        raise ConfigError([f"{where}: must be an object"])
    diagnostics: list[str] = []
    chain_id = doc.get("chain_id")
    if not isinstance(chain_id, str) or not chain_id:
        diagnostics.append(f"{where}.chain_id: must be a non-empty string")
        chain_id = "?"
    kind_raw = doc.get("applies_to_kind")
    try:
        kind = RequestKind(kind_raw)
    except ValueError:
        diagnostics.append(
            f"{where}.applies_to_kind: {kind_raw!r} is not one of "
            f"{', '.join(k.value for k in RequestKind)}"
        )
        kind = RequestKind.LOAN
    auto = doc.get("auto_escalate_on_submit", False)
    if not isinstance(auto, bool):
        diagnostics.append(f"{where}.auto_escalate_on_submit: must be a boolean")
        auto = False
    tiers_raw = doc.get("tiers")
    if not isinstance(tiers_raw, list) or not tiers_raw:
        diagnostics.append(f"{where}.tiers: must be a non-empty array")
        raise ConfigError(diagnostics)
    tiers: list[HandlerTier] = []
    for index, tier_doc in enumerate(tiers_raw):
        tier_where = f"{where}.tiers[{index}]"
        if not isinstance(tier_doc, dict):
            diagnostics.append(f"{tier_where}: must be an object")
            continue
        tier_id = tier_doc.get("tier_id")
        if not isinstance(tier_id, str) or not tier_id:
            diagnostics.append(f"{tier_where}.tier_id: must be a non-empty string")
            tier_id = f"tier-{index}"
        display = tier_doc.get("display_name", tier_id)
        if not isinstance(display, str) or not display:
            diagnostics.append(f"{tier_where}.display_name: must be a non-empty string")
            display = tier_id
        try:
            limit = limit_from_json(tier_doc.get("authority_limit"), tier_where)
        except ConfigError as exc:
            diagnostics.extend(exc.diagnostics)
            limit = None
        tiers.append(
            HandlerTier(tier_id=tier_id, display_name=display, order_index=index,
                        authority_limit=limit)
        )
    if diagnostics:
        raise ConfigError(diagnostics)
    config = ChainConfig(
        chain_id=chain_id, applies_to_kind=kind, tiers=tuple(tiers), auto_escalate_on_submit=auto
    )
    validate_chain_config(config, where=where)
    return config


def _token_from_dict(doc: object, where: str, known_tiers: set[str]) -> RoleToken:
    if not isinstance(doc, dict):
        raise ConfigError([f"{where}: must be an object"])
    diagnostics: list[str] = []
    token = doc.get("token")
    if not isinstance(token, str) or not token:
        diagnostics.append(f"{where}.token: must be a non-empty string")
        token = "?"
    actor = doc.get("actor_id")
    if not isinstance(actor, str) or not actor:
        diagnostics.append(f"{where}.actor_id: must be a non-empty string")
        actor = "?"
    role_raw = doc.get("role")
    try:
        role = Role(role_raw)
    except ValueError:
        diagnostics.append(f"{where}.role: {role_raw!r} is not one of customer, officer, admin")
        role = Role.CUSTOMER
    tier_id = doc.get("tier_id")
    if role is Role.OFFICER:
        if not isinstance(tier_id, str) or not tier_id:
            diagnostics.append(f"{where}.tier_id: officers must reference a tier")
        elif tier_id not in known_tiers:
            diagnostics.append(f"{where}.tier_id: {tier_id!r} is not a configured tier")
    elif tier_id is not None:
        diagnostics.append(f"{where}.tier_id: only officer tokens carry a tier")
    if diagnostics:
        raise ConfigError(diagnostics)
    return RoleToken(token=token, actor_id=actor, role=role,
                     tier_id=tier_id if role is Role.OFFICER else None)


def parse_app_config(doc: object) -> AppConfig:
    """Validate a parsed configuration document."""
    if isinstance(doc, dict) and "chain_id" in doc:
        doc = {"chains": [doc]}
    elif isinstance(doc, list):
        doc = {"chains": doc}
    if not isinstance(doc, dict):
        raise ConfigError(["config: must be an object with a 'chains' array"])
    chains_raw = doc.get("chains")
    if not isinstance(chains_raw, list) or not chains_raw:
        raise ConfigError(["chains: must be a non-empty array"])
    diagnostics: list[str] = []
    chains: list[ChainConfig] = []
    kinds_seen: dict[RequestKind, str] = {}
    for index, chain_doc in enumerate(chains_raw):
        where = f"chains[{index}]"
        try:
            config = _chain_from_dict(chain_doc, where)
        except ConfigError as exc:
            diagnostics.extend(exc.diagnostics)
            continue
        if config.applies_to_kind in kinds_seen:
            diagnostics.append(
                f"{where}: kind {config.applies_to_kind.value!r} already handled by "
                f"{kinds_seen[config.applies_to_kind]}"
            )
            continue
        kinds_seen[config.applies_to_kind] = config.chain_id
        chains.append(config)
    known_tiers = {t.tier_id for c in chains for t in c.tiers}
    tokens_raw = doc.get("tokens", [])
    if not isinstance(tokens_raw, list):
        diagnostics.append("tokens: must be an array")
        tokens_raw = []
    tokens: list[RoleToken] = []
    token_strings: set[str] = set()
    for index, token_doc in enumerate(tokens_raw):
        where = f"tokens[{index}]"
        try:
            token = _token_from_dict(token_doc, where, known_tiers)
        except ConfigError as exc:
            diagnostics.extend(exc.diagnostics)
            continue
        if token.token in token_strings:
            diagnostics.append(f"{where}.token: duplicate token string")
            continue
        token_strings.add(token.token)
        tokens.append(token)
    if diagnostics:
        raise ConfigError(diagnostics)
    return AppConfig(chains=tuple(chains), tokens=tuple(tokens))


def load_app_config(path: str | Path) -> AppConfig:
    """Read, parse and validate a configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"]) from None
    return parse_app_config(doc)
