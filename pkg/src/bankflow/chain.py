"""Tiered request escalation engine.

A customer request (loan, insurance claim, account opening) enters at the
first tier of its configured chain and moves strictly one tier at a time:
an officer either approves it (only within the tier's authority limit),
rejects it (allowed anywhere, terminal), or escalates it to the next tier.
Approval beyond the limit is refused rather than silently forwarded, so
every hand-off leaves an auditable escalation event.

All types are immutable; ``submit_request`` and ``decide`` return new
instances and never mutate their inputs. Persistence and notification
fan-out live elsewhere (`bankflow.core`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Mapping

from .errors import (
    AuthorityExceeded,
    ConfigError,
    InvalidRequest,
    NoNextTier,
    NotCurrentTier,
    TerminalState,
    UnknownTier,
)

# Authority limit value meaning "may approve any amount". The last tier of
# every chain must be unbounded so no request can get stuck.
UNBOUNDED = None

# Actor recorded on escalations the engine performs itself (auto-escalation
# at submission time).
SYSTEM_ACTOR = "system"

_CURRENCY_RE = re.compile(r"^[A-Z]{3}$")

DEFAULT_TIER_IDS = ("BSC", "OZSSC", "HO")
DEFAULT_LIMITS = (500_000, 5_000_000, UNBOUNDED)


class RequestKind(str, Enum):
    LOAN = "loan"
    INSURANCE_CLAIM = "insurance_claim"
    ACCOUNT_OPENING = "account_opening"


class Action(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"
    ESCALATE = "escalate"


class Status(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"


def limit_covers(limit: int | None, amount: int) -> bool:
    """True if a tier with this authority limit may approve ``amount``."""
    return limit is UNBOUNDED or amount <= limit


def limit_to_json(limit: int | None) -> int | str:
    return "UNBOUNDED" if limit is UNBOUNDED else limit


def limit_from_json(value: object, where: str) -> int | None:
    if value == "UNBOUNDED":
        return UNBOUNDED
    if isinstance(value, int) and not isinstance(value, bool) and value >= 0:
        return value
    raise ConfigError([f'{where}: authority_limit must be a non-negative integer or "UNBOUNDED"'])


@dataclass(frozen=True, slots=True)
class ServiceRequest:
    """A customer-submitted banking request, amount in integer minor units."""

    request_id: str
    customer_id: str
    kind: RequestKind
    amount: int
    currency: str
    submitted_at: datetime
    details: Mapping[str, str]


@dataclass(frozen=True, slots=True)
class HandlerTier:
    tier_id: str
    display_name: str
    order_index: int
    authority_limit: int | None


@dataclass(frozen=True, slots=True)
class ChainConfig:
    chain_id: str
    applies_to_kind: RequestKind
    tiers: tuple[HandlerTier, ...]
    auto_escalate_on_submit: bool = False

    def tier_at(self, index: int) -> HandlerTier:
        return self.tiers[index]

    def tier_ids(self) -> tuple[str, ...]:
        return tuple(t.tier_id for t in self.tiers)

    def index_of(self, tier_id: str) -> int | None:
        for tier in self.tiers:
            if tier.tier_id == tier_id:
                return tier.order_index
        return None

    @property
    def last_index(self) -> int:
        return len(self.tiers) - 1


@dataclass(frozen=True, slots=True)
class DecisionEvent:
    """One recorded decision; ``seq`` is the log sequence that produced it."""

    seq: int
    request_id: str
    tier_id: str
    actor_id: str
    action: Action
    reason: str
    decided_at: datetime


@dataclass(frozen=True, slots=True)
class ChainInstance:
    """Live escalation state of one request."""

    request_id: str
    chain_id: str
    current_tier_index: int
    status: Status
    history: tuple[DecisionEvent, ...]

    def current_tier(self, config: ChainConfig) -> HandlerTier:
        return config.tier_at(self.current_tier_index)

    @property
    def is_terminal(self) -> bool:
        return self.status is not Status.PENDING


def validate_request(request: ServiceRequest) -> None:
    """Raise InvalidRequest (naming the field) on any invariant violation."""
    if not request.request_id or not isinstance(request.request_id, str):
        raise InvalidRequest("request_id", "must be a non-empty string")
    if not request.customer_id or not isinstance(request.customer_id, str):
        raise InvalidRequest("customer_id", "must be a non-empty string")
    if not isinstance(request.kind, RequestKind):
        raise InvalidRequest("kind", "must be one of loan, insurance_claim, account_opening")
    if isinstance(request.amount, bool) or not isinstance(request.amount, int):
        raise InvalidRequest("amount", "must be an integer amount in minor units")
    if request.amount < 0:
        raise InvalidRequest("amount", "must be >= 0")
    if request.kind is RequestKind.ACCOUNT_OPENING and request.amount != 0:
        raise InvalidRequest("amount", "must be 0 for account_opening requests")
    if not _CURRENCY_RE.match(request.currency):
        raise InvalidRequest("currency", "must be a three-letter ISO 4217 code")
    if request.submitted_at.tzinfo is None:
        raise InvalidRequest("submitted_at", "must be a UTC-aware timestamp")
    for key, value in request.details.items():
        if not isinstance(key, str) or not key:
            raise InvalidRequest("details", "keys must be non-empty strings")
        if not isinstance(value, str):
            raise InvalidRequest("details", f"value for {key!r} must be a string")


def validate_chain_config(config: ChainConfig, where: str = "chain") -> None:
    """Raise ConfigError listing every violated tier invariant."""
    diagnostics: list[str] = []
    if not config.chain_id:
        diagnostics.append(f"{where}: chain_id must be non-empty")
    if not config.tiers:
        diagnostics.append(f"{where}: at least one tier is required")
        raise ConfigError(diagnostics)
    seen_ids: set[str] = set()
    for position, tier in enumerate(config.tiers):
        label = f"{where}.tiers[{position}] ({tier.tier_id or '?'})"
        if not tier.tier_id:
            diagnostics.append(f"{label}: tier_id must be non-empty")
        elif tier.tier_id in seen_ids:
            diagnostics.append(f"{label}: duplicate tier_id")
        else:
            seen_ids.add(tier.tier_id)
        if tier.order_index != position:
            diagnostics.append(f"{label}: order_index {tier.order_index} must equal position {position}")
        if tier.authority_limit is not UNBOUNDED:
            if tier.authority_limit < 0:
                diagnostics.append(f"{label}: authority_limit must be >= 0")
            previous = config.tiers[position - 1].authority_limit if position else None
            if position and previous is UNBOUNDED:
                diagnostics.append(
                    f"{label}: authority_limit must be non-decreasing (follows an UNBOUNDED tier)"
                )
            elif position and tier.authority_limit < previous:
                diagnostics.append(
                    f"{label}: authority_limit {tier.authority_limit} below previous tier's {previous}"
                )
    last = config.tiers[-1]
    if last.authority_limit is not UNBOUNDED:
        diagnostics.append(
            f"{where}.tiers[{len(config.tiers) - 1}] ({last.tier_id}): last tier must be UNBOUNDED"
        )
    if diagnostics:
        raise ConfigError(diagnostics)


def make_chain_config(
    chain_id: str,
    kind: RequestKind,
    limits: tuple[int | None, ...],
    tier_ids: tuple[str, ...] | None = None,
    auto_escalate_on_submit: bool = False,
) -> ChainConfig:
    """Build and validate a chain from parallel tier-id/limit tuples."""
    ids = tier_ids if tier_ids is not None else tuple(f"T{i}" for i in range(len(limits)))
    tiers = tuple(
        HandlerTier(tier_id=tid, display_name=tid, order_index=i, authority_limit=lim)
        for i, (tid, lim) in enumerate(zip(ids, limits))
    )
    config = ChainConfig(chain_id=chain_id, applies_to_kind=kind, tiers=tiers,
                         auto_escalate_on_submit=auto_escalate_on_submit)
    validate_chain_config(config, where=chain_id)
    return config


def default_chain_configs() -> dict[RequestKind, ChainConfig]:
    """The shipped three-tier setup: BSC, OZSSC and HO share queues across
    loan and insurance chains; account opening is handled at the branch."""
    loan = make_chain_config("loan-chain", RequestKind.LOAN, DEFAULT_LIMITS, DEFAULT_TIER_IDS)
    insurance = make_chain_config(
        "insurance-chain", RequestKind.INSURANCE_CLAIM, DEFAULT_LIMITS, DEFAULT_TIER_IDS
    )
    account = make_chain_config(
        "account-opening-chain", RequestKind.ACCOUNT_OPENING, (UNBOUNDED,), ("BSC",)
    )
    return {c.applies_to_kind: c for c in (loan, insurance, account)}


def submit_request(request: ServiceRequest, config: ChainConfig, *, seq: int) -> ChainInstance:
    """Create the initial instance for a validated request.

    With ``auto_escalate_on_submit`` the instance advances to the first tier
    whose limit covers the amount, recording a system escalation for every
    tier skipped over so the one-step-at-a-time history rule still holds.
    """
    validate_request(request)
    if config.applies_to_kind is not request.kind:
        raise InvalidRequest("kind", f"chain {config.chain_id} does not apply to {request.kind.value}")
    instance = ChainInstance(
        request_id=request.request_id,
        chain_id=config.chain_id,
        current_tier_index=0,
        status=Status.PENDING,
        history=(),
    )
    if not config.auto_escalate_on_submit:
        return instance
    history: list[DecisionEvent] = []
    index = 0
    while not limit_covers(config.tier_at(index).authority_limit, request.amount):
        history.append(
            DecisionEvent(
                seq=seq,
                request_id=request.request_id,
                tier_id=config.tier_at(index).tier_id,
                actor_id=SYSTEM_ACTOR,
                action=Action.ESCALATE,
                reason="auto-escalated at submission: amount above tier authority",
                decided_at=request.submitted_at,
            )
        )
        index += 1
    return replace(instance, current_tier_index=index, history=tuple(history))


def decide(
    instance: ChainInstance,
    request: ServiceRequest,
    config: ChainConfig,
    *,
    tier_id: str,
    actor_id: str,
    action: Action,
    reason: str,
    seq: int,
    decided_at: datetime,
) -> ChainInstance:
    """Apply one officer decision, returning the updated instance.

    Raises TerminalState, UnknownTier, NotCurrentTier, AuthorityExceeded or
    NoNextTier; on error the input instance is untouched (it is immutable).
    """
    if instance.is_terminal:
        raise TerminalState(f"request {instance.request_id} is already {instance.status.value}")
    if config.index_of(tier_id) is None:
        raise UnknownTier(f"tier {tier_id!r} is not part of chain {config.chain_id}")
    current = instance.current_tier(config)
    if tier_id != current.tier_id:
        raise NotCurrentTier(
            f"request {instance.request_id} is at tier {current.tier_id}, not {tier_id}"
        )
    event = DecisionEvent(
        seq=seq,
        request_id=instance.request_id,
        tier_id=tier_id,
        actor_id=actor_id,
        action=action,
        reason=reason,
        decided_at=decided_at,
    )
    if action is Action.APPROVE:
        if not limit_covers(current.authority_limit, request.amount):
            raise AuthorityExceeded(
                f"amount {request.amount} exceeds {tier_id} authority limit "
                f"{current.authority_limit}; escalate instead"
            )
        return replace(instance, status=Status.APPROVED, history=instance.history + (event,))
    if action is Action.REJECT:
        return replace(instance, status=Status.REJECTED, history=instance.history + (event,))
    if instance.current_tier_index == config.last_index:
        raise NoNextTier(f"tier {tier_id} is the last tier of chain {config.chain_id}")
    return replace(
        instance,
        current_tier_index=instance.current_tier_index + 1,
        history=instance.history + (event,),
    )
