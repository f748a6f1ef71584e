"""The composed back office: escalation engine + notification hub + log.

Every mutation follows the same cycle: validate against current state,
append exactly one record to the event log, then apply that record to
state. Replay is the same ``_apply`` folded over the log from an empty
state, which is why a replayed `Bank` is byte-identical to the live one.

Chain decisions fan out to observers as derived notification events
(``request.submitted``, ``request.escalated``, ``request.approved``,
``request.rejected``): these are computed while applying the decision
record rather than logged separately, keeping the one-record-per-mutation
rule. The four topics are reserved; `publish` refuses them.

Concurrency: one re-entrant lock serializes all state access, which makes
every mutation linearizable and every read a consistent snapshot. Outbox
driving serializes on its own lock and only holds the state lock while
claiming records and applying transitions, so slow sinks do not stall the
API.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import chain, hub
from .chain import (
    Action,
    ChainConfig,
    ChainInstance,
    DecisionEvent,
    RequestKind,
    ServiceRequest,
    Status,
    validate_chain_config,
)
from .clock import Clock, SystemClock, format_ts, parse_ts
from .errors import (
    ConfigError,
    CorruptLog,
    InvalidEvent,
    InvalidRequest,
    UnknownChannelSink,
    UnknownKind,
    UnknownRequest,
    UnknownSubscription,
    UnknownTier,
)
from .hub import (
    Channel,
    ChannelSink,
    DeliveryRecord,
    DeliveryReport,
    DeliveryStatus,
    DomainEvent,
    NotificationHub,
    Subscription,
)
from .store import EventLog, StoredEvent

TOPIC_SUBMITTED = "request.submitted"
TOPIC_ESCALATED = "request.escalated"
TOPIC_APPROVED = "request.approved"
TOPIC_REJECTED = "request.rejected"

# Emitted only while applying engine records; manual publishes must use
# other topics so a log line never has two possible meanings.
RESERVED_TOPICS = frozenset({TOPIC_SUBMITTED, TOPIC_ESCALATED, TOPIC_APPROVED, TOPIC_REJECTED})

_DETAIL_PREFIX = "detail."


def _request_payload(request: ServiceRequest) -> dict[str, str]:
    payload = {
        "request_id": request.request_id,
        "customer_id": request.customer_id,
        "kind": request.kind.value,
        "amount": str(request.amount),
        "currency": request.currency,
        "submitted_at": format_ts(request.submitted_at),
    }
    for key, value in request.details.items():
        payload[_DETAIL_PREFIX + key] = value
    return dict(sorted(payload.items()))


def _request_from_payload(payload: Mapping[str, str]) -> ServiceRequest:
    details = {
        key[len(_DETAIL_PREFIX):]: value
        for key, value in payload.items()
        if key.startswith(_DETAIL_PREFIX)
    }
    return ServiceRequest(
        request_id=payload["request_id"],
        customer_id=payload["customer_id"],
        kind=RequestKind(payload["kind"]),
        amount=int(payload["amount"]),
        currency=payload["currency"],
        submitted_at=parse_ts(payload["submitted_at"]),
        details=dict(sorted(details.items())),
    )


class Bank:
    """Event-sourced application state plus the commands that evolve it.

    Opening a ``Bank`` on a non-empty log replays it; a fresh in-memory log
    is used when none is given. ``configs`` fixes one chain per request
    kind and is startup configuration, not logged state.
    """

    def __init__(
        self,
        configs: Mapping[RequestKind, ChainConfig] | Iterable[ChainConfig],
        log: EventLog | None = None,
        clock: Clock | None = None,
        sinks: Iterable[ChannelSink] = (),
    ):
        if isinstance(configs, Mapping):
            configs = list(configs.values())
        self._configs: dict[RequestKind, ChainConfig] = {}
        for config in configs:
            validate_chain_config(config, where=config.chain_id)
            if config.applies_to_kind in self._configs:
                raise ConfigError(
                    [f"{config.chain_id}: duplicate chain for kind {config.applies_to_kind.value}"]
                )
            self._configs[config.applies_to_kind] = config
        self._clock = clock or SystemClock()
        self._log = log if log is not None else EventLog.memory(self._clock)
        self._hub = NotificationHub()
        for sink in sinks:
            self._hub.register_sink(sink)
        self.requests: dict[str, ServiceRequest] = {}
        self.instances: dict[str, ChainInstance] = {}
        self._lock = threading.RLock()
        self._driver_lock = threading.Lock()
        for stored in self._log.events():
            try:
                self._apply(stored)
            except CorruptLog:
                raise
            except Exception as exc:
                raise CorruptLog(stored.seq, f"replay failed: {exc}") from exc

    @classmethod
    def replay(
        cls,
        configs: Mapping[RequestKind, ChainConfig] | Iterable[ChainConfig],
        events: str | Path | Sequence[StoredEvent],
        up_to_seq: int | None = None,
        sinks: Iterable[ChannelSink] = (),
    ) -> "Bank":
        """Rebuild state from a log file or parsed records."""
        from .store import read_log

        if isinstance(events, (str, Path)):
            events = read_log(events)
        if up_to_seq is not None:
            events = [e for e in events if e.seq <= up_to_seq]
        return cls(configs, log=EventLog.memory(events=events), sinks=sinks)

    # -- configuration views -------------------------------------------------

    @property
    def configs(self) -> dict[RequestKind, ChainConfig]:
        return dict(self._configs)

    def config_for_kind(self, kind: RequestKind) -> ChainConfig:
        config = self._configs.get(kind)
        if config is None:
            raise UnknownKind(f"no chain configured for kind {kind.value!r}")
        return config

    def config_for_chain(self, chain_id: str) -> ChainConfig:
        for config in self._configs.values():
            if config.chain_id == chain_id:
                return config
        raise UnknownKind(f"no chain {chain_id!r}")

    def known_tier_ids(self) -> set[str]:
        return {t.tier_id for c in self._configs.values() for t in c.tiers}

    @property
    def last_seq(self) -> int:
        return self._log.last_seq

    def register_sink(self, sink: ChannelSink) -> None:
        self._hub.register_sink(sink)

    # -- commands --------------------------------------------------------------

    def submit_request(
        self,
        kind: RequestKind | str,
        amount: int,
        customer_id: str,
        currency: str = "INR",
        details: Mapping[str, str] | None = None,
        request_id: str | None = None,
    ) -> ChainInstance:
        with self._lock:
            try:
                kind = RequestKind(kind)
            except ValueError:
                raise InvalidRequest(
                    "kind", "must be one of loan, insurance_claim, account_opening"
                ) from None
            config = self.config_for_kind(kind)
            rid = request_id if request_id is not None else self._next_request_id()
            if rid in self.requests:
                raise InvalidRequest("request_id", f"{rid!r} already exists")
            request = ServiceRequest(
                request_id=rid,
                customer_id=customer_id,
                kind=kind,
                amount=amount,
                currency=currency,
                submitted_at=self._clock.now(),
                details=dict(sorted((details or {}).items())),
            )
            chain.validate_request(request)
            body = {
                "topic": TOPIC_SUBMITTED,
                "subject_ref": rid,
                "payload": _request_payload(request),
                "occurred_at": format_ts(request.submitted_at),
            }
            self._apply(self._log.append("domain", body))
            return self.instances[rid]

    def decide(
        self,
        request_id: str,
        tier_id: str,
        actor_id: str,
        action: Action | str,
        reason: str = "",
    ) -> ChainInstance:
        with self._lock:
            try:
                action = Action(action)
            except ValueError:
                raise InvalidRequest("action", "must be approve, reject or escalate") from None
            request, instance = self._lookup(request_id)
            config = self.config_for_kind(request.kind)
            decided_at = self._clock.now()
            chain.decide(
                instance,
                request,
                config,
                tier_id=tier_id,
                actor_id=actor_id,
                action=action,
                reason=reason,
                seq=self._log.last_seq + 1,
                decided_at=decided_at,
            )
            body = {
                "request_id": request_id,
                "tier_id": tier_id,
                "actor_id": actor_id,
                "action": action.value,
                "reason": reason,
                "decided_at": format_ts(decided_at),
            }
            self._apply(self._log.append("decision", body))
            return self.instances[request_id]

    def subscribe(self, customer_id: str, topic: str, channel: Channel | str) -> Subscription:
        with self._lock:
            channel = Channel(channel) if not isinstance(channel, Channel) else channel
            hub.validate_topic(topic)
            existing = self._hub.find_active(customer_id, topic, channel)
            if existing is not None:
                return existing
            body = {
                "change": "subscribed",
                "subscription_id": self._hub.next_subscription_id(),
                "customer_id": customer_id,
                "topic": topic,
                "channel": channel.value,
                "created_at": format_ts(self._clock.now()),
            }
            self._apply(self._log.append("subscription", body))
            return self._hub.subscriptions[body["subscription_id"]]

    def unsubscribe(self, subscription_id: str) -> Subscription:
        with self._lock:
            sub = self._hub.subscriptions.get(subscription_id)
            if sub is None:
                raise UnknownSubscription(f"no subscription {subscription_id!r}")
            if not sub.active:
                return sub
            body = {"change": "unsubscribed", "subscription_id": subscription_id}
            self._apply(self._log.append("subscription", body))
            return self._hub.subscriptions[subscription_id]

    def publish(
        self,
        topic: str,
        subject_ref: str | None = None,
        payload: Mapping[str, str] | None = None,
    ) -> DeliveryReport:
        with self._lock:
            payload = dict(sorted((payload or {}).items()))
            hub.validate_event_fields(topic, subject_ref, payload)
            if topic in RESERVED_TOPICS:
                raise InvalidEvent(f"topic {topic!r} is reserved for the engine")
            body = {
                "topic": topic,
                "subject_ref": subject_ref,
                "payload": payload,
                "occurred_at": format_ts(self._clock.now()),
            }
            stored = self._log.append("domain", body)
            self._apply(stored)
            matched = sum(1 for r in self._hub.deliveries.values() if r.event_seq == stored.seq)
            return DeliveryReport(matched=matched, queued=matched)

    def drive_outbox(
        self,
        max_attempts: int = hub.DEFAULT_MAX_ATTEMPTS,
        backoff_schedule: Sequence[float] = (),
    ) -> int:
        """Drive queued deliveries to completion, logging each transition.

        Sinks are invoked without the state lock held; records queued by
        concurrent publishes are picked up until a scan finds none left.
        """
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        with self._driver_lock:
            transitions = 0
            while True:
                with self._lock:
                    queued = sorted(self._hub.queued_records(), key=lambda r: r.delivery_id)
                    if not queued:
                        return transitions
                    missing = {r.channel for r in queued if self._hub.sink_for(r.channel) is None}
                    if missing:
                        names = ", ".join(sorted(c.value for c in missing))
                        raise UnknownChannelSink(f"no sink registered for channel(s): {names}")
                    batch = [(r, self._hub.events[r.event_seq]) for r in queued]
                for record, event in batch:
                    sink = self._hub.sink_for(record.channel)
                    attempts, error = hub.attempt_delivery(
                        sink, record, event, max_attempts, backoff_schedule
                    )
                    status = DeliveryStatus.DELIVERED if error is None else DeliveryStatus.FAILED
                    body = {
                        "delivery_id": record.delivery_id,
                        "status": status.value,
                        "attempts": attempts,
                        "last_error": error,
                    }
                    with self._lock:
                        self._apply(self._log.append("delivery", body))
                    transitions += 1

    # -- queries ---------------------------------------------------------------

    def request(self, request_id: str) -> ServiceRequest:
        with self._lock:
            request = self.requests.get(request_id)
            if request is None:
                raise UnknownRequest(f"no request {request_id!r}")
            return request

    def instance(self, request_id: str) -> ChainInstance:
        with self._lock:
            instance = self.instances.get(request_id)
            if instance is None:
                raise UnknownRequest(f"no request {request_id!r}")
            return instance

    def chain_history(self, request_id: str) -> tuple[DecisionEvent, ...]:
        return self.instance(request_id).history

    def pending_for_tier(self, tier_id: str) -> list[ChainInstance]:
        """Work queue for one tier: pending requests, oldest submission
        first, ties broken by request id."""
        with self._lock:
            if tier_id not in self.known_tier_ids():
                raise UnknownTier(f"tier {tier_id!r} is not configured in any chain")
            pending = [
                inst
                for inst in self.instances.values()
                if inst.status is Status.PENDING
                and self.config_for_chain(inst.chain_id).tier_at(inst.current_tier_index).tier_id
                == tier_id
            ]
            pending.sort(
                key=lambda inst: (self.requests[inst.request_id].submitted_at, inst.request_id)
            )
            return pending

    def subscription(self, subscription_id: str) -> Subscription:
        with self._lock:
            sub = self._hub.subscriptions.get(subscription_id)
            if sub is None:
                raise UnknownSubscription(f"no subscription {subscription_id!r}")
            return sub

    def subscriptions_for(self, customer_id: str) -> list[Subscription]:
        with self._lock:
            return [
                s for s in self._hub.subscriptions.values() if s.customer_id == customer_id
            ]

    def deliveries_for(self, customer_id: str) -> list[tuple[DeliveryRecord, DomainEvent]]:
        with self._lock:
            return self._hub.deliveries_for(customer_id)

    def domain_event(self, event_seq: int) -> DomainEvent:
        with self._lock:
            return self._hub.events[event_seq]

    # -- replayable state --------------------------------------------------------

    def _lookup(self, request_id: str) -> tuple[ServiceRequest, ChainInstance]:
        request = self.requests.get(request_id)
        if request is None:
            raise UnknownRequest(f"no request {request_id!r}")
        return request, self.instances[request_id]

    def _next_request_id(self) -> str:
        n = len(self.requests) + 1
        while f"req-{n:06d}" in self.requests:
            n += 1
        return f"req-{n:06d}"

    def _apply(self, stored: StoredEvent) -> None:
        """Fold one log record into state. Deterministic: state depends only
        on the log prefix and the chain configuration."""
        if stored.category == "domain":
            self._apply_domain(stored)
        elif stored.category == "decision":
            self._apply_decision(stored)
        elif stored.category == "subscription":
            self._apply_subscription(stored)
        elif stored.category == "delivery":
            body = stored.body
            self._hub.apply_transition(
                body["delivery_id"],
                DeliveryStatus(body["status"]),
                body["attempts"],
                body["last_error"],
            )
        else:  # unreachable: the log validates categories
            raise CorruptLog(stored.seq, f"unknown category {stored.category!r}")

    def _apply_domain(self, stored: StoredEvent) -> None:
        body = stored.body
        if body["topic"] == TOPIC_SUBMITTED:
            request = _request_from_payload(body["payload"])
            config = self.config_for_kind(request.kind)
            instance = chain.submit_request(request, config, seq=stored.seq)
            self.requests[request.request_id] = request
            self.instances[request.request_id] = instance
        self._hub.publish(
            body["topic"],
            subject_ref=body["subject_ref"],
            payload=body["payload"],
            occurred_at=parse_ts(body["occurred_at"]),
            event_seq=stored.seq,
        )

    def _apply_decision(self, stored: StoredEvent) -> None:
        body = stored.body
        request, instance = self._lookup(body["request_id"])
        config = self.config_for_kind(request.kind)
        action = Action(body["action"])
        decided_at = parse_ts(body["decided_at"])
        updated = chain.decide(
            instance,
            request,
            config,
            tier_id=body["tier_id"],
            actor_id=body["actor_id"],
            action=action,
            reason=body["reason"],
            seq=stored.seq,
            decided_at=decided_at,
        )
        self.instances[request.request_id] = updated
        topic = {
            Action.ESCALATE: TOPIC_ESCALATED,
            Action.APPROVE: TOPIC_APPROVED,
            Action.REJECT: TOPIC_REJECTED,
        }[action]
        payload = {
            "request_id": request.request_id,
            "customer_id": request.customer_id,
            "kind": request.kind.value,
            "amount": str(request.amount),
            "currency": request.currency,
            "tier_id": body["tier_id"],
            "actor_id": body["actor_id"],
            "reason": body["reason"],
        }
        if action is Action.ESCALATE:
            payload["next_tier_id"] = config.tier_at(updated.current_tier_index).tier_id
        self._hub.publish(
            topic,
            subject_ref=request.request_id,
            payload=dict(sorted(payload.items())),
            occurred_at=decided_at,
            event_seq=stored.seq,
        )

    def _apply_subscription(self, stored: StoredEvent) -> None:
        body = stored.body
        if body["change"] == "subscribed":
            self._hub.subscribe(
                body["customer_id"],
                body["topic"],
                Channel(body["channel"]),
                subscription_id=body["subscription_id"],
                created_at=parse_ts(body["created_at"]),
            )
        elif body["change"] == "unsubscribed":
            self._hub.unsubscribe(body["subscription_id"])
        else:
            raise CorruptLog(stored.seq, f"unknown subscription change {body['change']!r}")

    def state_dict(self) -> dict:
        """Snapshot of all replayable state, JSON-ready."""
        with self._lock:
            return {
                "last_seq": self._log.last_seq,
                "requests": {
                    rid: {
                        "request_id": r.request_id,
                        "customer_id": r.customer_id,
                        "kind": r.kind.value,
                        "amount": r.amount,
                        "currency": r.currency,
                        "submitted_at": format_ts(r.submitted_at),
                        "details": dict(r.details),
                    }
                    for rid, r in self.requests.items()
                },
                "instances": {
                    rid: {
                        "request_id": i.request_id,
                        "chain_id": i.chain_id,
                        "current_tier_index": i.current_tier_index,
                        "status": i.status.value,
                        "history": [
                            {
                                "seq": e.seq,
                                "request_id": e.request_id,
                                "tier_id": e.tier_id,
                                "actor_id": e.actor_id,
                                "action": e.action.value,
                                "reason": e.reason,
                                "decided_at": format_ts(e.decided_at),
                            }
                            for e in i.history
                        ],
                    }
                    for rid, i in self.instances.items()
                },
                "subscriptions": {
                    sid: {
                        "subscription_id": s.subscription_id,
                        "customer_id": s.customer_id,
                        "topic": s.topic,
                        "channel": s.channel.value,
                        "active": s.active,
                        "created_at": format_ts(s.created_at),
                    }
                    for sid, s in self._hub.subscriptions.items()
                },
                "domain_events": {
                    str(seq): {
                        "event_seq": e.event_seq,
                        "topic": e.topic,
                        "subject_ref": e.subject_ref,
                        "payload": dict(e.payload),
                        "occurred_at": format_ts(e.occurred_at),
                    }
                    for seq, e in self._hub.events.items()
                },
                "deliveries": {
                    did: {
                        "delivery_id": d.delivery_id,
                        "event_seq": d.event_seq,
                        "subscription_id": d.subscription_id,
                        "channel": d.channel.value,
                        "status": d.status.value,
                        "attempts": d.attempts,
                        "last_error": d.last_error,
                    }
                    for did, d in self._hub.deliveries.items()
                },
            }

    def state_json(self) -> str:
        """Canonical serialization: sorted keys, no whitespace. Two states
        are identical iff these strings are byte-identical."""
        return json.dumps(self.state_dict(), sort_keys=True, separators=(",", ":"))
