"""Notification hub: observer registrations and fan-out delivery records.

Customers register (customer, topic, channel) subscriptions; publishing an
event creates exactly one queued delivery record per active subscription
whose topic matches (equality, or the ``"*"`` catch-all). Channel sinks are
dumb transports: the hub owns all retry and bookkeeping, so a sink only has
to report success or a failure reason.

The hub itself is an in-memory state machine with deterministic ids, which
is what makes it replayable from a log (see `bankflow.core`). It can also be
used standalone; in that mode it assigns event sequence numbers itself.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Callable, Mapping, Protocol, Sequence

from .errors import (
    InvalidChannel,
    InvalidEvent,
    InvalidTopic,
    UnknownChannelSink,
    UnknownSubscription,
)

TOPIC_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)*$")
WILDCARD = "*"

DEFAULT_MAX_ATTEMPTS = 3


class Channel(str, Enum):
    EMAIL = "email"
    SMS = "sms"
    IN_APP = "in_app"


class DeliveryStatus(str, Enum):
    QUEUED = "queued"
    DELIVERED = "delivered"
    FAILED = "failed"


@dataclass(frozen=True, slots=True)
class Subscription:
    subscription_id: str
    customer_id: str
    topic: str
    channel: Channel
    active: bool
    created_at: datetime


@dataclass(frozen=True, slots=True)
class DomainEvent:
    """A published fact; ``event_seq`` is the log sequence that recorded it."""

    event_seq: int
    topic: str
    subject_ref: str | None
    payload: Mapping[str, str]
    occurred_at: datetime


@dataclass(frozen=True, slots=True)
class DeliveryRecord:
    delivery_id: str
    event_seq: int
    subscription_id: str
    channel: Channel
    status: DeliveryStatus
    attempts: int
    last_error: str | None


@dataclass(frozen=True, slots=True)
class DeliveryReport:
    matched: int
    queued: int


class ChannelSink(Protocol):
    """Transport for one channel. ``deliver`` returns None on success or a
    failure reason; raising is treated as a failure too."""

    channel: Channel

    def deliver(self, record: DeliveryRecord, event: DomainEvent) -> str | None: ...


class InMemorySink:
    """Always-succeeding sink that keeps what it delivered. The shipped
    default for all channels; real gateways plug in behind the same shape."""

    def __init__(self, channel: Channel):
        self.channel = channel
        self.delivered: list[tuple[DeliveryRecord, DomainEvent]] = []

    def deliver(self, record: DeliveryRecord, event: DomainEvent) -> str | None:
        self.delivered.append((record, event))
        return None


class ScriptedSink:
    """Sink that fails a scripted number of times per record before
    succeeding. ``failures`` is a flat count or a per-delivery-id map."""

    def __init__(self, channel: Channel, failures: int | Mapping[str, int] = 0,
                 reason: str = "scripted failure"):
        self.channel = channel
        self._failures = failures
        self._reason = reason
        self._seen: dict[str, int] = {}
        self.delivered: list[tuple[DeliveryRecord, DomainEvent]] = []

    def _budget(self, delivery_id: str) -> int:
        if isinstance(self._failures, int):
            return self._failures
        return self._failures.get(delivery_id, 0)

    def deliver(self, record: DeliveryRecord, event: DomainEvent) -> str | None:
        attempt = self._seen.get(record.delivery_id, 0) + 1
        self._seen[record.delivery_id] = attempt
        if attempt <= self._budget(record.delivery_id):
            return f"{self._reason} (attempt {attempt})"
        self.delivered.append((record, event))
        return None


def validate_topic(topic: str) -> None:
    if topic == WILDCARD:
        return
    if not isinstance(topic, str) or not topic or not TOPIC_RE.match(topic):
        raise InvalidTopic(f"topic {topic!r} must be dot-separated lowercase segments or '*'")


def _coerce_channel(channel: Channel | str) -> Channel:
    try:
        return Channel(channel)
    except ValueError:
        raise InvalidChannel(
            f"channel {channel!r} must be one of {', '.join(c.value for c in Channel)}"
        ) from None


def validate_event_fields(topic: str, subject_ref: str | None, payload: Mapping[str, str]) -> None:
    if not isinstance(topic, str) or not topic or not TOPIC_RE.match(topic):
        raise InvalidEvent(f"topic {topic!r} must be dot-separated lowercase segments")
    if subject_ref is not None and (not isinstance(subject_ref, str) or not subject_ref):
        raise InvalidEvent("subject_ref must be a non-empty string when present")
    for key, value in payload.items():
        if not isinstance(key, str) or not key:
            raise InvalidEvent("payload keys must be non-empty strings")
        if not isinstance(value, str):
            raise InvalidEvent(f"payload value for {key!r} must be a string")


def delivery_id_for(event_seq: int, subscription_id: str) -> str:
    return f"d{event_seq}-{subscription_id}"


def attempt_delivery(
    sink: ChannelSink,
    record: DeliveryRecord,
    event: DomainEvent,
    max_attempts: int,
    backoff_schedule: Sequence[float] = (),
) -> tuple[int, str | None]:
    """Try a single record until success or the attempt budget runs out.

    Returns (attempts made, last failure reason or None). A raising sink
    counts as a failed attempt; the hub, not the sink, does the bookkeeping.
    """
    attempts = 0
    error: str | None = None
    while attempts < max_attempts:
        if attempts and backoff_schedule:
            wait = backoff_schedule[min(attempts - 1, len(backoff_schedule) - 1)]
            if wait > 0:
                time.sleep(wait)
        attempts += 1
        try:
            error = sink.deliver(record, event)
        except Exception as exc:  # sink bugs are failures, not crashes
            error = f"{type(exc).__name__}: {exc}"
        if error is None:
            break
    return attempts, error


class NotificationHub:
    """Subscriptions, published events and their delivery records.

    Mutating methods are deterministic given their arguments; the hub never
    consults a clock or RNG, so replaying the same calls rebuilds the same
    state. ``on_transition`` (when set) observes every delivery-status
    change made by ``drive_outbox`` before it is applied, which is the hook
    the event log uses.
    """

    def __init__(self) -> None:
        self.subscriptions: dict[str, Subscription] = {}
        self.events: dict[int, DomainEvent] = {}
        self.deliveries: dict[str, DeliveryRecord] = {}
        self._sinks: dict[Channel, ChannelSink] = {}
        self._last_event_seq = 0
        self.on_transition: Callable[[DeliveryRecord], None] | None = None

    # -- registration ------------------------------------------------------

    def register_sink(self, sink: ChannelSink) -> None:
        self._sinks[Channel(sink.channel)] = sink

    def sink_for(self, channel: Channel) -> ChannelSink | None:
        return self._sinks.get(channel)

    def find_active(self, customer_id: str, topic: str, channel: Channel) -> Subscription | None:
        for sub in self.subscriptions.values():
            if (sub.active and sub.customer_id == customer_id
                    and sub.topic == topic and sub.channel == channel):
                return sub
        return None

    def next_subscription_id(self) -> str:
        n = len(self.subscriptions) + 1
        while f"sub-{n:06d}" in self.subscriptions:
            n += 1
        return f"sub-{n:06d}"

    def subscribe(
        self,
        customer_id: str,
        topic: str,
        channel: Channel | str,
        *,
        subscription_id: str | None = None,
        created_at: datetime | None = None,
    ) -> Subscription:
        """Register an observer; idempotent for an already-active triple."""
        channel = _coerce_channel(channel)
        validate_topic(topic)
        if not customer_id or not isinstance(customer_id, str):
            raise ValueError("customer_id must be a non-empty string")
        existing = self.find_active(customer_id, topic, channel)
        if existing is not None:
            return existing
        sub = Subscription(
            subscription_id=subscription_id or self.next_subscription_id(),
            customer_id=customer_id,
            topic=topic,
            channel=channel,
            active=True,
            created_at=created_at if created_at is not None else datetime.min,
        )
        self.subscriptions[sub.subscription_id] = sub
        return sub

    def unsubscribe(self, subscription_id: str) -> Subscription:
        """Deactivate; a no-op if already inactive."""
        sub = self.subscriptions.get(subscription_id)
        if sub is None:
            raise UnknownSubscription(f"no subscription {subscription_id!r}")
        if not sub.active:
            return sub
        sub = replace(sub, active=False)
        self.subscriptions[subscription_id] = sub
        return sub

    # -- publishing --------------------------------------------------------

    def matching_subscriptions(self, topic: str) -> list[Subscription]:
        return [
            sub for sub in self.subscriptions.values()
            if sub.active and (sub.topic == topic or sub.topic == WILDCARD)
        ]

    def publish(
        self,
        topic: str,
        *,
        subject_ref: str | None = None,
        payload: Mapping[str, str] | None = None,
        occurred_at: datetime | None = None,
        event_seq: int | None = None,
    ) -> tuple[DomainEvent, DeliveryReport]:
        """Record an event and queue one delivery per matching subscription."""
        payload = dict(sorted((payload or {}).items()))
        validate_event_fields(topic, subject_ref, payload)
        seq = event_seq if event_seq is not None else self._last_event_seq + 1
        if seq <= self._last_event_seq:
            raise InvalidEvent(
                f"event_seq {seq} not greater than last seen {self._last_event_seq}"
            )
        event = DomainEvent(
            event_seq=seq,
            topic=topic,
            subject_ref=subject_ref,
            payload=payload,
            occurred_at=occurred_at if occurred_at is not None else datetime.min,
        )
        self._last_event_seq = seq
        self.events[seq] = event
        matched = self.matching_subscriptions(topic)
        for sub in matched:
            record = DeliveryRecord(
                delivery_id=delivery_id_for(seq, sub.subscription_id),
                event_seq=seq,
                subscription_id=sub.subscription_id,
                channel=sub.channel,
                status=DeliveryStatus.QUEUED,
                attempts=0,
                last_error=None,
            )
            self.deliveries[record.delivery_id] = record
        return event, DeliveryReport(matched=len(matched), queued=len(matched))

    # -- reading -----------------------------------------------------------

    def deliveries_for(self, customer_id: str) -> list[tuple[DeliveryRecord, DomainEvent]]:
        """The customer's inbox: all records for their subscriptions, oldest
        event first. An unknown customer simply has an empty inbox."""
        owned = {
            sid for sid, sub in self.subscriptions.items() if sub.customer_id == customer_id
        }
        rows = [
            (record, self.events[record.event_seq])
            for record in self.deliveries.values()
            if record.subscription_id in owned
        ]
        rows.sort(key=lambda pair: (pair[0].event_seq, pair[0].delivery_id))
        return rows

    def queued_records(self) -> list[DeliveryRecord]:
        return [r for r in self.deliveries.values() if r.status is DeliveryStatus.QUEUED]

    # -- outbox ------------------------------------------------------------

    def apply_transition(
        self, delivery_id: str, status: DeliveryStatus, attempts: int, last_error: str | None
    ) -> DeliveryRecord:
        record = self.deliveries.get(delivery_id)
        if record is None:
            raise UnknownSubscription(f"no delivery record {delivery_id!r}")
        record = replace(record, status=status, attempts=attempts, last_error=last_error)
        self.deliveries[delivery_id] = record
        return record

    def drive_outbox(
        self,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        backoff_schedule: Sequence[float] = (),
    ) -> int:
        """Attempt every queued record until delivered or out of attempts.

        Returns the number of records that reached a terminal status. Each
        record is attempted up to ``max_attempts`` times in this call, with
        ``backoff_schedule`` waits (seconds) between attempts. Raises
        UnknownChannelSink before touching anything if a queued record's
        channel has no sink.
        """
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        transitions = 0
        while True:
            queued = sorted(self.queued_records(), key=lambda r: r.delivery_id)
            if not queued:
                return transitions
            missing = {r.channel for r in queued if r.channel not in self._sinks}
            if missing:
                names = ", ".join(sorted(c.value for c in missing))
                raise UnknownChannelSink(f"no sink registered for channel(s): {names}")
            for record in queued:
                sink = self._sinks[record.channel]
                event = self.events[record.event_seq]
                attempts, error = attempt_delivery(
                    sink, record, event, max_attempts, backoff_schedule
                )
                status = DeliveryStatus.DELIVERED if error is None else DeliveryStatus.FAILED
                updated = replace(record, status=status, attempts=attempts, last_error=error)
                if self.on_transition is not None:
                    self.on_transition(updated)
                self.deliveries[record.delivery_id] = updated
                transitions += 1
