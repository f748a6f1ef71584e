"""Event-sourced banking back office.

Customer requests (loans, insurance claims, account openings) climb a
configured chain of approval tiers one step at a time, while registered
observers receive notifications about what happened over their chosen
channels. Every state change is one record in an append-only log, and
replaying the log rebuilds the exact state.
"""

from .chain import (
    UNBOUNDED,
    Action,
    ChainConfig,
    ChainInstance,
    DecisionEvent,
    HandlerTier,
    RequestKind,
    ServiceRequest,
    Status,
    default_chain_configs,
    make_chain_config,
)
from .clock import FixedClock, SystemClock
from .core import (
    RESERVED_TOPICS,
    TOPIC_APPROVED,
    TOPIC_ESCALATED,
    TOPIC_REJECTED,
    TOPIC_SUBMITTED,
    Bank,
)
from .errors import BankflowError
from .hub import (
    Channel,
    DeliveryRecord,
    DeliveryReport,
    DeliveryStatus,
    DomainEvent,
    InMemorySink,
    NotificationHub,
    ScriptedSink,
    Subscription,
)
from .store import EventLog, StoredEvent, read_log

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Bank",
    "BankflowError",
    "ChainConfig",
    "ChainInstance",
    "Channel",
    "DecisionEvent",
    "DeliveryRecord",
    "DeliveryReport",
    "DeliveryStatus",
    "DomainEvent",
    "EventLog",
    "FixedClock",
    "HandlerTier",
    "InMemorySink",
    "NotificationHub",
    "RESERVED_TOPICS",
    "RequestKind",
    "ScriptedSink",
    "ServiceRequest",
    "Status",
    "StoredEvent",
    "Subscription",
    "SystemClock",
    "TOPIC_APPROVED",
    "TOPIC_ESCALATED",
    "TOPIC_REJECTED",
    "TOPIC_SUBMITTED",
    "UNBOUNDED",
    "default_chain_configs",
    "make_chain_config",
    "read_log",
]
