"""Request and response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field

from ..chain import Action, ChainConfig, ChainInstance, RequestKind, ServiceRequest
from ..clock import format_ts
from ..hub import Channel, DeliveryRecord, DeliveryReport, DomainEvent, Subscription

Limit = Union[int, Literal["UNBOUNDED"]]


class SubmitRequestBody(BaseModel):
    kind: RequestKind
    amount: int = Field(ge=0)
    currency: str = "INR"
    details: dict[str, str] = Field(default_factory=dict)


class DecisionBody(BaseModel):
    action: Action
    reason: str = ""


class SubscriptionBody(BaseModel):
    topic: str
    channel: Channel


class PublishBody(BaseModel):
    topic: str
    subject_ref: str | None = None
    payload: dict[str, str] = Field(default_factory=dict)


class DecisionEventView(BaseModel):
    seq: int
    request_id: str
    tier_id: str
    actor_id: str
    action: Action
    reason: str
    decided_at: str


class ChainInstanceView(BaseModel):
    request_id: str
    customer_id: str
    kind: RequestKind
    amount: int
    currency: str
    submitted_at: str
    details: dict[str, str]
    chain_id: str
    status: str
    current_tier_index: int
    current_tier_id: str
    current_tier_name: str
    current_tier_limit: Limit
    is_last_tier: bool
    history: list[DecisionEventView]

    @classmethod
    def build(cls, instance: ChainInstance, request: ServiceRequest,
              config: ChainConfig) -> "ChainInstanceView":
        tier = instance.current_tier(config)
        return cls(
            request_id=request.request_id,
            customer_id=request.customer_id,
            kind=request.kind,
            amount=request.amount,
            currency=request.currency,
            submitted_at=format_ts(request.submitted_at),
            details=dict(request.details),
            chain_id=instance.chain_id,
            status=instance.status.value,
            current_tier_index=instance.current_tier_index,
            current_tier_id=tier.tier_id,
            current_tier_name=tier.display_name,
            current_tier_limit="UNBOUNDED" if tier.authority_limit is None
            else tier.authority_limit,
            is_last_tier=instance.current_tier_index == config.last_index,
            history=[
                DecisionEventView(
                    seq=e.seq,
                    request_id=e.request_id,
                    tier_id=e.tier_id,
                    actor_id=e.actor_id,
                    action=e.action,
                    reason=e.reason,
                    decided_at=format_ts(e.decided_at),
                )
                for e in instance.history
            ],
        )


class SubscriptionView(BaseModel):
    subscription_id: str
    customer_id: str
    topic: str
    channel: Channel
    active: bool
    created_at: str

    @classmethod
    def build(cls, sub: Subscription) -> "SubscriptionView":
        return cls(
            subscription_id=sub.subscription_id,
            customer_id=sub.customer_id,
            topic=sub.topic,
            channel=sub.channel,
            active=sub.active,
            created_at=format_ts(sub.created_at),
        )


class NotificationView(BaseModel):
    delivery_id: str
    event_seq: int
    topic: str
    subject_ref: str | None
    payload: dict[str, str]
    occurred_at: str
    channel: Channel
    status: str
    attempts: int
    last_error: str | None

    @classmethod
    def build(cls, record: DeliveryRecord, event: DomainEvent) -> "NotificationView":
        return cls(
            delivery_id=record.delivery_id,
            event_seq=record.event_seq,
            topic=event.topic,
            subject_ref=event.subject_ref,
            payload=dict(event.payload),
            occurred_at=format_ts(event.occurred_at),
            channel=record.channel,
            status=record.status.value,
            attempts=record.attempts,
            last_error=record.last_error,
        )


class DeliveryReportView(BaseModel):
    matched: int
    queued: int

    @classmethod
    def build(cls, report: DeliveryReport) -> "DeliveryReportView":
        return cls(matched=report.matched, queued=report.queued)


class MeView(BaseModel):
    actor_id: str
    role: str
    tier_id: str | None


class ErrorBody(BaseModel):
    code: str
    message: str
