"""HTTP facade over the bank: JSON in, JSON out, engine error codes intact.

Every caller authenticates with a bearer token from the static table;
customers submit requests and manage their subscriptions, officers work
their own tier's queue, admins see everything and may publish events
manually. Domain errors surface with their code verbatim in the body
(``{"code": "AuthorityExceeded", ...}``) so clients never parse messages.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from fastapi import Depends, FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import Role, RoleToken
from ..core import Bank
from ..errors import BankflowError
from .schemas import (
    ChainInstanceView,
    DecisionBody,
    DeliveryReportView,
    MeView,
    NotificationView,
    PublishBody,
    SubmitRequestBody,
    SubscriptionBody,
    SubscriptionView,
)

# Engine error code -> HTTP status. Conflicts with the chain's current
# state are 409 so clients can distinguish stale console state from bad
# input.
ERROR_STATUS = {
    "InvalidRequest": 400,
    "UnknownKind": 400,
    "InvalidTopic": 400,
    "InvalidChannel": 400,
    "InvalidEvent": 400,
    "UnknownRequest": 404,
    "UnknownSubscription": 404,
    "UnknownTier": 404,
    "NotCurrentTier": 409,
    "TerminalState": 409,
    "AuthorityExceeded": 409,
    "NoNextTier": 409,
}


class AuthError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


def create_app(bank: Bank, tokens: Mapping[str, RoleToken],
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="bankflow", version=__version__)

    @app.exception_handler(BankflowError)
    async def domain_error(_request: Request, exc: BankflowError) -> JSONResponse:
        status = ERROR_STATUS.get(exc.code, 500)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(AuthError)
    async def auth_error(_request: Request, exc: AuthError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def body_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in e['loc'] if p != 'body')}: {e['msg']}"
            for e in exc.errors()
        )
        return JSONResponse(status_code=400,
                            content={"code": "InvalidRequest", "message": problems})

    def principal(authorization: str | None = Header(default=None)) -> RoleToken:
        if authorization is None:
            raise AuthError(401, "Unauthorized", "missing Authorization header")
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise AuthError(401, "Unauthorized", "expected 'Bearer <token>'")
        entry = tokens.get(token.strip())
        if entry is None:
            raise AuthError(401, "Unauthorized", "unknown token")
        return entry

    def require(p: RoleToken, *roles: Role) -> None:
        if p.role not in roles:
            allowed = ", ".join(r.value for r in roles)
            raise AuthError(403, "Forbidden", f"requires role {allowed}, token is {p.role.value}")

    def instance_view(request_id: str) -> ChainInstanceView:
        request = bank.request(request_id)
        return ChainInstanceView.build(
            bank.instance(request_id), request, bank.config_for_kind(request.kind)
        )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "last_seq": bank.last_seq}

    @app.get("/me", response_model=MeView)
    def me(p: RoleToken = Depends(principal)) -> MeView:
        return MeView(actor_id=p.actor_id, role=p.role.value, tier_id=p.tier_id)

    @app.post("/requests", response_model=ChainInstanceView, status_code=201)
    def submit_request(body: SubmitRequestBody, p: RoleToken = Depends(principal)):
        require(p, Role.CUSTOMER)
        instance = bank.submit_request(
            body.kind, body.amount, customer_id=p.actor_id,
            currency=body.currency, details=body.details,
        )
        return instance_view(instance.request_id)

    @app.get("/requests/{request_id}", response_model=ChainInstanceView)
    def get_request(request_id: str, p: RoleToken = Depends(principal)):
        return instance_view(request_id)

    @app.get("/requests/{request_id}/history")
    def get_history(request_id: str, p: RoleToken = Depends(principal)):
        return instance_view(request_id).history

    @app.post("/requests/{request_id}/decision", response_model=ChainInstanceView)
    def decide(request_id: str, body: DecisionBody, p: RoleToken = Depends(principal)):
        require(p, Role.OFFICER)
        request = bank.request(request_id)
        config = bank.config_for_kind(request.kind)
        if p.tier_id not in config.tier_ids():
            raise AuthError(
                403, "Forbidden",
                f"tier {p.tier_id} has no authority over chain {config.chain_id}",
            )
        bank.decide(request_id, p.tier_id, p.actor_id, body.action, body.reason)
        return instance_view(request_id)

    @app.get("/queues/{tier_id}", response_model=list[ChainInstanceView])
    def queue(tier_id: str, p: RoleToken = Depends(principal)):
        require(p, Role.OFFICER, Role.ADMIN)
        if p.role is Role.OFFICER and p.tier_id != tier_id:
            raise AuthError(403, "Forbidden", f"officer of {p.tier_id} cannot read {tier_id}")
        return [instance_view(i.request_id) for i in bank.pending_for_tier(tier_id)]

    @app.post("/subscriptions", response_model=SubscriptionView, status_code=201)
    def subscribe(body: SubscriptionBody, p: RoleToken = Depends(principal)):
        require(p, Role.CUSTOMER)
        return SubscriptionView.build(bank.subscribe(p.actor_id, body.topic, body.channel))

    @app.delete("/subscriptions/{subscription_id}", response_model=SubscriptionView)
    def unsubscribe(subscription_id: str, p: RoleToken = Depends(principal)):
        require(p, Role.CUSTOMER, Role.ADMIN)
        sub = bank.subscription(subscription_id)
        if p.role is Role.CUSTOMER and sub.customer_id != p.actor_id:
            raise AuthError(403, "Forbidden", "not your subscription")
        return SubscriptionView.build(bank.unsubscribe(subscription_id))

    @app.get("/customers/{customer_id}/subscriptions",
             response_model=list[SubscriptionView])
    def subscriptions(customer_id: str, p: RoleToken = Depends(principal)):
        _require_self_or_admin(p, customer_id)
        return [SubscriptionView.build(s) for s in bank.subscriptions_for(customer_id)]

    @app.get("/customers/{customer_id}/notifications",
             response_model=list[NotificationView])
    def notifications(customer_id: str, p: RoleToken = Depends(principal)):
        _require_self_or_admin(p, customer_id)
        return [NotificationView.build(r, e) for r, e in bank.deliveries_for(customer_id)]

    def _require_self_or_admin(p: RoleToken, customer_id: str) -> None:
        if p.role is Role.ADMIN:
            return
        if p.role is not Role.CUSTOMER or p.actor_id != customer_id:
            raise AuthError(403, "Forbidden", "only that customer or an admin may read this")

    @app.post("/events", response_model=DeliveryReportView, status_code=202)
    def publish(body: PublishBody, p: RoleToken = Depends(principal)):
        require(p, Role.ADMIN)
        report = bank.publish(body.topic, subject_ref=body.subject_ref, payload=body.payload)
        return DeliveryReportView.build(report)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=str(ui_dir), html=True), name="console")

    return app
