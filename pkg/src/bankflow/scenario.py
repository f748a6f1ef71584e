"""Scripted scenarios: a JSON array of steps driven through a fresh bank.

Steps mirror the operations (``submit``, ``decide``, ``subscribe``,
``unsubscribe``, ``publish``, ``drive_outbox``) plus ``assert`` checks over
the resulting state. A ``ref`` on submit/subscribe names the created id for
later steps, so scripts stay readable while ids stay generated. Action
steps may carry ``expect_error`` when the point of the step is that the
engine refuses it; the step then passes only if that exact code is raised.

A step error fails the run immediately; assertion failures are collected
so one run reports every broken expectation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import Bank
from .errors import BankflowError, ParseError

ASSERT_CHECKS = ("request_status", "queue_size", "inbox_size", "history_length")


@dataclass(frozen=True, slots=True)
class StepResult:
    index: int
    ok: bool
    summary: str


@dataclass(slots=True)
class ScenarioResult:
    bank: Bank
    results: list[StepResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def lines(self) -> list[str]:
        width = len(str(len(self.results)))
        return [
            f"[{r.index:>{width}}] {'ok  ' if r.ok else 'FAIL'} {r.summary}"
            for r in self.results
        ]


def load_scenario(path: str | Path) -> list[dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        steps = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(steps, list) or not all(isinstance(s, dict) for s in steps):
        raise ParseError(f"{path}: scenario must be a JSON array of step objects")
    return steps


class _Runner:
    def __init__(self, bank: Bank):
        self.bank = bank
        self.refs: dict[str, str] = {}

    def request_id(self, step: dict) -> str:
        if "request_id" in step:
            return step["request_id"]
        ref = step.get("ref")
        if ref is None:
            raise ValueError("step needs 'ref' or 'request_id'")
        if ref not in self.refs:
            raise ValueError(f"unknown ref {ref!r}")
        return self.refs[ref]

    def subscription_id(self, step: dict) -> str:
        if "subscription_id" in step:
            return step["subscription_id"]
        ref = step.get("ref")
        if ref is None or ref not in self.refs:
            raise ValueError(f"step needs 'ref' or 'subscription_id' (got {ref!r})")
        return self.refs[ref]

    def run_step(self, step: dict) -> str:
        kind = step.get("step")
        if kind == "submit":
            instance = self.bank.submit_request(
                step["kind"],
                step["amount"],
                customer_id=step.get("customer_id", "cust-1"),
                currency=step.get("currency", "INR"),
                details=step.get("details"),
                request_id=step.get("request_id"),
            )
            if "ref" in step:
                self.refs[step["ref"]] = instance.request_id
            config = self.bank.config_for_chain(instance.chain_id)
            return (
                f"submitted {step['kind']} {step['amount']} as {instance.request_id} "
                f"(pending at {instance.current_tier(config).tier_id})"
            )
        if kind == "decide":
            rid = self.request_id(step)
            instance = self.bank.decide(
                rid, step["tier_id"], step.get("actor_id", "officer"),
                step["action"], step.get("reason", ""),
            )
            return f"{step['action']} {rid} at {step['tier_id']} -> {instance.status.value}"
        if kind == "subscribe":
            sub = self.bank.subscribe(step["customer_id"], step["topic"], step["channel"])
            if "ref" in step:
                self.refs[step["ref"]] = sub.subscription_id
            return (
                f"subscribed {step['customer_id']} to {step['topic']} "
                f"via {step['channel']} as {sub.subscription_id}"
            )
        if kind == "unsubscribe":
            sub = self.bank.unsubscribe(self.subscription_id(step))
            return f"unsubscribed {sub.subscription_id}"
        if kind == "publish":
            report = self.bank.publish(
                step["topic"],
                subject_ref=step.get("subject_ref"),
                payload=step.get("payload"),
            )
            return f"published {step['topic']} -> matched {report.matched}"
        if kind == "drive_outbox":
            count = self.bank.drive_outbox(
                max_attempts=step.get("max_attempts", 3),
                backoff_schedule=step.get("backoff_schedule", ()),
            )
            return f"drove outbox -> {count} transition(s)"
        raise ValueError(f"unknown step type {kind!r}")

    def run_assert(self, step: dict) -> tuple[bool, str]:
        check = step.get("check")
        if check == "request_status":
            rid = self.request_id(step)
            actual: object = self.bank.instance(rid).status.value
            label = f"request_status {rid}"
        elif check == "queue_size":
            actual = len(self.bank.pending_for_tier(step["tier_id"]))
            label = f"queue_size {step['tier_id']}"
        elif check == "inbox_size":
            actual = len(self.bank.deliveries_for(step["customer_id"]))
            label = f"inbox_size {step['customer_id']}"
        elif check == "history_length":
            rid = self.request_id(step)
            actual = len(self.bank.chain_history(rid))
            label = f"history_length {rid}"
        else:
            raise ValueError(
                f"unknown assert check {check!r} (expected one of {', '.join(ASSERT_CHECKS)})"
            )
        expected = step.get("expected")
        if actual == expected:
            return True, f"assert {label} == {expected!r}"
        return False, f"assert {label}: expected {expected!r}, actual {actual!r}"


def run_scenario(steps: list[dict], bank: Bank) -> ScenarioResult:
    """Execute steps in order. The returned result carries the bank so
    callers can inspect (or replay against) the final state."""
    runner = _Runner(bank)
    result = ScenarioResult(bank=bank)
    for index, step in enumerate(steps, start=1):
        try:
            if step.get("step") == "assert":
                ok, summary = runner.run_assert(step)
                result.results.append(StepResult(index, ok, summary))
                continue
            expect_error = step.get("expect_error")
            try:
                summary = runner.run_step(step)
            except BankflowError as exc:
                if expect_error is not None and exc.code == expect_error:
                    result.results.append(
                        StepResult(index, True, f"{step['step']} refused as expected: {exc.code}")
                    )
                    continue
                result.results.append(
                    StepResult(index, False, f"{step['step']} failed: {exc.code}: {exc}")
                )
                return result
            if expect_error is not None:
                result.results.append(
                    StepResult(index, False,
                               f"{step['step']} succeeded but {expect_error} was expected")
                )
                return result
            result.results.append(StepResult(index, True, summary))
        except (KeyError, ValueError, TypeError) as exc:
            detail = exc.args[0] if exc.args else exc
            result.results.append(StepResult(index, False, f"malformed step: {detail}"))
            return result
    return result
