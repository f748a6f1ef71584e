"""Acceptance suite: one test per criterion, printing one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute.
"""

import itertools
import json
import random
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

from bankflow import (
    Bank,
    Channel,
    FixedClock,
    InMemorySink,
    ScriptedSink,
    default_chain_configs,
)
from bankflow import chain as chain_mod
from bankflow.catalog import ELEMENT_ORDER, validate_entries
from bankflow.chain import Action, RequestKind, ServiceRequest, Status, make_chain_config
from bankflow.cli import main as cli_main
from bankflow.errors import BankflowError, SchemaError, TerminalState
from bankflow.hub import DeliveryStatus, NotificationHub
from bankflow.scenario import load_scenario, run_scenario
from bankflow.store import EventLog

from chainwalk import interesting_amounts, monotone_limit_chains, walk
from conftest import TS

ROOT = Path(__file__).parent.parent
LIMIT_VALUES = [0, 1, 500_000, 5_000_000, None]
ACTIONS = ("approve", "reject", "escalate")


def report(name: str, violations: list, detail: str) -> None:
    status = "PASS" if not violations else "FAIL"
    print(f"\n[acceptance] {name}: {status} — {detail}")
    assert not violations, f"{name}: {len(violations)} violation(s); first: {violations[0]}"


def make_request(amount: int, kind=RequestKind.LOAN) -> ServiceRequest:
    return ServiceRequest(
        request_id="r-1", customer_id="c-1", kind=kind, amount=amount,
        currency="INR", submitted_at=TS, details={},
    )


def run_engine_script(config, request, script):
    """Drive the engine with actions addressed at the current tier,
    mirroring what the oracle walker does."""
    instance = chain_mod.submit_request(request, config, seq=1)
    steps = []
    for action in script:
        tier_id = config.tier_at(instance.current_tier_index).tier_id
        try:
            instance = chain_mod.decide(
                instance, request, config,
                tier_id=tier_id, actor_id="officer", action=Action(action),
                reason="", seq=len(instance.history) + 2, decided_at=TS,
            )
            steps.append("ok")
        except BankflowError as exc:
            steps.append(exc.code)
    return instance, steps


class TestChainOracleEquivalence:
    def test_engine_agrees_with_brute_force_walker_on_the_full_grid(self):
        started = time.perf_counter()
        scripts = [
            script
            for length in range(0, 6)
            for script in itertools.product(ACTIONS, repeat=length)
        ]
        violations = []
        runs = 0
        for limits in monotone_limit_chains(LIMIT_VALUES, 4):
            config = make_chain_config("grid", RequestKind.LOAN, limits)
            for amount in interesting_amounts(limits):
                request = make_request(amount)
                for script in scripts:
                    runs += 1
                    expected = walk(amount, list(limits), list(script))
                    instance, steps = run_engine_script(config, request, script)
                    trail = [
                        (config.index_of(e.tier_id), e.action.value)
                        for e in instance.history
                    ]
                    got = (instance.status.value, instance.current_tier_index, trail, steps)
                    want = (expected["status"], expected["tier"], expected["events"],
                            expected["steps"])
                    if got != want:
                        violations.append((limits, amount, script, got, want))
                    # monotone limits: an approval legal at tier i stays legal above it
                    for tier_index, action in trail:
                        if action == "approve":
                            uncovered = [
                                j for j in range(tier_index, len(limits))
                                if limits[j] is not None and amount > limits[j]
                            ]
                            if uncovered:
                                violations.append((limits, amount, script, "monotonicity", uncovered))
        elapsed = time.perf_counter() - started
        detail = (f"{runs} script runs across {len(monotone_limit_chains(LIMIT_VALUES, 4))} "
                  f"chains, 0 disagreements, {elapsed:.1f}s")
        if elapsed >= 60:
            violations.append(("runtime", elapsed))
        report("chain-oracle-equivalence", violations, detail)


class TestNoSkipAndTerminalAbsorption:
    def check_history(self, instance, config):
        indices = [config.index_of(e.tier_id) for e in instance.history]
        terminal = instance.status is not Status.PENDING
        expected_len = instance.current_tier_index + (1 if terminal else 0)
        if indices != list(range(expected_len)):
            return f"history indices {indices} not 0..{expected_len - 1}"
        actions = [e.action for e in instance.history]
        if terminal:
            if not actions or actions[-1] not in (Action.APPROVE, Action.REJECT):
                return f"terminal instance must end with approve/reject, got {actions}"
            head = actions[:-1]
        else:
            head = actions
        if any(a is not Action.ESCALATE for a in head):
            return f"non-final decisions must all be escalations, got {actions}"
        return None

    def test_randomized_decision_sequences(self):
        rng = random.Random(0xBA2C)
        violations = []
        sequences = 10_000
        for trial in range(sequences):
            length = rng.randint(1, 4)
            picks = sorted(rng.choices(range(len(LIMIT_VALUES)), k=length))
            limits = tuple(LIMIT_VALUES[i] for i in picks[:-1]) + (None,)
            tier_ids = tuple(f"T{i}" for i in range(length))
            config = make_chain_config(
                "rnd", RequestKind.LOAN, limits, tier_ids,
                auto_escalate_on_submit=rng.random() < 0.3,
            )
            bank = Bank([config], clock=FixedClock())
            amount = rng.choice([0, 1, rng.randint(0, 6_000_000)])
            instance = bank.submit_request("loan", amount, customer_id="c-1")
            rid = instance.request_id
            problem = self.check_history(instance, config)
            if problem:
                violations.append((trial, "submit", problem))
            for _ in range(rng.randint(1, 8)):
                before_instance = bank.instance(rid)
                before_seq = bank.last_seq
                tier_id = (config.tier_at(before_instance.current_tier_index).tier_id
                           if rng.random() < 0.7
                           else rng.choice(tier_ids + ("GHOST",)))
                action = rng.choice(ACTIONS)
                try:
                    bank.decide(rid, tier_id, "officer", action)
                except BankflowError:
                    if bank.last_seq != before_seq:
                        violations.append((trial, "error appended to the log"))
                    if bank.instance(rid) != before_instance:
                        violations.append((trial, "error mutated the instance"))
                problem = self.check_history(bank.instance(rid), config)
                if problem:
                    violations.append((trial, problem))
            final = bank.instance(rid)
            if final.status is not Status.PENDING:
                frozen = bank.state_json()
                for action in ACTIONS:
                    try:
                        bank.decide(rid, config.tier_at(final.current_tier_index).tier_id,
                                    "officer", action)
                        violations.append((trial, f"post-terminal {action} did not raise"))
                    except TerminalState:
                        pass
                    except BankflowError as exc:
                        violations.append((trial, f"post-terminal {action} raised {exc.code}"))
                if bank.state_json() != frozen:
                    violations.append((trial, "post-terminal action changed state"))
        report("no-skip-and-terminal-absorption", violations,
               f"{sequences} randomized sequences, 0 violations")


class TestObserverExactness:
    def test_randomized_op_sequences_match_shadow_set(self):
        rng = random.Random(0x0B5E)
        topics = ["request.approved", "loan.interest.due", "bill.telephone.due",
                  "service.added", "*"]
        customers = [f"c{i}" for i in range(5)]
        violations = []
        sequences = 1_000
        publishes = 0
        for trial in range(sequences):
            hub = NotificationHub()
            shadow = {}  # subscription_id -> (topic,) for active subs
            for _ in range(rng.randint(5, 25)):
                roll = rng.random()
                if roll < 0.4:
                    sub = hub.subscribe(rng.choice(customers), rng.choice(topics),
                                        rng.choice(list(Channel)), created_at=TS)
                    shadow[sub.subscription_id] = sub.topic
                elif roll < 0.65 and shadow:
                    victim = rng.choice(sorted(shadow))
                    hub.unsubscribe(victim)
                    del shadow[victim]
                else:
                    topic = rng.choice(topics[:-1])
                    publishes += 1
                    event, record_report = hub.publish(topic, occurred_at=TS)
                    expected = {
                        sid for sid, sub_topic in shadow.items()
                        if sub_topic in (topic, "*")
                    }
                    created = {
                        r.subscription_id for r in hub.deliveries.values()
                        if r.event_seq == event.event_seq
                    }
                    if created != expected or record_report.matched != len(expected):
                        violations.append((trial, topic, created, expected))
        report("observer-exactness", violations,
               f"{sequences} op sequences, {publishes} publishes checked, 0 violations")


class TestOutboxConvergence:
    def test_retry_rule_for_scripted_failure_counts(self):
        violations = []
        hub = NotificationHub()
        for i in range(4):
            hub.subscribe(f"c{i}", "loan.interest.due", "email", created_at=TS)
        event, _ = hub.publish("loan.interest.due", occurred_at=TS)
        queued = sorted(hub.queued_records(), key=lambda r: r.delivery_id)
        failures = {record.delivery_id: k for k, record in enumerate(queued)}
        hub.register_sink(ScriptedSink(Channel.EMAIL, failures=failures, reason="down"))
        transitions = hub.drive_outbox(max_attempts=3)
        if transitions != 4:
            violations.append(f"expected 4 transitions, got {transitions}")
        for record_id, k in failures.items():
            record = hub.deliveries[record_id]
            want_status = DeliveryStatus.DELIVERED if k < 3 else DeliveryStatus.FAILED
            want_attempts = min(k + 1, 3)
            if record.status is not want_status or record.attempts != want_attempts:
                violations.append(
                    f"k={k}: got ({record.status.value}, {record.attempts}), "
                    f"want ({want_status.value}, {want_attempts})"
                )
            if want_status is DeliveryStatus.FAILED and not record.last_error:
                violations.append(f"k={k}: failed record missing last_error")
        if hub.queued_records():
            violations.append("records left queued after drive")
        terminal = [r for r in hub.deliveries.values()
                    if r.status is not DeliveryStatus.QUEUED]
        if len(terminal) != 4:
            violations.append("delivered+failed != queued count")
        report("outbox-convergence", violations,
               "k in {0,1,2,3}: delivered iff k<3, attempts=min(k+1,3)")


def generate_scenario(rng: random.Random) -> list[dict]:
    """Random but always-legal step list, with assertions predicted by an
    independent bookkeeping model of statuses and queues."""
    configs = default_chain_configs()
    steps: list[dict] = []
    model = {}  # ref -> {kind, amount, tier, status}
    sub_refs: list[str] = []
    topics = ["request.approved", "request.escalated", "loan.interest.due",
              "service.added", "*"]
    customers = ["alice", "bala", "chitra"]
    for index in range(rng.randint(10, 30)):
        roll = rng.random()
        if roll < 0.25 or not model:
            kind = rng.choice(["loan", "insurance_claim", "account_opening"])
            amount = 0 if kind == "account_opening" else rng.choice(
                [0, 1, 499_999, 500_000, 500_001, 2_000_000, 20_000_000]
            )
            ref = f"r{len(model)}"
            steps.append({
                "step": "submit", "ref": ref, "kind": kind, "amount": amount,
                "customer_id": rng.choice(customers),
            })
            model[ref] = {"kind": kind, "amount": amount, "tier": 0, "status": "pending"}
        elif roll < 0.55:
            pending = [r for r, m in model.items() if m["status"] == "pending"]
            if not pending:
                continue
            ref = rng.choice(pending)
            entry = model[ref]
            config = configs[RequestKind(entry["kind"])]
            tier = config.tiers[entry["tier"]]
            covered = tier.authority_limit is None or entry["amount"] <= tier.authority_limit
            options = ["reject"]
            if covered:
                options.append("approve")
            if entry["tier"] < config.last_index:
                options.append("escalate")
            action = rng.choice(options)
            steps.append({
                "step": "decide", "ref": ref, "tier_id": tier.tier_id,
                "actor_id": f"officer-{tier.tier_id.lower()}", "action": action,
            })
            if action == "escalate":
                entry["tier"] += 1
            else:
                entry["status"] = "approved" if action == "approve" else "rejected"
        elif roll < 0.7:
            ref = f"s{len(sub_refs)}"
            steps.append({
                "step": "subscribe", "ref": ref, "customer_id": rng.choice(customers),
                "topic": rng.choice(topics), "channel": rng.choice(["email", "sms", "in_app"]),
            })
            sub_refs.append(ref)
        elif roll < 0.8 and sub_refs:
            steps.append({"step": "unsubscribe", "ref": rng.choice(sub_refs)})
        elif roll < 0.9:
            steps.append({
                "step": "publish", "topic": rng.choice(topics[2:-1]),
                "payload": {"n": str(index)},
            })
        else:
            steps.append({"step": "drive_outbox"})
        if rng.random() < 0.25 and model:
            ref = rng.choice(sorted(model))
            steps.append({
                "step": "assert", "check": "request_status", "ref": ref,
                "expected": model[ref]["status"],
            })
        if rng.random() < 0.1:
            tier_id = rng.choice(["BSC", "OZSSC", "HO"])
            size = 0
            for entry in model.values():
                config = configs[RequestKind(entry["kind"])]
                if (entry["status"] == "pending"
                        and config.tiers[entry["tier"]].tier_id == tier_id):
                    size += 1
            steps.append({
                "step": "assert", "check": "queue_size", "tier_id": tier_id,
                "expected": size,
            })
    return steps


class TestReplayDeterminism:
    def run_logged(self, steps, path):
        clock = FixedClock()
        bank = Bank(default_chain_configs(), EventLog.open(path, clock), clock,
                    sinks=[InMemorySink(c) for c in Channel])
        return run_scenario(steps, bank)

    def test_shipped_and_random_scenarios_replay_byte_identically(self, tmp_path):
        violations = []
        cases = []
        for name in ("loan-escalation.json", "insurance-claim.json"):
            cases.append((name, load_scenario(ROOT / "scenarios" / name)))
        rng = random.Random(0x51ED)
        for index in range(100):
            cases.append((f"random-{index}", generate_scenario(rng)))
        for label, steps in cases:
            path = tmp_path / f"{label}.jsonl"
            result = self.run_logged(steps, path)
            if not result.ok:
                failing = [line for line in result.lines() if "FAIL" in line]
                violations.append((label, "scenario failed", failing[:1]))
                continue
            replayed = Bank.replay(default_chain_configs(), path)
            if replayed.state_json() != result.bank.state_json():
                violations.append((label, "replay diverged from live state"))
        report("replay-determinism", violations,
               f"{len(cases)} scenarios (2 shipped + 100 random), "
               "replayed state byte-identical to live state")


class TestShippedScenarios:
    @pytest.mark.parametrize("name", ["loan-escalation.json", "insurance-claim.json"])
    def test_cli_run_exits_0(self, name, tmp_path):
        log = tmp_path / "run.jsonl"
        runner = CliRunner()
        result = runner.invoke(cli_main, [
            "scenario", "run", str(ROOT / "scenarios" / name),
            "--fixed-clock", "--log", str(log),
        ])
        violations = []
        if result.exit_code != 0:
            violations.append(result.output)
        bank = Bank.replay(default_chain_configs(), log)
        instance = bank.instance("req-000001")
        if instance.status is not Status.APPROVED:
            violations.append(f"terminal status {instance.status}")
        customer = "alice" if name.startswith("loan") else "bala"
        topics = [e.topic for _, e in bank.deliveries_for(customer)]
        if "request.approved" not in topics:
            violations.append(f"{customer} inbox missing the approval notification: {topics}")
        report(f"shipped-scenario:{name}", violations,
               f"exit 0, approved, {customer} notified")


class TestPatternCatalog:
    def test_shipped_catalog_and_deletion_mutants(self):
        entries = json.loads((ROOT / "catalog" / "patterns.json").read_text(encoding="utf-8"))
        violations = []
        descriptors = validate_entries(entries)
        if [d.name for d in descriptors] != [
            "Notification (Observer)", "Request (Chain Of Responsibility)",
        ]:
            violations.append("shipped catalog does not validate to the two patterns")
        caught = 0
        total = 0
        for index in range(len(entries)):
            for element in ELEMENT_ORDER:
                total += 1
                mutant = [dict(e) for e in entries]
                del mutant[index][element]
                try:
                    validate_entries(mutant)
                    violations.append(f"mutant survived: entry {index} without {element}")
                except SchemaError:
                    caught += 1
        report("pattern-catalog", violations,
               f"2 entries valid, {caught}/{total} deletion mutants caught")
