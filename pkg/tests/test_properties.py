"""Property-based checks complementing the seeded acceptance sweeps."""

import hypothesis.strategies as st
from hypothesis import given, settings

from bankflow import Bank, FixedClock
from bankflow.chain import Action, RequestKind, Status, make_chain_config
from bankflow.errors import BankflowError
from bankflow.hub import Channel, NotificationHub

from chainwalk import walk
from conftest import TS

LIMIT_VALUES = [0, 1, 500_000, 5_000_000, None]


@st.composite
def chains(draw):
    length = draw(st.integers(min_value=1, max_value=4))
    picks = sorted(draw(st.lists(
        st.integers(min_value=0, max_value=len(LIMIT_VALUES) - 1),
        min_size=length, max_size=length,
    )))
    return tuple(LIMIT_VALUES[i] for i in picks[:-1]) + (None,)


scripts = st.lists(st.sampled_from(["approve", "reject", "escalate"]), max_size=6)
amounts = st.integers(min_value=0, max_value=6_000_000)


class TestChainEngine:
    @settings(max_examples=300, deadline=None)
    @given(limits=chains(), amount=amounts, script=scripts)
    def test_engine_matches_oracle(self, limits, amount, script):
        config = make_chain_config("hyp", RequestKind.LOAN, limits)
        bank = Bank([config], clock=FixedClock())
        instance = bank.submit_request("loan", amount, customer_id="c-1")
        steps = []
        for action in script:
            tier_id = config.tier_at(bank.instance(instance.request_id)
                                     .current_tier_index).tier_id
            try:
                bank.decide(instance.request_id, tier_id, "officer", action)
                steps.append("ok")
            except BankflowError as exc:
                steps.append(exc.code)
        expected = walk(amount, list(limits), list(script))
        final = bank.instance(instance.request_id)
        assert steps == expected["steps"]
        assert final.status.value == expected["status"]
        assert final.current_tier_index == expected["tier"]

    @settings(max_examples=200, deadline=None)
    @given(limits=chains(), amount=amounts)
    def test_approved_instances_are_within_the_deciding_tiers_authority(self, limits, amount):
        config = make_chain_config("hyp", RequestKind.LOAN, limits,
                                   auto_escalate_on_submit=True)
        bank = Bank([config], clock=FixedClock())
        instance = bank.submit_request("loan", amount, customer_id="c-1")
        tier = config.tier_at(instance.current_tier_index)
        final = bank.decide(instance.request_id, tier.tier_id, "officer", Action.APPROVE)
        assert final.status is Status.APPROVED
        deciding_tier = config.index_of(final.history[-1].tier_id)
        limit = config.tier_at(deciding_tier).authority_limit
        assert limit is None or amount <= limit


class TestHub:
    @settings(max_examples=200, deadline=None)
    @given(
        topic=st.from_regex(r"[a-z0-9_]{1,8}(\.[a-z0-9_]{1,8}){0,2}", fullmatch=True),
        channel=st.sampled_from(list(Channel)),
    )
    def test_subscribe_is_idempotent(self, topic, channel):
        hub = NotificationHub()
        first = hub.subscribe("c-1", topic, channel, created_at=TS)
        second = hub.subscribe("c-1", topic, channel, created_at=TS)
        assert first == second
        assert len(hub.subscriptions) == 1

    @settings(max_examples=200, deadline=None)
    @given(
        sub_topics=st.lists(
            st.sampled_from(["a.b", "b.c", "c.d", "*"]), min_size=0, max_size=8
        ),
        published=st.sampled_from(["a.b", "b.c", "c.d", "x.y"]),
    )
    def test_matched_count_equals_active_matches(self, sub_topics, published):
        hub = NotificationHub()
        for index, topic in enumerate(sub_topics):
            hub.subscribe(f"c-{index}", topic, Channel.IN_APP, created_at=TS)
        _, report = hub.publish(published, occurred_at=TS)
        assert report.matched == sum(1 for t in sub_topics if t in (published, "*"))
