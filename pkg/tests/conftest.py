import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bankflow import Bank, Channel, FixedClock, InMemorySink, default_chain_configs

TS = datetime(2026, 1, 5, 9, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def clock():
    return FixedClock()


@pytest.fixture
def bank(clock):
    """Fresh in-memory bank with the default chains and happy sinks."""
    return Bank(
        default_chain_configs(),
        clock=clock,
        sinks=[InMemorySink(c) for c in Channel],
    )
