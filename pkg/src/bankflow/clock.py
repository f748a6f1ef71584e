"""Time sources and the timestamp wire format.

All timestamps in the system are timezone-aware UTC datetimes truncated to
millisecond precision, serialized as RFC 3339 with a ``Z`` suffix
(``2026-01-05T09:30:00.000Z``). Truncation happens at the clock so that a
round trip through the log reproduces the in-memory value bit for bit.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Protocol

RFC3339_FMT = "%Y-%m-%dT%H:%M:%S.%f"


def format_ts(dt: datetime) -> str:
    if dt.tzinfo is None:
        raise ValueError("naive datetime; timestamps must be UTC-aware")
    dt = dt.astimezone(timezone.utc)
    return f"{dt:%Y-%m-%dT%H:%M:%S}.{dt.microsecond // 1000:03d}Z"


def parse_ts(text: str) -> datetime:
    if not text.endswith("Z"):
        raise ValueError(f"timestamp {text!r} must end with 'Z'")
    dt = datetime.strptime(text[:-1], RFC3339_FMT)
    return dt.replace(tzinfo=timezone.utc)


def truncate_ms(dt: datetime) -> datetime:
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


class Clock(Protocol):
    def now(self) -> datetime: ...


class SystemClock:
    """Wall clock, truncated to millisecond precision."""

    def now(self) -> datetime:
        return truncate_ms(datetime.now(timezone.utc))


class FixedClock:
    """Deterministic clock for reproducible runs.

    Starts at ``start`` and advances by ``step`` on every call, so two runs
    issuing the same sequence of calls see identical timestamps.
    """

    DEFAULT_START = datetime(2026, 1, 5, 9, 0, 0, tzinfo=timezone.utc)

    def __init__(self, start: datetime | None = None, step: timedelta = timedelta(seconds=1)):
        self._next = truncate_ms(start if start is not None else self.DEFAULT_START)
        self._step = step

    def now(self) -> datetime:
        current = self._next
        self._next = current + self._step
        return current
