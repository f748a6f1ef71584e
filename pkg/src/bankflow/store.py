"""Append-only event log, the sole source of truth for replayable state.

Format: JSON Lines, UTF-8, one record per LF-terminated line, keys always in
the order ``seq``, ``recorded_at``, ``category``, ``body``. ``seq`` starts
at 1 and is dense, so corruption reports can name the exact line. Appends
are flushed and fsynced before returning.

A final line without its terminating newline is the signature of a crash
mid-append. By default that is an error; opening with
``allow_truncated=True`` drops the partial line (and truncates the file) so
the log can be resumed.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .clock import Clock, SystemClock, format_ts, parse_ts
from .errors import CorruptLog, StorageFailure

CATEGORIES = ("decision", "domain", "subscription", "delivery")


@dataclass(frozen=True, slots=True)
class StoredEvent:
    seq: int
    recorded_at: datetime
    category: str
    body: dict

    def to_line(self) -> str:
        record = {
            "seq": self.seq,
            "recorded_at": format_ts(self.recorded_at),
            "category": self.category,
            "body": self.body,
        }
        return json.dumps(record, separators=(",", ":")) + "\n"


def parse_line(line: str, line_no: int) -> StoredEvent:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLog(line_no, f"invalid JSON: {exc.msg}") from None
    if not isinstance(record, dict):
        raise CorruptLog(line_no, "record must be a JSON object")
    for key in ("seq", "recorded_at", "category", "body"):
        if key not in record:
            raise CorruptLog(line_no, f"missing key {key!r}")
    if not isinstance(record["seq"], int):
        raise CorruptLog(line_no, "seq must be an integer")
    if record["seq"] != line_no:
        raise CorruptLog(line_no, f"sequence gap: expected seq {line_no}, found {record['seq']}")
    if record["category"] not in CATEGORIES:
        raise CorruptLog(line_no, f"unknown category {record['category']!r}")
    if not isinstance(record["body"], dict):
        raise CorruptLog(line_no, "body must be a JSON object")
    try:
        recorded_at = parse_ts(record["recorded_at"])
    except (TypeError, ValueError) as exc:
        raise CorruptLog(line_no, f"bad recorded_at: {exc}") from None
    return StoredEvent(
        seq=record["seq"],
        recorded_at=recorded_at,
        category=record["category"],
        body=record["body"],
    )


def read_log(path: str | Path, allow_truncated: bool = False) -> list[StoredEvent]:
    """Parse a log file, validating density and line format."""
    raw = Path(path).read_bytes()
    events, _ = _parse_bytes(raw, allow_truncated=allow_truncated)
    return events


def _parse_bytes(raw: bytes, allow_truncated: bool) -> tuple[list[StoredEvent], int]:
    """Returns (events, byte length of the valid prefix)."""
    events: list[StoredEvent] = []
    offset = 0
    line_no = 0
    while offset < len(raw):
        line_no += 1
        newline = raw.find(b"\n", offset)
        if newline == -1:
            if allow_truncated:
                return events, offset
            raise CorruptLog(line_no, "truncated final line (no trailing newline)")
        try:
            text = raw[offset:newline].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptLog(line_no, f"invalid UTF-8: {exc.reason}") from None
        events.append(parse_line(text, line_no))
        offset = newline + 1
    return events, offset


class EventLog:
    """Single-writer append log. Use ``EventLog.open`` for a file-backed log
    or ``EventLog.memory`` for tests and throwaway runs."""

    def __init__(self, events: list[StoredEvent], handle: io.BufferedWriter | None,
                 clock: Clock):
        self._events = events
        self._handle = handle
        self._clock = clock

    @classmethod
    def open(cls, path: str | Path, clock: Clock | None = None,
             allow_truncated: bool = False) -> "EventLog":
        clock = clock or SystemClock()
        path = Path(path)
        events: list[StoredEvent] = []
        if path.exists():
            raw = path.read_bytes()
            events, good_length = _parse_bytes(raw, allow_truncated=allow_truncated)
            if good_length < len(raw):
                with open(path, "r+b") as fixup:
                    fixup.truncate(good_length)
        try:
            handle = open(path, "ab")
        except OSError as exc:
            raise StorageFailure(f"cannot open log {path}: {exc}") from exc
        return cls(events, handle, clock)

    @classmethod
    def memory(cls, clock: Clock | None = None,
               events: Iterable[StoredEvent] = ()) -> "EventLog":
        return cls(list(events), None, clock or SystemClock())

    @property
    def last_seq(self) -> int:
        return self._events[-1].seq if self._events else 0

    def events(self, up_to_seq: int | None = None) -> list[StoredEvent]:
        if up_to_seq is None:
            return list(self._events)
        return [e for e in self._events if e.seq <= up_to_seq]

    def append(self, category: str, body: dict) -> StoredEvent:
        """Assign the next seq, persist durably, and return the record."""
        if category not in CATEGORIES:
            raise ValueError(f"unknown category {category!r}")
        event = StoredEvent(
            seq=self.last_seq + 1,
            recorded_at=self._clock.now(),
            category=category,
            body=body,
        )
        if self._handle is not None:
            try:
                self._handle.write(event.to_line().encode("utf-8"))
                self._handle.flush()
                os.fsync(self._handle.fileno())
            except OSError as exc:
                raise StorageFailure(f"append failed: {exc}") from exc
        self._events.append(event)
        return event

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
