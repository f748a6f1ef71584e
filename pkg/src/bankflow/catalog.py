"""Machine-validated catalog of the design patterns this system is built on.

A catalog file is a JSON array of descriptor objects. Every descriptor must
carry all ten elements; eight are non-empty prose strings and two
(``related_patterns``, ``known_uses``) are non-empty lists of strings.
Validation reports every missing or empty field of every entry at once, so
a catalog author fixes one round of diagnostics, not ten.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, SchemaError

TEXT_ELEMENTS = (
    "name",
    "context",
    "problem",
    "solution",
    "forces",
    "resulting_context",
    "examples",
    "rationale",
)
LIST_ELEMENTS = ("related_patterns", "known_uses")

# Rendering order of the elements within one catalog section.
ELEMENT_ORDER = (
    "name",
    "context",
    "problem",
    "solution",
    "forces",
    "resulting_context",
    "examples",
    "rationale",
    "related_patterns",
    "known_uses",
)

_HEADINGS = {
    "context": "Context",
    "problem": "Problem",
    "solution": "Solution",
    "forces": "Forces",
    "resulting_context": "Resulting Context",
    "examples": "Examples",
    "rationale": "Rationale",
    "related_patterns": "Related Patterns",
    "known_uses": "Known Uses",
}


@dataclass(frozen=True, slots=True)
class PatternDescriptor:
    name: str
    context: str
    problem: str
    solution: str
    forces: str
    resulting_context: str
    examples: str
    rationale: str
    related_patterns: tuple[str, ...]
    known_uses: tuple[str, ...]


def _entry_problems(entry: dict) -> list[str]:
    problems = []
    for field in TEXT_ELEMENTS:
        value = entry.get(field)
        if not isinstance(value, str) or not value.strip():
            problems.append(field)
    for field in LIST_ELEMENTS:
        value = entry.get(field)
        if (
            not isinstance(value, list)
            or not value
            or any(not isinstance(item, str) or not item.strip() for item in value)
        ):
            problems.append(field)
    known = set(TEXT_ELEMENTS) | set(LIST_ELEMENTS)
    problems.extend(f"unknown field {key!r}" for key in entry if key not in known)
    return problems


def validate_entries(entries: object) -> list[PatternDescriptor]:
    """Validate parsed JSON; raises SchemaError naming every bad field."""
    if not isinstance(entries, list):
        raise ParseError("catalog must be a JSON array of descriptor objects")
    problems: dict[str, list[str]] = {}
    descriptors: list[PatternDescriptor] = []
    seen_names: set[str] = set()
    for index, entry in enumerate(entries):
        label = f"entry[{index}]"
        if not isinstance(entry, dict):
            problems[label] = ["not an object"]
            continue
        name = entry.get("name")
        if isinstance(name, str) and name.strip():
            label = name
            if name in seen_names:
                problems.setdefault(label, []).append("duplicate name")
            seen_names.add(name)
        entry_problems = _entry_problems(entry)
        if entry_problems:
            problems.setdefault(label, []).extend(entry_problems)
            continue
        descriptors.append(
            PatternDescriptor(
                **{f: entry[f] for f in TEXT_ELEMENTS},
                related_patterns=tuple(entry["related_patterns"]),
                known_uses=tuple(entry["known_uses"]),
            )
        )
    if problems:
        raise SchemaError(problems)
    return descriptors


def validate_catalog(path: str | Path) -> list[PatternDescriptor]:
    """Parse and validate a catalog file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return validate_entries(entries)


def render_catalog(descriptors: list[PatternDescriptor]) -> str:
    """Render descriptors to a markdown document, deterministically: the
    same input always yields byte-identical output."""
    lines = ["# Pattern Catalog", ""]
    for descriptor in descriptors:
        lines.append(f"## {descriptor.name}")
        lines.append("")
        for field in ELEMENT_ORDER[1:]:
            lines.append(f"### {_HEADINGS[field]}")
            lines.append("")
            value = getattr(descriptor, field)
            if isinstance(value, tuple):
                lines.extend(f"- {item}" for item in value)
            else:
                lines.append(value)
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


__all__ = [
    "PatternDescriptor",
    "validate_catalog",
    "validate_entries",
    "render_catalog",
    "ELEMENT_ORDER",
]
