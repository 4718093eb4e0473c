"""Canonical bibliographic records and author name handling.

Author identity is carried entirely by ``author_key``: the display name plus
an optional 4-digit disambiguation suffix, as found in curated bibliographies
("Bing Li 0001").  Everything downstream (blocking, training labels,
evaluation) keys on that string; no numeric ids are introduced.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .util import atomic_write_text

_SUFFIX_RE = re.compile(r"^\d{4}$")


class RecordFormatError(ValueError):
    """A serialized record line failed validation."""


@dataclass(frozen=True)
class AuthorRef:
    """One author occurrence in a bibliographic record.

    ``raw`` is the name string as written (whitespace collapsed),
    ``display_name`` is ``raw`` with any disambiguation suffix stripped,
    and ``first``/``middle``/``last`` are token-level splits of the display
    name.  ``first`` is empty for single-token names.
    """

    raw: str
    author_key: str
    display_name: str
    first: str
    last: str
    middle: tuple[str, ...] = ()


def parse_author_name(raw: str) -> AuthorRef:
    """Parse a raw author string into an :class:`AuthorRef`.

    A trailing token of exactly four digits is treated as a disambiguation
    suffix and kept in ``author_key`` but removed from the display name.
    Raises ``ValueError`` for strings that are empty after trimming.
    """
    tokens = raw.split()
    if not tokens:
        raise ValueError("author name is empty")
    normalized = " ".join(tokens)
    if len(tokens) >= 2 and _SUFFIX_RE.match(tokens[-1]):
        name_tokens = tokens[:-1]
    else:
        name_tokens = tokens
    display = " ".join(name_tokens)
    if len(name_tokens) == 1:
        first, middle, last = "", (), name_tokens[0]
    else:
        first = name_tokens[0]
        middle = tuple(name_tokens[1:-1])
        last = name_tokens[-1]
    return AuthorRef(
        raw=normalized,
        author_key=normalized,
        display_name=display,
        first=first,
        last=last,
        middle=middle,
    )


def atomic_name_variate(author: AuthorRef) -> str:
    """Reduce an author name to its most ambiguous written form.

    The variate is the uppercased first initial followed by the last name
    ("Lei Wang" -> "L Wang").  Names without a usable first name collapse to
    the last name alone; such degenerate variates still block together.
    The mapping is idempotent: applying it to an already-abbreviated name
    returns the same string.
    """
    initial_source = author.first.replace(".", "")
    if not initial_source:
        return author.last
    # [0] after upper(): some case mappings expand (ß -> SS) and the
    # initial must stay a single character for idempotence
    return initial_source[0].upper()[0] + " " + author.last


def variate_of_name(name: str) -> str:
    """Variate of a name given as a plain string."""
    return atomic_name_variate(parse_author_name(name))


def first_name_of(name: str) -> str:
    """First-name token of a name string; empty for single-token names."""
    if not name.strip():
        return ""
    return parse_author_name(name).first


@dataclass(frozen=True)
class BibRecord:
    """A publication record: title, venue string, year, and author list."""

    record_id: str
    title: str
    source: str
    year: int | None
    authors: tuple[AuthorRef, ...]

    def __post_init__(self) -> None:
        if not self.authors:
            raise ValueError(f"record {self.record_id!r} has no authors")
        if not self.title.strip():
            raise ValueError(f"record {self.record_id!r} has an empty title")

    def author_keys(self) -> tuple[str, ...]:
        return tuple(a.author_key for a in self.authors)


def make_record(
    record_id: str,
    title: str,
    author_names: Iterable[str],
    source: str = "",
    year: int | None = None,
) -> BibRecord:
    """Convenience constructor parsing author names from strings."""
    return BibRecord(
        record_id=record_id,
        title=" ".join(title.split()),
        source=" ".join(source.split()),
        year=year,
        authors=tuple(parse_author_name(name) for name in author_names),
    )


# ---------------------------------------------------------------------------
# Canonical serialization: one JSON object per line, UTF-8.  Author entries
# are stored as their raw strings; parsing is deterministic, so a round trip
# reproduces every derived field.
# ---------------------------------------------------------------------------

def record_to_json(record: BibRecord) -> str:
    payload = {
        "id": record.record_id,
        "title": record.title,
        "source": record.source,
        "year": record.year,
        "authors": [a.raw for a in record.authors],
    }
    return json.dumps(payload, ensure_ascii=False)


def record_from_json(line: str) -> BibRecord:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordFormatError(f"invalid JSON record line: {exc}") from exc
    if not isinstance(payload, dict):
        raise RecordFormatError("record line is not a JSON object")
    try:
        record_id = payload["id"]
        title = payload["title"]
        source = payload.get("source", "")
        year = payload.get("year")
        authors = payload["authors"]
    except KeyError as exc:
        raise RecordFormatError(f"record line missing field {exc}") from exc
    if year is not None and not isinstance(year, int):
        raise RecordFormatError(f"record {record_id!r}: year must be an integer or null")
    if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
        raise RecordFormatError(f"record {record_id!r}: authors must be a list of strings")
    try:
        return make_record(record_id, title, authors, source=source, year=year)
    except ValueError as exc:
        raise RecordFormatError(str(exc)) from exc


def write_records(path: str | Path, records: Iterable[BibRecord]) -> int:
    """Write records as canonical JSON lines; returns the count written."""
    lines = []
    for record in records:
        lines.append(record_to_json(record))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
    return len(lines)


def read_records(path: str | Path) -> Iterator[BibRecord]:
    """Stream records back from a canonical JSON-lines file."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield record_from_json(line)
            except RecordFormatError as exc:
                raise RecordFormatError(f"{path}:{lineno}: {exc}") from exc
