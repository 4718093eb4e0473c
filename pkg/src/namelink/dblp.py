"""Streaming parser for DBLP-style bibliographic XML exports.

The full export is multiple gigabytes, so the parser is event-driven on raw
expat and keeps at most one publication element in memory.  DBLP encodes
accented characters as ISO/HTML entity references defined in its external
DTD; we do not fetch the DTD, instead resolving references against the
standard HTML 4 entity table, which covers the set DBLP uses.
"""

from __future__ import annotations

import html.entities
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterator
from xml.parsers import expat

from .records import BibRecord, parse_author_name

#: Element names treated as publication records.
DEFAULT_KINDS = frozenset({"article", "inproceedings"})

_FIELDS = frozenset({"author", "title", "journal", "booktitle", "year"})

_ENTITIES = {name: chr(cp) for name, cp in html.entities.name2codepoint.items()}

_CHUNK_SIZE = 1 << 16


class DblpParseError(Exception):
    """Malformed XML input; carries the byte offset of the failure."""

    def __init__(self, message: str, byte_offset: int = -1):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


@dataclass
class ParseStats:
    """Counters for one parsing run."""

    records: int = 0
    skipped_no_title: int = 0
    skipped_no_authors: int = 0
    skipped_kinds: dict[str, int] = field(default_factory=dict)

    @property
    def skipped(self) -> int:
        return self.skipped_no_title + self.skipped_no_authors


class _RecordBuilder:
    """Expat handler state machine collecting one record at a time."""

    def __init__(self, kinds: frozenset[str], stats: ParseStats):
        self.kinds = kinds
        self.stats = stats
        self.ready: list[BibRecord] = []
        self.depth = 0
        self.kind: str | None = None
        self.key = ""
        self.fields: dict[str, list[str]] | None = None
        self.open_field: str | None = None
        self.open_depth = 0
        self.buffer: list[str] = []

    # expat handlers ------------------------------------------------------

    def start(self, tag: str, attrs: dict[str, str]) -> None:
        self.depth += 1
        if self.depth == 2 and tag in self.kinds:
            self.kind = tag
            self.key = attrs.get("key", "")
            self.fields = {name: [] for name in _FIELDS}
        elif self.depth == 3 and self.fields is not None and tag in _FIELDS:
            self.open_field = tag
            self.open_depth = self.depth
            self.buffer = []
        # Deeper tags (markup inside titles, e.g. <i> or <sub>) are ignored
        # structurally; their character data still lands in the buffer.

    def end(self, tag: str) -> None:
        if self.open_field is not None and self.depth == self.open_depth:
            assert self.fields is not None
            self.fields[self.open_field].append("".join(self.buffer))
            self.open_field = None
            self.buffer = []
        elif self.depth == 2 and self.fields is not None:
            self._finish()
        self.depth -= 1

    def data(self, text: str) -> None:
        if self.open_field is not None:
            self.buffer.append(text)

    def entity(self, ref: str) -> None:
        if self.open_field is not None:
            self.buffer.append(_ENTITIES.get(ref, ""))

    # record assembly -----------------------------------------------------

    def _finish(self) -> None:
        assert self.fields is not None and self.kind is not None
        fields, kind = self.fields, self.kind
        self.fields, self.kind = None, None

        title = " ".join(" ".join(fields["title"]).split())
        if not title:
            self.stats.skipped_no_title += 1
            return
        authors = []
        for raw in fields["author"]:
            normalized = " ".join(raw.split())
            if normalized:
                authors.append(parse_author_name(normalized))
        if not authors:
            self.stats.skipped_no_authors += 1
            return

        # Venue string: journal for articles, booktitle for proceedings;
        # fall back to whichever is present.
        journal = " ".join(" ".join(fields["journal"]).split())
        booktitle = " ".join(" ".join(fields["booktitle"]).split())
        if kind == "article":
            source = journal or booktitle
        else:
            source = booktitle or journal
        year: int | None = None
        for text in fields["year"]:
            text = text.strip()
            if text.isdigit():
                year = int(text)
                break
        self.stats.records += 1
        self.ready.append(
            BibRecord(
                record_id=self.key,
                title=title,
                source=source,
                year=year,
                authors=tuple(authors),
            )
        )


def parse_dblp_stream(
    source: str | Path | BinaryIO,
    kinds: frozenset[str] = DEFAULT_KINDS,
    stats: ParseStats | None = None,
) -> Iterator[BibRecord]:
    """Yield :class:`BibRecord` objects from a DBLP XML stream.

    ``source`` is a path or a binary file object.  Elements outside
    ``kinds`` are skipped, as are publications missing a title or all
    author names (counted in ``stats``).  Malformed XML raises
    :class:`DblpParseError` with the byte offset of the failure; memory use
    is bounded by the largest single publication element.
    """
    if stats is None:
        stats = ParseStats()
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            yield from parse_dblp_stream(handle, kinds=kinds, stats=stats)
        return

    builder = _RecordBuilder(kinds, stats)
    parser = expat.ParserCreate()
    parser.buffer_text = True
    parser.UseForeignDTD(True)  # undefined entity refs reach the default handler
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.data

    def handle_default(data: str) -> None:
        if data.startswith("&") and data.endswith(";"):
            builder.entity(data[1:-1])

    parser.DefaultHandlerExpand = handle_default

    consumed = 0
    while True:
        chunk = source.read(_CHUNK_SIZE)
        final = not chunk
        try:
            parser.Parse(chunk, final)
        except expat.ExpatError as exc:
            offset = parser.ErrorByteIndex
            if offset < 0:
                offset = consumed
            raise DblpParseError(
                f"XML parse error: {expat.errors.messages[exc.code]}", offset
            ) from exc
        consumed += len(chunk)
        if builder.ready:
            yield from builder.ready
            builder.ready = []
        if final:
            break
