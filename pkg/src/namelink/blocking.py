"""Name index, block assembly, and train/validation/test splitting.

A block groups everything reachable from one atomic name variate: the
candidate authors whose names reduce to it, the records those authors
appear on, and a dense class index over the candidates.  One classifier is
trained per block, so blocks are the unit of routing for both training and
prediction.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from .records import BibRecord, atomic_name_variate
from .util import atomic_write_bytes, atomic_write_text, derived_rng

_INDEX_MAGIC = b"WIDX"
_INDEX_VERSION = 1

#: Split labels, in assignment priority order.
SPLITS = ("train", "validation", "test")

DEFAULT_RATIOS = (0.70, 0.15, 0.15)


class IndexFormatError(Exception):
    """A persisted name index failed validation."""


@dataclass(frozen=True)
class NameIndex:
    """Maps every written name form to the author keys it may denote.

    ``name_to_authors`` covers both full display names and variates in one
    table (a string that is both maps to the union).  ``full_names`` and
    ``variate_names`` record which strings occurred in which role.
    """

    name_to_authors: Mapping[str, frozenset[str]]
    author_to_names: Mapping[str, frozenset[str]]
    full_names: frozenset[str]
    variate_names: frozenset[str]

    @property
    def num_names(self) -> int:
        return len(self.full_names)

    @property
    def num_variates(self) -> int:
        return len(self.variate_names)

    @property
    def num_authors(self) -> int:
        return len(self.author_to_names)

    def candidates(self, name: str) -> frozenset[str]:
        """Author keys a written name may refer to (empty if unseen)."""
        return self.name_to_authors.get(" ".join(name.split()), frozenset())


def build_name_index(records: Iterable[BibRecord]) -> NameIndex:
    name_to_authors: dict[str, set[str]] = {}
    author_to_names: dict[str, set[str]] = {}
    full_names: set[str] = set()
    variate_names: set[str] = set()
    for record in records:
        for author in record.authors:
            variate = atomic_name_variate(author)
            full_names.add(author.display_name)
            variate_names.add(variate)
            for name in (author.display_name, variate):
                name_to_authors.setdefault(name, set()).add(author.author_key)
                author_to_names.setdefault(author.author_key, set()).add(name)
    return NameIndex(
        name_to_authors=MappingProxyType(
            {k: frozenset(v) for k, v in name_to_authors.items()}
        ),
        author_to_names=MappingProxyType(
            {k: frozenset(v) for k, v in author_to_names.items()}
        ),
        full_names=frozenset(full_names),
        variate_names=frozenset(variate_names),
    )


def correspondence_frequency(name: str, index: NameIndex) -> int:
    """How many known authors a written name form may denote."""
    return len(index.candidates(name))


# ---------------------------------------------------------------------------
# Index persistence: sorted keys, binary, little-endian throughout.
# Layout: magic, version:u16, entry_count:u64, then per entry
#   key_len:u32 key:utf8 flags:u8 author_count:u32 (author_len:u32 author:utf8)*
# flags bit 0 marks a full display name, bit 1 a variate.
# ---------------------------------------------------------------------------

def save_index(path: str | Path, index: NameIndex) -> None:
    parts = [_INDEX_MAGIC, struct.pack("<HQ", _INDEX_VERSION, len(index.name_to_authors))]
    for name in sorted(index.name_to_authors):
        encoded = name.encode("utf-8")
        flags = (name in index.full_names) | ((name in index.variate_names) << 1)
        authors = sorted(index.name_to_authors[name])
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<BI", flags, len(authors)))
        for author in authors:
            a = author.encode("utf-8")
            parts.append(struct.pack("<I", len(a)))
            parts.append(a)
    atomic_write_bytes(path, b"".join(parts))


class _Cursor:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise IndexFormatError(f"{self.path}: truncated index file")
        piece = self.data[self.offset : self.offset + count]
        self.offset += count
        return piece

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (length,) = self.unpack("<I")
        if length > 1 << 20:
            raise IndexFormatError(f"{self.path}: unreasonable string length {length}")
        return self.take(length).decode("utf-8")


def load_index(path: str | Path) -> NameIndex:
    data = Path(path).read_bytes()
    cursor = _Cursor(data, str(path))
    if cursor.take(4) != _INDEX_MAGIC:
        raise IndexFormatError(f"{path}: not a name index file")
    version, count = cursor.unpack("<HQ")
    if version != _INDEX_VERSION:
        raise IndexFormatError(f"{path}: unsupported index version {version}")
    name_to_authors: dict[str, frozenset[str]] = {}
    author_to_names: dict[str, set[str]] = {}
    full_names: set[str] = set()
    variate_names: set[str] = set()
    for _ in range(count):
        name = cursor.string()
        flags, n_authors = cursor.unpack("<BI")
        authors = frozenset(cursor.string() for _ in range(n_authors))
        name_to_authors[name] = authors
        if flags & 1:
            full_names.add(name)
        if flags & 2:
            variate_names.add(name)
        for author in authors:
            author_to_names.setdefault(author, set()).add(name)
    if cursor.offset != len(data):
        raise IndexFormatError(f"{path}: trailing bytes after index payload")
    return NameIndex(
        name_to_authors=MappingProxyType(name_to_authors),
        author_to_names=MappingProxyType(
            {k: frozenset(v) for k, v in author_to_names.items()}
        ),
        full_names=frozenset(full_names),
        variate_names=frozenset(variate_names),
    )


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """All material for one variate: candidate authors, their records, and
    the dense class index used as training labels."""

    anv: str
    authors: tuple[str, ...]
    records: tuple[BibRecord, ...]
    class_of: Mapping[str, int] = field(repr=False)

    def targets_of(self, record: BibRecord) -> tuple[str, ...]:
        """Author keys of this block appearing on ``record``."""
        return tuple(
            a.author_key for a in record.authors if a.author_key in self.class_of
        )

    def target_pairs(self) -> Iterator[tuple[BibRecord, str]]:
        """Every (record, target author) pair of the block."""
        for record in self.records:
            for key in self.targets_of(record):
                yield record, key


def assemble_block(anv: str, records: Iterable[BibRecord], index: NameIndex) -> Block:
    """Collect the block for ``anv`` from a record collection.

    Records are kept in input order, deduplicated by id; authors are the
    index candidates for the variate, sorted, with their positions serving
    as class labels.  Blocks with fewer than two candidates have nothing to
    disambiguate and are rejected.
    """
    candidates = index.candidates(anv)
    if len(candidates) < 2:
        raise ValueError(
            f"variate {anv!r} has {len(candidates)} candidate author(s); "
            "a block needs at least two"
        )
    authors = tuple(sorted(candidates))
    class_of = MappingProxyType({key: i for i, key in enumerate(authors)})
    kept: list[BibRecord] = []
    seen: set[str] = set()
    for record in records:
        if record.record_id in seen:
            continue
        if any(a.author_key in class_of for a in record.authors):
            kept.append(record)
            seen.add(record.record_id)
    if not kept:
        raise ValueError(f"variate {anv!r} matched no records")
    return Block(anv=anv, authors=authors, records=tuple(kept), class_of=class_of)


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitAssignment:
    """Split label for every (record id, author key) pair of a block."""

    assignment: Mapping[tuple[str, str], str]

    def pairs(self, split: str) -> list[tuple[str, str]]:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return sorted(k for k, v in self.assignment.items() if v == split)

    def counts(self) -> dict[str, int]:
        out = {name: 0 for name in SPLITS}
        for label in self.assignment.values():
            out[label] += 1
        return out


def _quota(ratio: float, n: int) -> int:
    # round before ceil so float dust (0.15*20 -> 3.0000000000000004) cannot
    # inflate the quota
    return math.ceil(round(ratio * n, 9))


def split_block(
    block: Block,
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitAssignment:
    """Assign every (record, target author) pair to train/validation/test.

    Shuffling and assignment happen per author so each candidate keeps the
    requested proportions.  Validation and test quotas are rounded up; when
    an author has too few records the training side is protected first, so
    a single-record author trains and a two-record author trains and
    validates.  A record with two target authors is assigned independently
    for each, so it may serve different splits for different authors.
    """
    if len(ratios) != 3:
        raise ValueError("ratios must have three entries")
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be non-negative and sum to 1, got {ratios!r}")

    per_author: dict[str, list[str]] = {key: [] for key in block.authors}
    for record in block.records:
        for key in set(block.targets_of(record)):
            per_author[key].append(record.record_id)

    assignment: dict[tuple[str, str], str] = {}
    for key in block.authors:
        ids = sorted(per_author[key])
        n = len(ids)
        if n == 0:
            continue
        n_val = _quota(ratios[1], n)
        n_test = _quota(ratios[2], n)
        n_train = n - n_val - n_test
        while n_train < 1 and n_test > 0:
            n_test -= 1
            n_train += 1
        while n_train < 1 and n_val > 0:
            n_val -= 1
            n_train += 1
        rng = derived_rng(seed, "split", key)
        order = [ids[i] for i in rng.permutation(n)]
        for i, record_id in enumerate(order):
            if i < n_train:
                label = "train"
            elif i < n_train + n_val:
                label = "validation"
            else:
                label = "test"
            assignment[(record_id, key)] = label
    return SplitAssignment(assignment=MappingProxyType(assignment))


def save_split(path: str | Path, split: SplitAssignment) -> None:
    lines = []
    for (record_id, key), label in sorted(split.assignment.items()):
        lines.append(f"{record_id}\t{key}\t{label}")
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def load_split(path: str | Path) -> SplitAssignment:
    assignment: dict[tuple[str, str], str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in SPLITS:
                raise ValueError(f"{path}:{lineno}: malformed split line {line!r}")
            assignment[(parts[0], parts[1])] = parts[2]
    return SplitAssignment(assignment=MappingProxyType(assignment))
