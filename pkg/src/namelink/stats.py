"""Corpus-level and block-level descriptive statistics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from .records import BibRecord, atomic_name_variate


@dataclass(frozen=True)
class BlockStats:
    """Summary of the records sharing one atomic name variate.

    uta: distinct target author keys (authors whose variate matches)
    rcd: records in the block
    uca: distinct display names over all authors of those records,
         targets included
    uan: distinct display names among the target authors only
    r2a / r3a: records carrying at least two / three authors with the same
         display name or the same variate
    """

    anv: str
    uta: int
    rcd: int
    uca: int
    uan: int
    r2a: int
    r3a: int


def compute_block_stats(records: Iterable[BibRecord], anv: str) -> BlockStats:
    """Compute :class:`BlockStats` over the records of one block.

    Every record must contain at least one author whose variate equals
    ``anv``; an empty record set is an error.
    """
    target_keys: set[str] = set()
    target_names: set[str] = set()
    all_names: set[str] = set()
    rcd = r2a = r3a = 0
    for record in records:
        rcd += 1
        names = Counter()
        variates = Counter()
        matched = False
        for author in record.authors:
            variate = atomic_name_variate(author)
            names[author.display_name] += 1
            variates[variate] += 1
            all_names.add(author.display_name)
            if variate == anv:
                matched = True
                target_keys.add(author.author_key)
                target_names.add(author.display_name)
        if not matched:
            raise ValueError(
                f"record {record.record_id!r} has no author with variate {anv!r}"
            )
        most = max(max(names.values()), max(variates.values()))
        if most >= 2:
            r2a += 1
        if most >= 3:
            r3a += 1
    if rcd == 0:
        raise ValueError(f"no records supplied for variate {anv!r}")
    return BlockStats(
        anv=anv,
        uta=len(target_keys),
        rcd=rcd,
        uca=len(all_names),
        uan=len(target_names),
        r2a=r2a,
        r3a=r3a,
    )


@dataclass(frozen=True)
class CorpusCounts:
    """Whole-corpus totals."""

    records: int
    authors: int
    names: int
    variates: int


def corpus_counts(records: Iterable[BibRecord]) -> CorpusCounts:
    """Count records, distinct author keys, display names, and variates."""
    n_records = 0
    keys: set[str] = set()
    names: set[str] = set()
    variates: set[str] = set()
    for record in records:
        n_records += 1
        for author in record.authors:
            keys.add(author.author_key)
            names.add(author.display_name)
            variates.add(atomic_name_variate(author))
    return CorpusCounts(
        records=n_records, authors=len(keys), names=len(names), variates=len(variates)
    )


@dataclass(frozen=True)
class NameFrequencyTables:
    """Histograms of how ambiguous names are across the corpus.

    Each table maps a count k to how many names (or variates) have exactly
    k of the counted thing: authors sharing a display name, authors sharing
    a variate, and records per display name.
    """

    authors_per_name: Mapping[int, int]
    authors_per_variate: Mapping[int, int]
    records_per_name: Mapping[int, int]


def name_frequency_histogram(records: Iterable[BibRecord]) -> NameFrequencyTables:
    name_authors: dict[str, set[str]] = {}
    variate_authors: dict[str, set[str]] = {}
    name_records: Counter = Counter()
    for record in records:
        seen_names: set[str] = set()
        for author in record.authors:
            name_authors.setdefault(author.display_name, set()).add(author.author_key)
            variate_authors.setdefault(atomic_name_variate(author), set()).add(
                author.author_key
            )
            seen_names.add(author.display_name)
        for name in seen_names:
            name_records[name] += 1
    return NameFrequencyTables(
        authors_per_name=dict(Counter(len(v) for v in name_authors.values())),
        authors_per_variate=dict(Counter(len(v) for v in variate_authors.values())),
        records_per_name=dict(Counter(name_records.values())),
    )


def histogram_as_text(table: Mapping[int, int], header: str) -> str:
    """Render one histogram as a two-column tab-separated table."""
    lines = [f"{header}\tcount"]
    for k in sorted(table):
        lines.append(f"{k}\t{table[k]}")
    return "\n".join(lines)
