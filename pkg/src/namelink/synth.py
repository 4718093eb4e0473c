"""Synthetic corpora with a controllable degree of ambiguity.

Every generated author shares the same atomic name variate, so the whole
corpus forms one block.  Each author owns a co-author clique and a topic;
the ``overlap`` knob blends cliques and topics across authors, moving the
task from trivially separable (0.0) to indistinguishable (1.0).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingStore, normalize_key
from .records import BibRecord, make_record
from .util import atomic_write_text, derived_rng

#: Shared last name; every target is "T<i> Shared" so all variates collapse.
_LAST = "Shared"


@dataclass(frozen=True)
class SynthSpec:
    """Shape of a generated corpus."""

    authors: int = 5
    records_per_author: int = 10
    coauthors_per_record: int = 2
    clique_size: int = 3
    topics: int = 5
    words_per_topic: int = 30
    words_per_title: int = 6
    overlap: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "authors",
            "records_per_author",
            "coauthors_per_record",
            "clique_size",
            "topics",
            "words_per_topic",
            "words_per_title",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"overlap must be in [0, 1], got {self.overlap}")


def target_author_name(i: int) -> str:
    return f"T{i} {_LAST}"


def generate_corpus(spec: SynthSpec) -> tuple[list[BibRecord], list[tuple[str, str]]]:
    """Generate records plus ground truth.

    Returns the record list and (record_id, author_key) truth pairs, one
    per record (each record has exactly one target author).  Fully
    deterministic in ``spec``: the same spec yields byte-identical output
    after serialization.
    """
    rng = derived_rng(spec.seed, "synth-corpus")
    cliques = [
        [f"Coa{k} Pool{i}" for k in range(spec.clique_size)]
        for i in range(spec.authors + 1)  # index 0 is the shared blend pool
    ]
    vocab = [
        [f"topic{t}word{n}" for n in range(spec.words_per_topic)]
        for t in range(spec.topics)
    ]
    venues = [f"Journal of Topic {t}" for t in range(spec.topics)]

    records: list[BibRecord] = []
    truth: list[tuple[str, str]] = []
    for i in range(spec.authors):
        author_name = target_author_name(i)
        own_clique = cliques[i + 1]
        own_topic = i % spec.topics
        for n in range(spec.records_per_author):
            coauthors = []
            for _ in range(spec.coauthors_per_record):
                if rng.random() < spec.overlap:
                    pool = cliques[0]
                else:
                    pool = own_clique
                coauthors.append(pool[int(rng.integers(0, len(pool)))])
            words = []
            for _ in range(spec.words_per_title):
                if rng.random() < spec.overlap:
                    topic = int(rng.integers(0, spec.topics))
                else:
                    topic = own_topic
                words.append(vocab[topic][int(rng.integers(0, spec.words_per_topic))])
            if rng.random() < spec.overlap:
                venue = venues[int(rng.integers(0, spec.topics))]
            else:
                venue = venues[own_topic]
            record_id = f"synth/{i}/{n:04d}"
            records.append(
                make_record(
                    record_id,
                    " ".join(words),
                    [author_name, *coauthors],
                    source=venue,
                    year=2000 + (n % 25),
                )
            )
            truth.append((record_id, author_name))
    return records, truth


def build_text_store(
    records: Sequence[BibRecord], dim: int = 64, seed: int = 0
) -> EmbeddingStore:
    """Random-but-fixed contextual vectors for every title and venue.

    Each vocabulary word gets a unit Gaussian vector from its own keyed
    stream; a text embeds as the normalized mean of its word vectors.
    Texts sharing words (same topic) therefore land near each other, while
    the vectors themselves carry no learned structure.
    """
    word_cache: dict[str, np.ndarray] = {}

    def word_vector(word: str) -> np.ndarray:
        vec = word_cache.get(word)
        if vec is None:
            vec = derived_rng(seed, "word", word).standard_normal(dim)
            word_cache[word] = vec
        return vec

    store = EmbeddingStore(dim=dim, provenance="contextual")
    for record in records:
        for text in (record.title, record.source):
            key = normalize_key(text)
            if not key or key in store:
                continue
            mean = np.mean([word_vector(w) for w in key.split()], axis=0)
            norm = float(np.linalg.norm(mean))
            if norm > 0:
                mean = mean / norm
            store.put(key, mean.astype(np.float32))
    return store


def write_truth(path: str | Path, truth: Sequence[tuple[str, str]]) -> None:
    lines = [f"{record_id}\t{author_key}" for record_id, author_key in truth]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_truth(path: str | Path) -> list[tuple[str, str]]:
    out = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: malformed truth line {line!r}")
        out.append((parts[0], parts[1]))
    return out


def parse_synth_spec(text: str) -> SynthSpec:
    """Parse a ``key=value`` spec body; unknown keys are an error."""
    fields = {f for f in SynthSpec.__dataclass_fields__}
    kwargs: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in fields:
            raise ValueError(f"spec line {lineno}: unknown or malformed entry {line!r}")
        kwargs[key] = float(value) if key == "overlap" else int(value)
    if "seed" not in kwargs:
        raise ValueError("spec must set a seed")
    return SynthSpec(**kwargs)
