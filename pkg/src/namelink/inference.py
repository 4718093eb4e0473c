"""Resolving a name occurrence on a query record to an author identity.

Routing follows the correspondence frequency of the written name: an
unseen name is a new author, a name with exactly one known bearer links
directly, and an ambiguous name goes to the block's classifier.  The
classifier votes over every unordered co-author pair of the query record
(including a placeholder empty name, so single-author records still
produce a pair), and the per-pair probability vectors are summed.
"""

from __future__ import annotations

import itertools
import json
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .blocking import NameIndex, correspondence_frequency
from .embeddings import Providers
from .network import ModelParams, checkpoint_load, forward
from .records import BibRecord, record_from_json, variate_of_name
from .training import encode_samples


class ModelUnavailable(Exception):
    """No trained checkpoint exists for the required block."""

    def __init__(self, anv: str):
        super().__init__(f"no trained model available for variate {anv!r}")
        self.anv = anv


@dataclass(frozen=True)
class QuerySample:
    """One prediction-time input in text form."""

    target_name: str
    coauthor_p: str
    coauthor_j: str
    title: str
    source: str


def prediction_samples_from_names(
    coauthor_names: Sequence[str],
    target_name: str,
    title: str,
    source: str,
) -> list[QuerySample]:
    """Samples for one query: every unordered pair over the co-author list
    augmented with one empty placeholder name.

    With ``w`` co-author names (the target's own slot included) the result
    has exactly ``C(w + 1, 2)`` entries.
    """
    if not coauthor_names:
        raise ValueError("a query needs at least one co-author name")
    augmented = list(coauthor_names) + [""]
    return [
        QuerySample(
            target_name=target_name,
            coauthor_p=augmented[p],
            coauthor_j=augmented[j],
            title=title,
            source=source,
        )
        for p, j in itertools.combinations(range(len(augmented)), 2)
    ]


def generate_prediction_samples(
    record: BibRecord, target_name: str
) -> list[QuerySample]:
    """Prediction samples for a record, using its author names as written."""
    return prediction_samples_from_names(
        [a.display_name for a in record.authors],
        target_name,
        record.title,
        record.source,
    )


def predict_author(
    model: ModelParams,
    samples: Sequence[QuerySample],
    providers: Providers,
) -> tuple[str, np.ndarray]:
    """Aggregate per-sample class distributions and pick the winner.

    Scores are the element-wise sum of every sample's softmax vector; the
    winning class is the argmax, with ties broken toward the lowest class
    index.  Returns the winning author key and the full score vector.
    """
    if not samples:
        raise ValueError("prediction needs at least one sample")
    x1, x2 = encode_samples(samples, providers)
    probs = forward(model, x1, x2, "eval")
    scores = probs.sum(axis=0)
    winner = int(np.argmax(scores))
    return model.classes[winner], scores


# ---------------------------------------------------------------------------
# Checkpoint registry and routing
# ---------------------------------------------------------------------------

class ModelRegistry:
    """One checkpoint per variate inside a directory.

    Filenames are the percent-encoded variate plus ``.wmdl``, so arbitrary
    name strings stay filesystem-safe.
    """

    SUFFIX = ".wmdl"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._cache: dict[str, ModelParams] = {}

    def path_for(self, anv: str) -> Path:
        return self.root / (urllib.parse.quote(anv, safe="") + self.SUFFIX)

    def save(self, params: ModelParams) -> Path:
        from .network import checkpoint_save

        path = self.path_for(params.anv)
        checkpoint_save(path, params)
        self._cache[params.anv] = params
        return path

    def load(self, anv: str) -> ModelParams:
        cached = self._cache.get(anv)
        if cached is not None:
            return cached
        path = self.path_for(anv)
        if not path.is_file():
            raise ModelUnavailable(anv)
        params = checkpoint_load(path)
        self._cache[anv] = params
        return params

    def available(self) -> list[str]:
        if not self.root.is_dir():
            return []
        out = []
        for path in sorted(self.root.glob(f"*{self.SUFFIX}")):
            out.append(urllib.parse.unquote(path.name[: -len(self.SUFFIX)]))
        return out


class SingleModel:
    """Registry adapter around one already-loaded checkpoint."""

    def __init__(self, params: ModelParams):
        self.params = params

    def load(self, anv: str) -> ModelParams:
        if anv != self.params.anv:
            raise ModelUnavailable(anv)
        return self.params


@dataclass(frozen=True)
class Resolution:
    """Outcome of resolving one name occurrence.

    ``kind`` is ``new_author`` (name never seen), ``direct`` (exactly one
    known bearer), or ``predicted`` (classifier decision).  ``scores`` and
    ``sample_count`` are filled only for predictions; ``author_key`` is
    None for new authors.
    """

    kind: str
    target_name: str
    record_id: str
    author_key: str | None = None
    scores: np.ndarray | None = None
    classes: tuple[str, ...] = ()
    sample_count: int = 0


def resolve(
    record: BibRecord,
    target_name: str,
    index: NameIndex,
    registry: ModelRegistry | SingleModel | None,
    providers: Providers | None,
) -> Resolution:
    """Resolve one author name occurrence on a query record.

    ``target_name`` must be one of the record's written names.  The
    ambiguous route requires both a registry and providers; direct links
    and new-author outcomes need neither.
    """
    if not any(
        target_name in (a.display_name, a.raw) for a in record.authors
    ):
        raise ValueError(
            f"target {target_name!r} does not appear on record {record.record_id!r}"
        )
    freq = correspondence_frequency(target_name, index)
    if freq == 0:
        return Resolution(
            kind="new_author", target_name=target_name, record_id=record.record_id
        )
    if freq == 1:
        (author_key,) = index.candidates(target_name)
        return Resolution(
            kind="direct",
            target_name=target_name,
            record_id=record.record_id,
            author_key=author_key,
        )
    anv = variate_of_name(target_name)
    if registry is None or providers is None:
        raise ModelUnavailable(anv)
    model = registry.load(anv)
    samples = generate_prediction_samples(record, target_name)
    author_key, scores = predict_author(model, samples, providers)
    return Resolution(
        kind="predicted",
        target_name=target_name,
        record_id=record.record_id,
        author_key=author_key,
        scores=scores,
        classes=tuple(model.classes),
        sample_count=len(samples),
    )


def format_resolution(res: Resolution, top: int = 3) -> str:
    """One tab-separated line: record, name, outcome, key, top scores."""
    if res.scores is None:
        detail = "-"
    else:
        order = np.argsort(-res.scores)[:top]
        detail = ",".join(f"{res.classes[i]}={res.scores[i]:.4f}" for i in order)
    return "\t".join(
        [res.record_id, res.target_name, res.kind, res.author_key or "-", detail]
    )


def resolve_batch(
    lines: Iterable[str],
    index: NameIndex,
    registry: ModelRegistry | SingleModel | None,
    providers: Providers | None,
) -> Iterator[str]:
    """Resolve ``target_name<TAB>record_json`` lines into outcome lines.

    Lines whose block has no trained model yield a ``model_unavailable``
    outcome instead of aborting the batch.
    """
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        target_name, sep, payload = line.partition("\t")
        if not sep:
            raise ValueError(f"line {lineno}: expected target<TAB>record_json")
        record = record_from_json(payload)
        try:
            yield format_resolution(
                resolve(record, target_name, index, registry, providers)
            )
        except ModelUnavailable as exc:
            yield "\t".join(
                [record.record_id, target_name, "model_unavailable", "-", exc.anv]
            )
