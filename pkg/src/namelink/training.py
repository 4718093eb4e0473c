"""Training sample generation and per-block training orchestration.

Each (record, target author) pair expands into one sample per co-author
slot: the slot's name fills the first co-author position and a second
co-author is drawn at random.  The full set is then duplicated with every
name abbreviated to its variate, so the classifier sees each context once
with full names and once as it would appear in an ambiguous citation.
Names are never mixed within a sample: a sample is all-full or
all-abbreviated.
"""

from __future__ import annotations

import dataclasses
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .blocking import Block, SplitAssignment
from .embeddings import Providers, assemble_input
from .network import (
    Batch,
    EpochStats,
    FitConfig,
    HiddenSpec,
    ModelParams,
    checkpoint_save,
    fit,
    history_as_text,
    init_model,
)
from .records import BibRecord, atomic_name_variate, first_name_of
from .util import atomic_write_text, derived_rng

LOGGER = logging.getLogger(__name__)

WEIGHT_CLIP = (0.1, 10.0)


@dataclass(frozen=True)
class TrainingSample:
    """One classifier input in text form, before embedding lookup."""

    target_class: int
    target_name: str
    coauthor_p: str
    coauthor_j: str
    title: str
    source: str
    abbreviated: bool
    record_id: str


def generate_samples(
    record: BibRecord,
    target_key: str,
    rng: np.random.Generator,
    target_class: int = 0,
) -> list[TrainingSample]:
    """Expand one (record, target author) pair into its training samples.

    With ``w`` authors on the record the result has exactly ``2 * w``
    entries: one full-name sample per author slot (that slot as the first
    co-author, a uniformly drawn slot as the second) followed by the same
    samples with every name replaced by its variate.  The target's own slot
    participates like any other, and the drawn slot may coincide with the
    first or with the target; a single-author record yields the pair of
    self-referential samples.
    """
    target = next(
        (a for a in record.authors if a.author_key == target_key), None
    )
    if target is None:
        raise ValueError(
            f"author {target_key!r} does not appear on record {record.record_id!r}"
        )
    names = [a.display_name for a in record.authors]
    variates = [atomic_name_variate(a) for a in record.authors]
    target_name = target.display_name
    target_variate = atomic_name_variate(target)
    w = len(names)
    draws = [int(rng.integers(0, w)) for _ in range(w)]

    full = [
        TrainingSample(
            target_class=target_class,
            target_name=target_name,
            coauthor_p=names[p],
            coauthor_j=names[j],
            title=record.title,
            source=record.source,
            abbreviated=False,
            record_id=record.record_id,
        )
        for p, j in zip(range(w), draws)
    ]
    abbreviated = [
        TrainingSample(
            target_class=target_class,
            target_name=target_variate,
            coauthor_p=variates[p],
            coauthor_j=variates[j],
            title=record.title,
            source=record.source,
            abbreviated=True,
            record_id=record.record_id,
        )
        for p, j in zip(range(w), draws)
    ]
    return full + abbreviated


def reassign_drawn_coauthors(
    samples: Sequence[TrainingSample],
    records_by_id: Mapping[str, BibRecord],
    epoch: int,
    period: int,
    rng: np.random.Generator,
) -> list[TrainingSample]:
    """Redraw every sample's second co-author on a fixed epoch schedule.

    On epochs divisible by ``period`` each sample gets a fresh uniformly
    drawn co-author from its own record (full or abbreviated to match the
    sample); on other epochs the samples are returned unchanged.
    """
    if period < 1:
        raise ValueError(f"reassignment period must be >= 1, got {period}")
    if epoch % period != 0:
        return list(samples)
    out = []
    for sample in samples:
        record = records_by_id[sample.record_id]
        j = int(rng.integers(0, len(record.authors)))
        author = record.authors[j]
        name = atomic_name_variate(author) if sample.abbreviated else author.display_name
        out.append(dataclasses.replace(sample, coauthor_j=name))
    return out


def encode_samples(
    samples: Sequence[TrainingSample], providers: Providers
) -> tuple[np.ndarray, np.ndarray]:
    """Embed text-form samples into the two input matrices."""
    x1_rows = []
    x2_rows = []
    for sample in samples:
        pair = assemble_input(
            first_name_of(sample.target_name),
            sample.coauthor_p,
            sample.coauthor_j,
            sample.title,
            sample.source,
            providers,
        )
        x1_rows.append(pair.x1)
        x2_rows.append(pair.x2)
    return np.array(x1_rows, dtype=np.float64), np.array(x2_rows, dtype=np.float64)


def samples_to_batch(
    samples: Sequence[TrainingSample],
    providers: Providers,
    class_weight: np.ndarray | None = None,
) -> Batch:
    x1, x2 = encode_samples(samples, providers)
    y = np.array([s.target_class for s in samples], dtype=np.int64)
    return Batch(x1=x1, x2=x2, y=y, class_weight=class_weight)


def class_sample_counts(samples: Iterable[TrainingSample]) -> dict[int, int]:
    return dict(Counter(s.target_class for s in samples))


def class_weights(
    counts: Mapping[int, int],
    n_classes: int,
    clip: tuple[float, float] = WEIGHT_CLIP,
) -> np.ndarray:
    """Inverse-frequency class weights, clipped.

    ``w_c = total / (n_classes * count_c)``, so a balanced class gets 1.0.
    Classes with no samples get the upper clip (they can only appear in
    validation or test).
    """
    total = sum(counts.values())
    low, high = clip
    weights = np.full(n_classes, high, dtype=np.float64)
    missing = []
    for c in range(n_classes):
        count = counts.get(c, 0)
        if count == 0:
            missing.append(c)
            continue
        weights[c] = min(max(total / (n_classes * count), low), high)
    if missing:
        LOGGER.warning(
            "%d of %d classes have no training samples", len(missing), n_classes
        )
    return weights


# ---------------------------------------------------------------------------
# Block-level orchestration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs beyond the data itself."""

    seed: int = 0
    batch_size: int = 64
    lr: float = 1e-3
    patience: int = 50
    max_epochs: int = 1000
    reassign_period: int = 10
    hidden: HiddenSpec = field(default_factory=HiddenSpec)
    track_train_accuracy: bool = True

    def fit_config(self) -> FitConfig:
        return FitConfig(
            max_epochs=self.max_epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            patience=self.patience,
            seed=self.seed,
            track_train_accuracy=self.track_train_accuracy,
        )


_INT_KEYS = {"seed", "batch", "patience", "max_epochs", "reassign_period"}
_TUPLE_KEYS = {"branch1", "branch2", "merge"}


def parse_train_config(text: str) -> TrainConfig:
    """Parse a ``key=value`` config file body into a :class:`TrainConfig`.

    Recognized keys: seed, batch, lr, patience, max_epochs,
    reassign_period, branch1, branch2, merge (comma-separated widths),
    dropout.  Unknown keys are an error; a seed is required.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    if "seed" not in values:
        raise ValueError("config must set a seed")

    kwargs: dict = {}
    hidden_kwargs: dict = {}
    for key, value in values.items():
        try:
            if key in _INT_KEYS:
                kwargs["batch_size" if key == "batch" else key] = int(value)
            elif key == "lr":
                kwargs["lr"] = float(value)
            elif key in _TUPLE_KEYS:
                hidden_kwargs[key] = tuple(int(v) for v in value.split(",") if v)
            elif key == "dropout":
                hidden_kwargs["final_dropout"] = float(value)
            else:
                raise ValueError(f"unknown config key {key!r}")
        except ValueError as exc:
            if "unknown config key" in str(exc):
                raise
            raise ValueError(f"config key {key!r}: bad value {value!r}") from exc
    if hidden_kwargs:
        kwargs["hidden"] = HiddenSpec(**hidden_kwargs)
    return TrainConfig(**kwargs)


def load_train_config(path: str | Path) -> TrainConfig:
    return parse_train_config(Path(path).read_text(encoding="utf-8"))


def build_training_samples(
    block: Block, split: SplitAssignment, which: str, seed: int
) -> list[TrainingSample]:
    """All samples for one split of a block, deterministically.

    Draws use a stream keyed by (seed, record, author), so the result does
    not depend on iteration order or on which other blocks were processed.
    """
    wanted = set(split.pairs(which))
    samples: list[TrainingSample] = []
    for record, key in block.target_pairs():
        if (record.record_id, key) not in wanted:
            continue
        rng = derived_rng(seed, "samples", record.record_id, key)
        samples.extend(
            generate_samples(record, key, rng, target_class=block.class_of[key])
        )
    return samples


@dataclass
class TrainResult:
    params: ModelParams
    history: list[EpochStats]
    train_samples: int
    val_samples: int


def train_block(
    block: Block,
    split: SplitAssignment,
    providers: Providers,
    config: TrainConfig | None = None,
    checkpoint_path: str | Path | None = None,
    history_path: str | Path | None = None,
) -> TrainResult:
    """Train one block's classifier end to end.

    Builds train/validation samples from the split, weights classes by
    inverse training frequency, redraws sampled co-authors every
    ``reassign_period`` epochs, and persists the best checkpoint plus the
    epoch history when paths are given.
    """
    config = config or TrainConfig()
    train_samples = build_training_samples(block, split, "train", config.seed)
    val_samples = build_training_samples(block, split, "validation", config.seed)
    if not train_samples:
        raise ValueError(f"block {block.anv!r} has no training samples")

    n_classes = len(block.authors)
    weights = class_weights(class_sample_counts(train_samples), n_classes)
    train_batch = samples_to_batch(train_samples, providers, class_weight=weights)
    val_batch = samples_to_batch(val_samples, providers) if val_samples else None

    model = init_model(
        providers.texts.dim,
        n_classes,
        hidden=config.hidden,
        seed=config.seed,
        classes=block.authors,
        anv=block.anv,
    )
    records_by_id = {r.record_id: r for r in block.records}
    reassign_rng = derived_rng(config.seed, "reassign", block.anv)
    current = list(train_samples)

    def epoch_hook(epoch: int) -> Batch | None:
        nonlocal current
        if epoch % config.reassign_period != 0:
            return None
        current = reassign_drawn_coauthors(
            current, records_by_id, epoch, config.reassign_period, reassign_rng
        )
        return samples_to_batch(current, providers, class_weight=weights)

    best, history = fit(
        model, train_batch, val_batch, config.fit_config(), epoch_hook=epoch_hook
    )
    if checkpoint_path is not None:
        checkpoint_save(checkpoint_path, best)
    if history_path is not None:
        atomic_write_text(history_path, history_as_text(history))
    return TrainResult(
        params=best,
        history=history,
        train_samples=len(train_samples),
        val_samples=len(val_samples),
    )
