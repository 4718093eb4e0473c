"""Evaluation: confusion-matrix metrics and block-level test protocols.

Micro metrics pool the confusion matrix globally, which for single-label
classification makes micro precision, recall, and F1 all equal to
accuracy.  Macro metrics average per-class values, counting a class with
an undefined ratio (zero denominator) as 0, and are taken only over
classes that actually appear in the test data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blocking import Block, SplitAssignment
from .embeddings import Providers
from .network import ModelParams
from .inference import predict_author, prediction_samples_from_names
from .records import atomic_name_variate, variate_of_name

MODES = ("all", "anv")


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int
    predicted: int


@dataclass(frozen=True)
class MetricSet:
    """Aggregate metrics of one confusion matrix (rows true, cols predicted)."""

    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    per_class: tuple[ClassMetrics, ...]


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def metrics_from_confusion(
    confusion: np.ndarray,
    labels: Sequence[str] | None = None,
    macro_over_support_only: bool = False,
) -> MetricSet:
    """Compute micro and macro precision/recall/F1 from a confusion matrix.

    With ``macro_over_support_only`` the macro averages skip classes that
    have no true instances (no test support); micro metrics always use the
    full matrix.
    """
    cm = np.asarray(confusion)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {cm.shape}")
    if np.any(cm < 0):
        raise ValueError("confusion matrix entries must be non-negative")
    n = cm.shape[0]
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} classes")
    if cm.sum() == 0:
        raise ValueError("confusion matrix has no trials")

    total = float(cm.sum())
    diag = cm.diagonal().astype(np.float64)
    support = cm.sum(axis=1).astype(np.float64)
    predicted = cm.sum(axis=0).astype(np.float64)

    per_class = []
    for i in range(n):
        p = _safe_div(diag[i], predicted[i])
        r = _safe_div(diag[i], support[i])
        f1 = _safe_div(2.0 * p * r, p + r)
        per_class.append(
            ClassMetrics(
                label=labels[i],
                precision=p,
                recall=r,
                f1=f1,
                support=int(support[i]),
                predicted=int(predicted[i]),
            )
        )

    if macro_over_support_only:
        included = [m for m in per_class if m.support > 0]
    else:
        included = per_class
    if included:
        macro_p = float(np.mean([m.precision for m in included]))
        macro_r = float(np.mean([m.recall for m in included]))
        macro_f1 = float(np.mean([m.f1 for m in included]))
    else:
        macro_p = macro_r = macro_f1 = 0.0

    accuracy = _safe_div(float(diag.sum()), total)
    # single-label pooling: global TP = trace, global FP = FN = off-diagonal
    micro = accuracy
    return MetricSet(
        micro_precision=micro,
        micro_recall=micro,
        micro_f1=micro,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        accuracy=accuracy,
        per_class=tuple(per_class),
    )


@dataclass(frozen=True)
class EvalReport:
    """Block evaluation result for one test mode."""

    anv: str
    mode: str
    metrics: MetricSet
    trials: int
    included_classes: int
    confusion: np.ndarray


def evaluate_block(
    model: ModelParams,
    block: Block,
    split: SplitAssignment,
    providers: Providers,
    mode: str = "all",
) -> EvalReport:
    """Run the block's test pairs through the model and score them.

    Every test pair is tried twice: once with the record's names as
    written and once with every name (the target's included) abbreviated
    to its variate.  Mode ``all`` scores both trials, mode ``anv`` only
    the abbreviated one.  Macro metrics average over classes that have at
    least one scored trial.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if list(model.classes) != list(block.authors):
        raise ValueError("model classes do not match block authors")
    n = len(block.authors)
    confusion = np.zeros((n, n), dtype=np.int64)
    records_by_id = {r.record_id: r for r in block.records}
    class_of = block.class_of
    trials = 0
    test_pairs = split.pairs("test")
    if not test_pairs:
        raise ValueError("split has no test pairs")
    for record_id, key in test_pairs:
        record = records_by_id.get(record_id)
        if record is None:
            raise ValueError(f"split references unknown record {record_id!r}")
        target = next(a for a in record.authors if a.author_key == key)
        true_class = class_of[key]
        full_names = [a.display_name for a in record.authors]
        variate_names = [atomic_name_variate(a) for a in record.authors]

        trial_name_lists = []
        if mode == "all":
            trial_name_lists.append((full_names, target.display_name))
        trial_name_lists.append((variate_names, atomic_name_variate(target)))

        for names, target_name in trial_name_lists:
            samples = prediction_samples_from_names(
                names, target_name, record.title, record.source
            )
            predicted_key, _ = predict_author(model, samples, providers)
            confusion[true_class, class_of[predicted_key]] += 1
            trials += 1

    metrics = metrics_from_confusion(
        confusion, labels=list(block.authors), macro_over_support_only=True
    )
    included = int(np.sum(confusion.sum(axis=1) > 0))
    return EvalReport(
        anv=block.anv,
        mode=mode,
        metrics=metrics,
        trials=trials,
        included_classes=included,
        confusion=confusion,
    )


def format_report(report: EvalReport) -> str:
    """Human-readable metric summary for one block and mode."""
    m = report.metrics
    lines = [
        f"block\t{report.anv}",
        f"mode\t{report.mode}",
        f"trials\t{report.trials}",
        f"classes_evaluated\t{report.included_classes}/{len(m.per_class)}",
        f"micro_precision\t{m.micro_precision:.4f}",
        f"micro_recall\t{m.micro_recall:.4f}",
        f"micro_f1\t{m.micro_f1:.4f}",
        f"macro_precision\t{m.macro_precision:.4f}",
        f"macro_recall\t{m.macro_recall:.4f}",
        f"macro_f1\t{m.macro_f1:.4f}",
    ]
    return "\n".join(lines)
