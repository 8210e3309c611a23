"""Classification and retrieval metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

CLASS_NAMES = ("False", "True")  # class index 0, 1


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class FoldMetrics:
    per_class: tuple[ClassMetrics, ClassMetrics]  # (False, True)
    macro_f1: float

    def as_dict(self) -> dict:
        out = {}
        for name, cm in zip(CLASS_NAMES, self.per_class):
            out[name] = {"precision": cm.precision, "recall": cm.recall, "f1": cm.f1}
        out["macro_f1"] = self.macro_f1
        return out


@dataclass(frozen=True)
class MetricsReport:
    per_fold: tuple[FoldMetrics, ...]
    mean: FoldMetrics

    @classmethod
    def from_folds(cls, folds: Sequence[FoldMetrics]) -> "MetricsReport":
        if not folds:
            raise ValueError("at least one fold required")
        k = len(folds)

        def avg(getter) -> float:
            return sum(getter(f) for f in folds) / k

        per_class = tuple(
            ClassMetrics(
                precision=avg(lambda f, c=c: f.per_class[c].precision),
                recall=avg(lambda f, c=c: f.per_class[c].recall),
                f1=avg(lambda f, c=c: f.per_class[c].f1),
            )
            for c in range(2)
        )
        return cls(tuple(folds), FoldMetrics(per_class, avg(lambda f: f.macro_f1)))


def classification_metrics(gold: Sequence[int], pred: Sequence[int]) -> FoldMetrics:
    """Per-class precision/recall/F1 plus their unweighted macro mean.

    A class nobody predicted has precision 0 by convention (and F1 0 when
    recall is 0 too).
    """
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predictions")
    for y in (*gold, *pred):
        if y not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {y!r}")
    per_class = []
    for c in range(2):
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append(ClassMetrics(precision, recall, f1))
    macro = (per_class[0].f1 + per_class[1].f1) / 2.0
    return FoldMetrics(tuple(per_class), macro)


def ap_at_k(relevant_ranks: Sequence[int | None], k: int) -> float:
    """Mean over claims of the indicator that the gold document appears in
    the top k (1-based ranks; None means never retrieved)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant_ranks:
        raise ValueError("at least one claim required")
    for r in relevant_ranks:
        if r is not None and r < 1:
            raise ValueError("ranks are 1-based positive integers")
    hits = sum(1 for r in relevant_ranks if r is not None and r <= k)
    return hits / len(relevant_ranks)
