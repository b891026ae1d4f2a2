"""Lesson evaluation: temporal alignment error, symmetric 2D Chamfer
distance, type accuracy, topic-stratified folds, and corpus statistics."""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StrokeSyncError
from .scene import Element, ElementType, Scene
from .transcript import Transcript

# A lesson, for metric purposes, is an ordered list of (element, onset_ms).
LessonSeq = Sequence[tuple[Element, int]]


class EvalError(StrokeSyncError):
    pass


class NoPairsError(EvalError):
    pass


class EmptyPointSetError(EvalError):
    pass


class EmptyGroundTruthError(EvalError):
    pass


class TopicCountMismatchError(EvalError):
    pass


class EmptyCorpusError(EvalError):
    pass


@dataclass(frozen=True)
class MatchedPair:
    gt: tuple[Element, int]
    pred: tuple[Element, int]

    def __post_init__(self) -> None:
        if self.gt[0].type is not self.pred[0].type:
            raise EvalError("matched pairs must share an element type")


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[MatchedPair, ...]
    unmatched_gt: int
    unmatched_pred: int


def match_elements(gt: LessonSeq, pred: LessonSeq) -> MatchResult:
    """Pair the k-th ground-truth element of each type with the k-th
    predicted element of that type; surplus on either side is unmatched."""
    by_type: dict[ElementType, list[tuple[Element, int]]] = {}
    for item in pred:
        by_type.setdefault(item[0].type, []).append(item)
    cursors = {t: 0 for t in by_type}
    pairs: list[MatchedPair] = []
    unmatched_gt = 0
    for item in gt:
        queue = by_type.get(item[0].type)
        if queue is None or cursors[item[0].type] >= len(queue):
            unmatched_gt += 1
            continue
        pairs.append(MatchedPair(item, queue[cursors[item[0].type]]))
        cursors[item[0].type] += 1
    unmatched_pred = len(pred) - len(pairs)
    return MatchResult(tuple(pairs), unmatched_gt, unmatched_pred)


def tae(pairs: Sequence[MatchedPair]) -> float:
    """Mean absolute onset error in milliseconds over matched pairs."""
    if not pairs:
        raise NoPairsError("TAE is undefined without matched pairs")
    return sum(abs(p.gt[1] - p.pred[1]) for p in pairs) / len(pairs)


def element_points(e: Element) -> list[tuple[float, float]]:
    """Absolute point set an element contributes to Chamfer distance."""
    if e.type in (ElementType.FREEDRAW, ElementType.LINE, ElementType.ARROW):
        return list(e.absolute_points())
    return [
        (e.x, e.y),
        (e.x + e.width, e.y),
        (e.x, e.y + e.height),
        (e.x + e.width, e.y + e.height),
    ]


def chamfer(a: Sequence[tuple[float, float]], b: Sequence[tuple[float, float]]) -> float:
    """Symmetric 2D Chamfer: the average of the two directed mean
    nearest-neighbor distances."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyPointSetError("chamfer needs two non-empty point sets")
    pa = np.asarray(a, dtype=np.float64)
    pb = np.asarray(b, dtype=np.float64)
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    return 0.5 * (float(d.min(axis=1).mean()) + float(d.min(axis=0).mean()))


def type_accuracy(gt: LessonSeq, pred: LessonSeq) -> float:
    """Percentage of positions whose predicted type matches the ground
    truth; predictions beyond |gt| are ignored, missing positions count
    wrong."""
    if not gt:
        raise EmptyGroundTruthError("type accuracy needs a non-empty ground truth")
    correct = sum(
        1
        for i, (e, _) in enumerate(gt)
        if i < len(pred) and pred[i][0].type is e.type
    )
    return 100.0 * correct / len(gt)


@dataclass(frozen=True)
class DemoEval:
    demo_id: str
    tae_ms: float | None
    chamfer: float | None
    type_accuracy_pct: float
    match_rate: float
    n_gt: int
    n_pred: int


@dataclass(frozen=True)
class EvalReport:
    tae_ms: float | None
    chamfer: float | None
    type_accuracy_pct: float
    match_rate: float
    per_demo: tuple[DemoEval, ...]


def evaluate_lesson(gt: LessonSeq, pred: LessonSeq, demo_id: str = "") -> DemoEval:
    matched = match_elements(gt, pred)
    if matched.pairs:
        tae_ms = tae(matched.pairs)
        chamfer_mean = sum(
            chamfer(element_points(p.gt[0]), element_points(p.pred[0]))
            for p in matched.pairs
        ) / len(matched.pairs)
    else:
        tae_ms = None
        chamfer_mean = None
    denom = max(len(gt), len(pred))
    return DemoEval(
        demo_id=demo_id,
        tae_ms=tae_ms,
        chamfer=chamfer_mean,
        type_accuracy_pct=type_accuracy(gt, pred),
        match_rate=len(matched.pairs) / denom if denom else 1.0,
        n_gt=len(gt),
        n_pred=len(pred),
    )


def aggregate(per_demo: Sequence[DemoEval]) -> EvalReport:
    """Demo-weighted aggregation: the mean of per-demo means, skipping
    demos where a metric is absent."""
    if not per_demo:
        raise EmptyCorpusError("nothing to aggregate")

    def mean_of(values: list[float]) -> float | None:
        return sum(values) / len(values) if values else None

    return EvalReport(
        tae_ms=mean_of([d.tae_ms for d in per_demo if d.tae_ms is not None]),
        chamfer=mean_of([d.chamfer for d in per_demo if d.chamfer is not None]),
        type_accuracy_pct=sum(d.type_accuracy_pct for d in per_demo) / len(per_demo),
        match_rate=sum(d.match_rate for d in per_demo) / len(per_demo),
        per_demo=tuple(per_demo),
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "tae_ms": report.tae_ms,
        "chamfer": report.chamfer,
        "type_accuracy_pct": report.type_accuracy_pct,
        "match_rate": report.match_rate,
        "per_demo": [
            {
                "demo_id": d.demo_id,
                "tae_ms": d.tae_ms,
                "chamfer": d.chamfer,
                "type_accuracy_pct": d.type_accuracy_pct,
                "match_rate": d.match_rate,
                "n_gt": d.n_gt,
                "n_pred": d.n_pred,
            }
            for d in report.per_demo
        ],
    }


N_TOPICS = 8
N_FOLDS = 5
_TEST_GROUP_SIZES = (2, 2, 2, 1, 1)


@dataclass(frozen=True)
class FoldSplit:
    fold_id: int
    train_topics: tuple[str, ...]
    val_topics: tuple[str, ...]
    test_topics: tuple[str, ...]
    test_demo_ids: tuple[str, ...]


def make_folds(demos: Sequence[tuple[str, str]], seed: int) -> list[FoldSplit]:
    """Deterministic topic-stratified 5-fold split over 8 topics.

    Each topic is a test topic exactly once (test groups of 2,2,2,1,1
    topics); one further topic per fold is reserved for validation, so
    train/val/test stay topic-disjoint within every fold.
    """
    topics = sorted({topic for _, topic in demos})
    if len(topics) != N_TOPICS:
        raise TopicCountMismatchError(
            f"expected exactly {N_TOPICS} distinct topics, got {len(topics)}"
        )
    order = list(topics)
    random.Random(seed).shuffle(order)

    folds: list[FoldSplit] = []
    start = 0
    for fold_id, size in enumerate(_TEST_GROUP_SIZES):
        test = tuple(order[start : start + size])
        # validation: next topic in the shuffled cycle that is not tested here
        cursor = (start + size) % len(order)
        while order[cursor] in test:
            cursor = (cursor + 1) % len(order)
        val = (order[cursor],)
        train = tuple(t for t in topics if t not in test and t not in val)
        test_ids = tuple(
            sorted(demo_id for demo_id, topic in demos if topic in test)
        )
        folds.append(FoldSplit(fold_id, train, val, test, test_ids))
        start += size
    return folds


def folds_to_dicts(folds: Sequence[FoldSplit]) -> list[dict]:
    return [
        {
            "fold_id": f.fold_id,
            "train_topics": list(f.train_topics),
            "val_topics": list(f.val_topics),
            "test_topics": list(f.test_topics),
            "test_demo_ids": list(f.test_demo_ids),
        }
        for f in folds
    ]


def corpus_stats(
    scenes: Sequence[Scene],
    transcripts: Sequence[Transcript],
    topics: Sequence[str] | None = None,
) -> dict:
    """Dataset statistics in the dataset_stats.json shape."""
    if not scenes:
        raise EmptyCorpusError("corpus_stats needs at least one scene")
    counts = [len(s.elements) for s in scenes]
    total = sum(counts)
    if total == 0:
        raise EmptyCorpusError("corpus contains no elements")
    type_counts: dict[str, int] = {t.value: 0 for t in ElementType}
    freedraw_points: list[int] = []
    spans_s: list[float] = []
    for s in scenes:
        for e in s.elements:
            type_counts[e.type.value] += 1
            if e.type is ElementType.FREEDRAW:
                freedraw_points.append(len(e.points))
        times = [e.updated_ms for e in s.elements]
        spans_s.append((max(times) - min(times)) / 1000.0)
    other = total - type_counts["freedraw"] - type_counts["text"]
    word_total = sum(len(t.words) for t in transcripts)
    stats = {
        "demonstrations": len(scenes),
        "domains": len(set(topics)) if topics is not None else None,
        "total_elements": total,
        "elements_per_demo": {
            "mean": total / len(scenes),
            "min": min(counts),
            "max": max(counts),
        },
        "total_drawing_span_s": sum(spans_s),
        "per_demo_span_mean_s": sum(spans_s) / len(scenes),
        "element_types": {
            "freedraw_pct": 100.0 * type_counts["freedraw"] / total,
            "text_pct": 100.0 * type_counts["text"] / total,
            "other_pct": 100.0 * other / total,
        },
        "freedraw_points": {
            "mean": sum(freedraw_points) / len(freedraw_points) if freedraw_points else None,
            "median": statistics.median(freedraw_points) if freedraw_points else None,
            "max": max(freedraw_points) if freedraw_points else None,
        },
        "transcript_words": {
            "total": word_total,
            "mean_per_demo": word_total / len(scenes),
        },
    }
    return stats
