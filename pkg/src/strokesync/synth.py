"""Seeded synthetic demonstrations: scenes + transcripts with a known
ground-truth element-to-word mapping, so the whole pipeline can be tested
without any private corpus."""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .errors import StrokeSyncError
from .scene import Element, ElementType, Scene, nominal_text_box
from .transcript import Transcript, Word

TOPICS = (
    "algebra",
    "geometry",
    "calculus",
    "physics",
    "chemistry",
    "biology",
    "statistics",
    "logic",
)

_SYLLABLES = ("ka", "lo", "mi", "ra", "su", "te", "vo", "ne", "pa", "di")

CANVAS_W = 1280.0
CANVAS_H = 720.0


class InvalidSpecError(StrokeSyncError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    """Corpus generation targets. Defaults mirror the reference dataset's
    shape: mostly freehand strokes, ~19 points each, ~50 words per demo."""

    seed: int = 42
    n_demos: int = 24
    elements_per_demo: tuple[int, int] = (16, 79)
    freedraw_fraction: float = 0.949
    text_fraction: float = 0.026
    points_per_stroke_mean: float = 19.0
    points_per_stroke_max: int = 129
    words_per_demo_mean: float = 50.0
    lesson_span_s_mean: float = 34.0
    clean: bool = False
    timing_jitter_s: float = 0.0

    def __post_init__(self) -> None:
        lo, hi = self.elements_per_demo
        if self.n_demos < 1:
            raise InvalidSpecError("n_demos must be >= 1")
        if not (1 <= lo <= hi):
            raise InvalidSpecError("elements_per_demo must be a positive (lo, hi) range")
        for name in ("freedraw_fraction", "text_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidSpecError(f"{name} must be in [0, 1]")
        if self.freedraw_fraction + self.text_fraction > 1.0:
            raise InvalidSpecError("type fractions must not exceed 1")
        if self.points_per_stroke_mean < 1 or self.points_per_stroke_max < 1:
            raise InvalidSpecError("points-per-stroke targets must be >= 1")
        if self.words_per_demo_mean < 2:
            raise InvalidSpecError("words_per_demo_mean must be >= 2")
        if self.lesson_span_s_mean <= 0:
            raise InvalidSpecError("lesson_span_s_mean must be positive")
        if self.timing_jitter_s < 0:
            raise InvalidSpecError("timing_jitter_s must be >= 0")


@dataclass(frozen=True)
class SynthDemo:
    demo_id: str
    topic: str
    scene: Scene
    transcript: Transcript
    intended_word_index: tuple[int, ...]
    intended_onset_s: tuple[float, ...]


@dataclass(frozen=True)
class SynthCorpus:
    spec: SynthSpec
    demos: tuple[SynthDemo, ...]
    recorded_stats: dict


def _q(v: float) -> float:
    # Quarter-unit grid: dyadic, so coordinate sums stay exact in binary and
    # the token grammar's two-decimal round-trip is lossless.
    return round(v * 4) / 4


def _ensure_non_uniform(times: list[int]) -> list[int]:
    # A perfectly uniform onset grid would make the uniform-timing baseline
    # exact; nudge one timestamp so the separation always exists.
    if len(times) < 3:
        return times
    gaps = {b - a for a, b in zip(times, times[1:])}
    if len(gaps) > 1:
        return times
    gap = next(iter(gaps))
    if gap >= 3:
        times = list(times)
        times[1] += gap // 3
    return times


def _word_text(rng: np.random.Generator) -> str:
    n = int(rng.integers(2, 4))
    return "".join(_SYLLABLES[int(i)] for i in rng.integers(0, len(_SYLLABLES), n))


def _make_freedraw(rng: np.random.Generator, n_points: int) -> tuple[float, float, tuple]:
    x = _q(rng.uniform(0, CANVAS_W - 200))
    y = _q(rng.uniform(0, CANVAS_H - 200))
    pts = [(0.0, 0.0)]
    px = py = 0.0
    for _ in range(n_points - 1):
        px += _q(rng.normal(0, 6.0))
        py += _q(rng.normal(0, 6.0))
        pts.append((px, py))
    return x, y, tuple(pts)


def _make_element(
    rng: np.random.Generator, eid: str, etype: ElementType, t_ms: int, n_points: int
) -> Element:
    if etype is ElementType.FREEDRAW:
        x, y, pts = _make_freedraw(rng, n_points)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return Element(eid, etype, t_ms, x, y, max(xs) - min(xs), max(ys) - min(ys), pts)
    x = _q(rng.uniform(0, CANVAS_W - 250))
    y = _q(rng.uniform(0, CANVAS_H - 250))
    if etype in (ElementType.RECTANGLE, ElementType.ELLIPSE):
        w = _q(rng.uniform(20, 220))
        h = _q(rng.uniform(20, 160))
        return Element(eid, etype, t_ms, x, y, max(w, 0.25), max(h, 0.25))
    if etype in (ElementType.LINE, ElementType.ARROW):
        k = int(rng.integers(2, 5))
        pts = [(0.0, 0.0)]
        px = py = 0.0
        for _ in range(k - 1):
            px += _q(rng.uniform(-120, 120))
            py += _q(rng.uniform(-120, 120))
            pts.append((px, py))
        if pts[1] == pts[0]:
            pts[1] = (pts[1][0] + 4.0, pts[1][1])
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return Element(
            eid, etype, t_ms, x, y, max(xs) - min(xs), max(ys) - min(ys), tuple(pts)
        )
    text = _word_text(rng)
    w, h = nominal_text_box(text)
    return Element(eid, etype, t_ms, x, y, w, h, text=text)


_OTHER_TYPES = (
    ElementType.LINE,
    ElementType.ARROW,
    ElementType.RECTANGLE,
    ElementType.ELLIPSE,
)


def _type_quota(spec: SynthSpec, total: int, rng: np.random.Generator) -> list[ElementType]:
    """Global multiset of element types hitting the target fractions exactly
    (up to rounding), then shuffled."""
    n_free = round(spec.freedraw_fraction * total)
    n_text = min(round(spec.text_fraction * total), total - n_free)
    n_other = total - n_free - n_text
    types = [ElementType.FREEDRAW] * n_free + [ElementType.TEXT] * n_text
    types += [_OTHER_TYPES[i % len(_OTHER_TYPES)] for i in range(n_other)]
    order = rng.permutation(total)
    return [types[i] for i in order]


def _intended_mapping(n_elements: int, n_words: int) -> list[int]:
    if n_elements == 1:
        return [0]
    return [
        int(np.floor(i * (n_words - 1) / (n_elements - 1) + 0.5))
        for i in range(n_elements)
    ]


def _word_starts(
    elem_ms: list[int], intended: list[int], n_words: int
) -> list[float]:
    """Place word starts so the intended mapping is the natural proportional
    alignment: matched words sit at their elements' times, the rest are
    interpolated."""
    anchors: dict[int, list[int]] = {}
    for i, j in enumerate(intended):
        anchors.setdefault(j, []).append(elem_ms[i])
    anchor_s = {j: sum(ts) / len(ts) / 1000.0 for j, ts in anchors.items()}
    known = sorted(anchor_s)
    starts = [0.0] * n_words
    for idx, j in enumerate(known):
        starts[j] = anchor_s[j]
        if idx + 1 < len(known):
            nxt = known[idx + 1]
            for step, k in enumerate(range(j + 1, nxt), start=1):
                frac = step / (nxt - j)
                starts[k] = anchor_s[j] + frac * (anchor_s[nxt] - anchor_s[j])
    return starts


def _generate_demo(
    spec: SynthSpec,
    demo_index: int,
    n_elements: int,
    types: list[ElementType],
    rng: np.random.Generator,
    record: dict,
) -> SynthDemo:
    demo_id = f"demo_{demo_index + 1:02d}"
    topic = TOPICS[demo_index % len(TOPICS)]

    span_ms = max(5000, int(rng.normal(spec.lesson_span_s_mean, spec.lesson_span_s_mean * 0.3) * 1000))
    t0 = int(rng.integers(0, 3000))
    offsets = np.sort(rng.choice(span_ms, size=n_elements, replace=False))
    times = _ensure_non_uniform([t0 + int(v) for v in offsets])
    record["spans_s"].append((times[-1] - times[0]) / 1000.0)

    elements = []
    for i in range(n_elements):
        n_points = 1
        if types[i] is ElementType.FREEDRAW:
            n_points = min(
                spec.points_per_stroke_max,
                max(1, int(rng.geometric(1.0 / spec.points_per_stroke_mean))),
            )
            record["freedraw_points"].append(n_points)
        record["type_counts"][types[i].value] += 1
        elements.append(
            _make_element(rng, f"{demo_id}_e{i + 1:03d}", types[i], times[i], n_points)
        )
    scene = Scene.ordered(elements)

    if spec.clean:
        n_words = n_elements
        starts = [t / 1000.0 for t in times]
        intended = list(range(n_elements))
    else:
        n_words = max(2, int(rng.normal(spec.words_per_demo_mean, spec.words_per_demo_mean * 0.2)))
        intended = _intended_mapping(n_elements, n_words)
        starts = _word_starts(times, intended, n_words)
        if spec.timing_jitter_s > 0:
            noisy = np.asarray(starts) + rng.normal(0, spec.timing_jitter_s, n_words)
            starts = [float(s) for s in np.maximum.accumulate(np.maximum(noisy, 0.0))]
    record["word_counts"].append(n_words)

    words = [
        Word(_word_text(rng), s, s + float(rng.uniform(0.08, 0.4))) for s in starts
    ]
    transcript = Transcript(tuple(words), demo_id=demo_id)
    return SynthDemo(
        demo_id=demo_id,
        topic=topic,
        scene=scene,
        transcript=transcript,
        intended_word_index=tuple(intended),
        intended_onset_s=tuple(starts[j] for j in intended),
    )


def generate_corpus(spec: SynthSpec) -> SynthCorpus:
    """Deterministic corpus for a spec: same seed, same corpus, always."""
    root = np.random.SeedSequence(spec.seed)
    corpus_rng = np.random.default_rng(root.spawn(1)[0])
    demo_seeds = root.spawn(spec.n_demos + 1)[1:]

    lo, hi = spec.elements_per_demo
    counts = [int(corpus_rng.integers(lo, hi + 1)) for _ in range(spec.n_demos)]
    total = sum(counts)
    types = _type_quota(spec, total, corpus_rng)

    record: dict = {
        "type_counts": {t.value: 0 for t in ElementType},
        "freedraw_points": [],
        "spans_s": [],
        "word_counts": [],
    }
    demos = []
    start = 0
    for i, n_elements in enumerate(counts):
        demo_types = types[start : start + n_elements]
        start += n_elements
        demos.append(
            _generate_demo(
                spec, i, n_elements, demo_types, np.random.default_rng(demo_seeds[i]), record
            )
        )

    fp = record["freedraw_points"]
    recorded_stats = {
        "demonstrations": spec.n_demos,
        "domains": len({d.topic for d in demos}),
        "total_elements": total,
        "elements_per_demo": {
            "mean": total / spec.n_demos,
            "min": min(counts),
            "max": max(counts),
        },
        "total_drawing_span_s": sum(record["spans_s"]),
        "per_demo_span_mean_s": sum(record["spans_s"]) / spec.n_demos,
        "element_types": {
            "freedraw_pct": 100.0 * record["type_counts"]["freedraw"] / total,
            "text_pct": 100.0 * record["type_counts"]["text"] / total,
            "other_pct": 100.0
            * (total - record["type_counts"]["freedraw"] - record["type_counts"]["text"])
            / total,
        },
        "freedraw_points": {
            "mean": sum(fp) / len(fp) if fp else None,
            "median": statistics.median(fp) if fp else None,
            "max": max(fp) if fp else None,
        },
        "transcript_words": {
            "total": sum(record["word_counts"]),
            "mean_per_demo": sum(record["word_counts"]) / spec.n_demos,
        },
    }
    return SynthCorpus(spec=spec, demos=tuple(demos), recorded_stats=recorded_stats)
