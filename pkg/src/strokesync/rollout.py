"""Autoregressive generate-parse-append-re-render loop against a pluggable
predictor, plus the baseline predictors shipped with the toolkit."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .align import AlignedElement, EmptyInputError
from .errors import StrokeSyncError
from .jsonio import canonical_dumps
from .raster import IDENTITY_VIEWPORT, RasterFrame, Viewport, render
from .scene import (
    Element,
    ElementType,
    InvalidElementError,
    Scene,
    append_element,
    element_to_excalidraw_dict,
    nominal_text_box,
)
from .serial import END_TOKEN, DecodeError, decode_element, encode_element, is_end_token
from .transcript import Transcript

END_BY_TOKEN = "end_token"
END_BY_MAX = "max_elements"
END_BY_FAILURES = "parse_failures"

MAX_CONSECUTIVE_FAILURES = 3


class RolloutError(StrokeSyncError):
    pass


class PredictorError(RolloutError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"predictor failed at step {step}: {cause}")
        self.step = step


class Predictor(Protocol):
    """One decoding step: returns the next serialized element or END.

    `frame` is None when canvas context is disabled; `transcript` is None
    when transcript context is disabled; `history` holds the serialized
    lines accepted so far.
    """

    def __call__(
        self,
        frame: RasterFrame | None,
        transcript: Transcript | None,
        history: list[str],
    ) -> str: ...


@dataclass(frozen=True)
class RolloutConfig:
    max_elements: int = 256
    include_canvas: bool = True
    include_transcript: bool = True
    one_shot: bool = False

    def __post_init__(self) -> None:
        if self.max_elements <= 0:
            raise ValueError("max_elements must be > 0")


@dataclass(frozen=True)
class ParseFailure:
    step: int
    line: str
    error: str


@dataclass(frozen=True)
class PredictedLesson:
    elements: tuple[tuple[Element, int], ...]
    terminated_by: str
    failures: tuple[ParseFailure, ...] = ()


def _element_id(n: int) -> str:
    return f"p{n:04d}"


def run_rollout(
    pred: Predictor,
    transcript: Transcript | None,
    cfg: RolloutConfig,
    viewport: Viewport = IDENTITY_VIEWPORT,
) -> PredictedLesson:
    """Drive the predictor until it emits END, the element cap is reached,
    or three consecutive lines fail to parse.

    In one-shot mode the predictor is called exactly once and its output is
    decoded line by line with no canvas updates in between.
    """
    scene = Scene()
    history: list[str] = []
    elements: list[tuple[Element, int]] = []
    failures: list[ParseFailure] = []
    ctx = transcript if cfg.include_transcript else None

    def accept(line: str) -> bool:
        nonlocal scene
        e, onset = decode_element(line, fresh_id=_element_id(len(elements) + 1))
        scene = append_element(scene, e)
        history.append(line)
        elements.append((e, onset))
        return len(elements) >= cfg.max_elements

    if cfg.one_shot:
        frame = render(scene, viewport) if cfg.include_canvas else None
        try:
            output = pred(frame, ctx, history)
        except Exception as exc:  # noqa: BLE001 - predictor is third-party code
            raise PredictorError(0, exc) from exc
        terminated = END_BY_TOKEN  # exhausting the output counts as ending
        consecutive = 0
        for lineno, line in enumerate(output.splitlines()):
            if not line.strip():
                continue
            if is_end_token(line):
                break
            try:
                full = accept(line)
            except (DecodeError, InvalidElementError) as exc:
                failures.append(ParseFailure(lineno, line, str(exc)))
                consecutive += 1
                if consecutive >= MAX_CONSECUTIVE_FAILURES:
                    terminated = END_BY_FAILURES
                    break
                continue
            consecutive = 0
            if full:
                terminated = END_BY_MAX
                break
        return PredictedLesson(tuple(elements), terminated, tuple(failures))

    consecutive = 0
    step = 0
    while True:
        frame = render(scene, viewport) if cfg.include_canvas else None
        try:
            line = pred(frame, ctx, list(history))
        except Exception as exc:  # noqa: BLE001
            raise PredictorError(step, exc) from exc
        if is_end_token(line):
            return PredictedLesson(tuple(elements), END_BY_TOKEN, tuple(failures))
        try:
            full = accept(line)
        except (DecodeError, InvalidElementError) as exc:
            failures.append(ParseFailure(step, line, str(exc)))
            consecutive += 1
            if consecutive >= MAX_CONSECUTIVE_FAILURES:
                return PredictedLesson(tuple(elements), END_BY_FAILURES, tuple(failures))
        else:
            consecutive = 0
            if full:
                return PredictedLesson(tuple(elements), END_BY_MAX, tuple(failures))
        step += 1


def baseline_uniform_onset(
    gt_elements: Sequence[Element], lesson_duration_ms: int
) -> list[tuple[Element, int]]:
    """Timing-only baseline: ground-truth geometry with onsets spread
    evenly over the lesson duration."""
    n = len(gt_elements)
    if n == 0:
        raise EmptyInputError("baseline needs at least one element")
    if lesson_duration_ms <= 0:
        raise ValueError("lesson duration must be positive")
    if n == 1:
        return [(gt_elements[0], 0)]
    return [
        (e, int(math.floor(i * lesson_duration_ms / (n - 1) + 0.5)))
        for i, e in enumerate(gt_elements)
    ]


def oracle_predictor(gt: Sequence[AlignedElement], one_shot: bool = False) -> Predictor:
    """Replays the ground truth; the zero-error reference for all metrics."""
    if not gt:
        raise EmptyInputError("oracle predictor needs a non-empty ground truth")
    lines = [encode_element(ae.element, ae.onset_ms) for ae in gt]

    if one_shot:

        def predict_all(frame, transcript, history):
            return "\n".join(lines + [END_TOKEN])

        return predict_all

    def predict(frame, transcript, history):
        i = len(history)
        return lines[i] if i < len(lines) else END_TOKEN

    return predict


def stub_predictor(seed: int, n_elements: int = 8) -> Predictor:
    """Seeded random-geometry stub: emits plausible lines, then END."""
    rng = np.random.default_rng(seed)
    lines = []
    t = 0
    for i in range(n_elements):
        t += int(rng.integers(200, 2000))
        kind = rng.choice(["freedraw", "rectangle", "line", "text"])
        x = round(float(rng.uniform(0, 600)), 2)
        y = round(float(rng.uniform(0, 340)), 2)
        if kind == "freedraw":
            k = int(rng.integers(2, 12))
            steps = rng.uniform(-8, 8, size=(k, 2)).cumsum(axis=0)
            pts = [(x, y)] + [(round(x + sx, 2), round(y + sy, 2)) for sx, sy in steps]
            e = Element(f"s{i}", ElementType.FREEDRAW, t, x, y,
                        points=tuple((px - x, py - y) for px, py in pts))
        elif kind == "rectangle":
            w = round(float(rng.uniform(10, 120)), 2)
            h = round(float(rng.uniform(10, 80)), 2)
            e = Element(f"s{i}", ElementType.RECTANGLE, t, x, y, w, h)
        elif kind == "line":
            ex = round(float(rng.uniform(-80, 80)), 2)
            ey = round(float(rng.uniform(-80, 80)), 2)
            e = Element(f"s{i}", ElementType.LINE, t, x, y,
                        points=((0.0, 0.0), (ex, ey)))
        else:
            text = "t" + str(int(rng.integers(0, 999)))
            w, h = nominal_text_box(text)
            e = Element(f"s{i}", ElementType.TEXT, t, x, y, w, h, text=text)
        lines.append(encode_element(e, t))

    def predict(frame, transcript, history):
        i = len(history)
        return lines[i] if i < len(lines) else END_TOKEN

    return predict


def lesson_from_aligned(gt: Sequence[AlignedElement]) -> list[tuple[Element, int]]:
    """Ground-truth lesson view of an aligned demo: (element, onset_ms)."""
    return [(ae.element, ae.onset_ms) for ae in gt]


def replay_to_excalidraw(
    lesson: PredictedLesson | Sequence[tuple[Element, int]],
    template: dict | None = None,
) -> str:
    """Excalidraw JSON for a lesson: predicted geometry with `updated` set
    to the predicted onsets, canonical sequential ids, byte-stable output."""
    pairs = lesson.elements if isinstance(lesson, PredictedLesson) else tuple(lesson)
    doc: dict = {
        "type": "excalidraw",
        "version": 2,
        "source": "strokesync",
        "elements": [],
        "appState": {"viewBackgroundColor": "#ffffff"},
        "files": {},
    }
    if template:
        for key, value in template.items():
            if key != "elements":
                doc[key] = value
    out = []
    for n, (e, onset) in enumerate(pairs, start=1):
        canonical = replace(e, id=f"e{n:04d}", updated_ms=onset)
        out.append(element_to_excalidraw_dict(canonical))
    doc["elements"] = out
    return canonical_dumps(doc)


def lesson_to_json(lesson: PredictedLesson) -> str:
    doc = {
        "terminated_by": lesson.terminated_by,
        "elements": [
            {
                "id": e.id,
                "type": e.type.value,
                "onset_ms": onset,
                "x": e.x,
                "y": e.y,
                "width": e.width,
                "height": e.height,
                "points": [[px, py] for px, py in e.points],
                "text": e.text,
            }
            for e, onset in lesson.elements
        ],
        "failures": [
            {"step": f.step, "line": f.line, "error": f.error} for f in lesson.failures
        ],
    }
    return canonical_dumps(doc)


def lesson_from_json(text: str | bytes) -> PredictedLesson:
    doc = json.loads(text)
    elements = []
    for rec in doc["elements"]:
        e = Element(
            id=rec["id"],
            type=ElementType(rec["type"]),
            updated_ms=rec["onset_ms"],
            x=rec["x"],
            y=rec["y"],
            width=rec["width"],
            height=rec["height"],
            points=tuple((p[0], p[1]) for p in rec["points"]),
            text=rec["text"],
        )
        elements.append((e, int(rec["onset_ms"])))
    failures = tuple(
        ParseFailure(f["step"], f["line"], f["error"]) for f in doc.get("failures", ())
    )
    return PredictedLesson(tuple(elements), doc["terminated_by"], failures)


def load_lesson(path: str | Path) -> PredictedLesson:
    return lesson_from_json(Path(path).read_text(encoding="utf-8"))
