"""Map drawing elements to transcript positions via monotonic 1D dynamic
time warping, and read/write aligned annotation files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import StrokeSyncError
from .jsonio import atomic_write_text, canonical_dumps
from .scene import Element, ElementType, Scene
from .transcript import Transcript, context_window

DEFAULT_CONTEXT_RADIUS = 5


class AlignError(StrokeSyncError):
    pass


class EmptyInputError(AlignError):
    pass


@dataclass(frozen=True)
class WarpPath:
    """Monotone, continuous index path from (0, 0) to (N-1, T-1)."""

    pairs: tuple[tuple[int, int], ...]
    cost: float


@dataclass(frozen=True)
class AlignedElement:
    element: Element
    speech_onset_s: float
    speech_phrase: str
    speech_context: str
    matched_word_index: int

    @property
    def onset_ms(self) -> int:
        return int(math.floor(self.speech_onset_s * 1000.0 + 0.5))


def normalize_times(values: Sequence[float]) -> list[float]:
    """Affine min-max rescale to [0, 1]; a constant sequence maps to all 0."""
    if len(values) == 0:
        raise EmptyInputError("cannot normalize an empty sequence")
    lo = min(values)
    hi = max(values)
    if hi == lo:
        return [0.0] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def dtw_align(
    a: Sequence[float], b: Sequence[float], band: int | None = None
) -> WarpPath:
    """Cost-minimal monotone alignment of `a` against `b`.

    Local cost is |a[i] - b[j]|; the recurrence takes the best of the
    diagonal, (i-1, j) and (i, j-1) predecessors, preferring them in that
    order on ties so paths are identical across platforms. `band` optionally
    restricts the search to a slanted Sakoe-Chiba corridor of that half-width.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise EmptyInputError("dtw_align requires two non-empty sequences")
    if band is not None and band < 1:
        raise ValueError("band width must be >= 1")

    inf = math.inf
    slope = (m - 1) / (n - 1) if n > 1 else 0.0

    def in_band(i: int, j: int) -> bool:
        if band is None:
            return True
        return abs(i * slope - j) <= band

    # cum[i][j] = best cost ending at (i, j); step[i][j] = predecessor choice
    # (0 diagonal, 1 = (i-1, j), 2 = (i, j-1)).
    cum = [[inf] * m for _ in range(n)]
    step = [[-1] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        row = cum[i]
        srow = step[i]
        for j in range(m):
            if not in_band(i, j):
                continue
            c = abs(ai - b[j])
            if i == 0 and j == 0:
                row[0] = c
                continue
            diag = cum[i - 1][j - 1] if i > 0 and j > 0 else inf
            up = cum[i - 1][j] if i > 0 else inf
            left = row[j - 1] if j > 0 else inf
            best = diag
            choice = 0
            if up < best:
                best = up
                choice = 1
            if left < best:
                best = left
                choice = 2
            if best == inf:
                continue
            row[j] = c + best
            srow[j] = choice

    total = cum[n - 1][m - 1]
    if total == inf:
        raise AlignError("no alignment path inside the band; widen it")

    pairs: list[tuple[int, int]] = []
    i, j = n - 1, m - 1
    while True:
        pairs.append((i, j))
        if i == 0 and j == 0:
            break
        choice = step[i][j]
        if choice == 0:
            i, j = i - 1, j - 1
        elif choice == 1:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return WarpPath(tuple(pairs), total)


def align_demo(
    scene: Scene,
    transcript: Transcript,
    k: int = DEFAULT_CONTEXT_RADIUS,
    band: int | None = None,
) -> list[AlignedElement]:
    """Annotate every scene element with its speech onset, phrase and
    context window.

    Element updated times and word start times are min-max normalized
    separately, warped against each other, and each element takes the first
    (lowest) word index on its stretch of the path.
    """
    if not scene.elements:
        raise EmptyInputError("cannot align an empty scene")
    if not transcript.words:
        raise EmptyInputError("cannot align against an empty transcript")
    a = normalize_times([float(e.updated_ms) for e in scene.elements])
    b = normalize_times([w.start_s for w in transcript.words])
    path = dtw_align(a, b, band=band)

    first_word: dict[int, int] = {}
    for i, j in path.pairs:
        first_word.setdefault(i, j)

    aligned: list[AlignedElement] = []
    for i, element in enumerate(scene.elements):
        j = first_word[i]
        word = transcript.words[j]
        window = context_window(transcript, j, k)
        aligned.append(
            AlignedElement(
                element=element,
                speech_onset_s=word.start_s,
                speech_phrase=word.word,
                speech_context=" ".join(w.word for w in window),
                matched_word_index=j,
            )
        )
    return aligned


def aligned_to_records(aligned: Sequence[AlignedElement]) -> list[dict]:
    records = []
    for ae in aligned:
        e = ae.element
        records.append(
            {
                "id": e.id,
                "type": e.type.value,
                "updated_ms": e.updated_ms,
                "x": e.x,
                "y": e.y,
                "width": e.width,
                "height": e.height,
                "points": [[px, py] for px, py in e.points],
                "text": e.text,
                "speech_onset_s": ae.speech_onset_s,
                "speech_phrase": ae.speech_phrase,
                "speech_context": ae.speech_context,
                "matched_word_index": ae.matched_word_index,
            }
        )
    return records


def emit_aligned(aligned: Sequence[AlignedElement], path: str | Path) -> None:
    """Write one JSON record per element, keys in a fixed order."""
    if not aligned:
        raise EmptyInputError("refusing to write an empty aligned file")
    atomic_write_text(Path(path), canonical_dumps(aligned_to_records(aligned)))


def load_aligned(path: str | Path) -> list[AlignedElement]:
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    aligned = []
    for rec in records:
        element = Element(
            id=rec["id"],
            type=ElementType(rec["type"]),
            updated_ms=rec["updated_ms"],
            x=rec["x"],
            y=rec["y"],
            width=rec["width"],
            height=rec["height"],
            points=tuple((p[0], p[1]) for p in rec["points"]),
            text=rec["text"],
        )
        aligned.append(
            AlignedElement(
                element=element,
                speech_onset_s=rec["speech_onset_s"],
                speech_phrase=rec["speech_phrase"],
                speech_context=rec["speech_context"],
                matched_word_index=rec["matched_word_index"],
            )
        )
    return aligned
