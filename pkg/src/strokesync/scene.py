"""Excalidraw scene model: parse scene files into a canonical, time-ordered
element stream and maintain immutable scene state."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import StrokeSyncError

# Nominal glyph metrics used wherever a text element's box must be derived
# from its content alone (the token grammar carries no text extent).
TEXT_CHAR_W = 10.0
TEXT_LINE_H = 20.0


class SceneError(StrokeSyncError):
    pass


class MalformedJsonError(SceneError):
    pass


class MissingFieldError(SceneError):
    pass


class InvalidElementError(SceneError):
    pass


class DuplicateIdError(SceneError):
    pass


class EmptySceneError(SceneError):
    pass


class ElementType(str, Enum):
    LINE = "line"
    ARROW = "arrow"
    RECTANGLE = "rectangle"
    ELLIPSE = "ellipse"
    FREEDRAW = "freedraw"
    TEXT = "text"


POINTFUL_TYPES = frozenset({ElementType.LINE, ElementType.ARROW, ElementType.FREEDRAW})
BOX_TYPES = frozenset({ElementType.RECTANGLE, ElementType.ELLIPSE})


def nominal_text_box(text: str) -> tuple[float, float]:
    """Box size for a text element when only its content is known."""
    return (max(1, len(text)) * TEXT_CHAR_W, TEXT_LINE_H)


@dataclass(frozen=True)
class Element:
    """One drawing primitive or freehand stroke.

    `points` are stored relative to (x, y) exactly as Excalidraw stores them;
    use `absolute_points()` for canvas coordinates. `updated_ms` is kept
    verbatim from the source (epoch or recording-relative).
    """

    id: str
    type: ElementType
    updated_ms: int
    x: float
    y: float
    width: float = 0.0
    height: float = 0.0
    points: tuple[tuple[float, float], ...] = ()
    text: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "points", tuple((float(px), float(py)) for px, py in self.points)
        )
        if not self.id:
            raise InvalidElementError("element id must be a non-empty string")
        if self.updated_ms < 0:
            raise InvalidElementError(f"element {self.id!r}: updated_ms must be >= 0")
        if self.type is ElementType.FREEDRAW and not self.points:
            raise InvalidElementError(f"element {self.id!r}: freedraw needs >= 1 point")
        if self.type in (ElementType.LINE, ElementType.ARROW) and len(self.points) < 2:
            raise InvalidElementError(
                f"element {self.id!r}: {self.type.value} needs >= 2 points"
            )
        if self.type in BOX_TYPES and (self.width <= 0 or self.height <= 0):
            raise InvalidElementError(
                f"element {self.id!r}: {self.type.value} needs positive width and height"
            )
        if self.type is ElementType.TEXT and self.text is None:
            raise InvalidElementError(f"element {self.id!r}: text element lacks text")

    def absolute_points(self) -> tuple[tuple[float, float], ...]:
        return tuple((self.x + dx, self.y + dy) for dx, dy in self.points)

    def extent(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y): point hull for freedraw, the
        (x, y, width, height) box for every other type."""
        if self.type is ElementType.FREEDRAW:
            pts = self.absolute_points()
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            return (min(xs), min(ys), max(xs), max(ys))
        return (self.x, self.y, self.x + self.width, self.y + self.height)


def _order_key(e: Element) -> tuple[int, str]:
    return (e.updated_ms, e.id)


@dataclass(frozen=True)
class Scene:
    """Ordered collection of active elements (ascending updated_ms, ties
    broken by id). Immutable; `append_element` returns a new value."""

    elements: tuple[Element, ...] = ()
    source_path: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        seen: set[str] = set()
        prev: tuple[int, str] | None = None
        for e in self.elements:
            if e.id in seen:
                raise DuplicateIdError(f"duplicate element id {e.id!r}")
            seen.add(e.id)
            key = _order_key(e)
            if prev is not None and key < prev:
                raise SceneError(
                    f"elements out of order at {e.id!r}: scenes sort by "
                    "(updated_ms, id)"
                )
            prev = key

    def __len__(self) -> int:
        return len(self.elements)

    @classmethod
    def ordered(
        cls, elements: list[Element] | tuple[Element, ...], source_path: str | None = None
    ) -> "Scene":
        return cls(tuple(sorted(elements, key=_order_key)), source_path)


@dataclass(frozen=True)
class ParsedScene:
    """parse_scene result: the scene plus a per-file degradation report."""

    scene: Scene
    warnings: tuple[str, ...]
    n_deleted: int
    n_skipped: int


_TYPE_NAMES = {t.value for t in ElementType}


def _element_from_raw(raw: dict, index: int) -> Element:
    for key in ("id", "type", "updated"):
        if key not in raw:
            raise MissingFieldError(f"elements[{index}] lacks required field {key!r}")
    etype = ElementType(raw["type"])
    text = raw.get("text") if etype is ElementType.TEXT else None
    points = raw.get("points") or ()
    return Element(
        id=str(raw["id"]),
        type=etype,
        updated_ms=int(round(float(raw["updated"]))),
        x=float(raw.get("x", 0.0)),
        y=float(raw.get("y", 0.0)),
        width=float(raw.get("width", 0.0)),
        height=float(raw.get("height", 0.0)),
        points=tuple((float(p[0]), float(p[1])) for p in points),
        text=text,
    )


def parse_scene(raw: bytes | str, source_path: str | None = None) -> ParsedScene:
    """Parse Excalidraw JSON into a Scene.

    Deleted elements are dropped; elements with unsupported types or
    schema-violating geometry are skipped with a warning instead of failing
    the file. Always: len(scene) + n_deleted + n_skipped == len(elements).
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJsonError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("elements"), list):
        raise MalformedJsonError("document must be an object with an 'elements' array")

    elements: list[Element] = []
    warnings: list[str] = []
    n_deleted = 0
    n_skipped = 0
    seen_ids: set[str] = set()
    for i, entry in enumerate(doc["elements"]):
        if not isinstance(entry, dict):
            raise MalformedJsonError(f"elements[{i}] is not an object")
        if entry.get("isDeleted"):
            n_deleted += 1
            continue
        type_name = entry.get("type")
        if "type" in entry and type_name not in _TYPE_NAMES:
            warnings.append(f"elements[{i}]: unsupported type {type_name!r}, skipped")
            n_skipped += 1
            continue
        try:
            element = _element_from_raw(entry, i)
        except (InvalidElementError, ValueError, TypeError, IndexError) as exc:
            warnings.append(f"elements[{i}]: invalid element skipped ({exc})")
            n_skipped += 1
            continue
        if element.id in seen_ids:
            warnings.append(f"elements[{i}]: duplicate id {element.id!r}, skipped")
            n_skipped += 1
            continue
        seen_ids.add(element.id)
        elements.append(element)
    return ParsedScene(
        scene=Scene.ordered(elements, source_path),
        warnings=tuple(warnings),
        n_deleted=n_deleted,
        n_skipped=n_skipped,
    )


def parse_scene_file(path: str | Path) -> ParsedScene:
    path = Path(path)
    return parse_scene(path.read_bytes(), source_path=str(path))


def scene_bounds(scene: Scene) -> tuple[float, float, float, float]:
    """Tight axis-aligned bounding box over all element extents."""
    if not scene.elements:
        raise EmptySceneError("cannot compute bounds of an empty scene")
    boxes = [e.extent() for e in scene.elements]
    return (
        min(b[0] for b in boxes),
        min(b[1] for b in boxes),
        max(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )


def append_element(scene: Scene, e: Element) -> Scene:
    """New scene with `e` inserted at its sorted position."""
    if any(existing.id == e.id for existing in scene.elements):
        raise DuplicateIdError(f"element id {e.id!r} already present")
    keys = [_order_key(x) for x in scene.elements]
    at = bisect.bisect_right(keys, _order_key(e))
    return Scene(
        scene.elements[:at] + (e,) + scene.elements[at:], scene.source_path
    )


def element_to_excalidraw_dict(e: Element) -> dict:
    out: dict = {
        "id": e.id,
        "type": e.type.value,
        "updated": e.updated_ms,
        "isDeleted": False,
        "x": e.x,
        "y": e.y,
        "width": e.width,
        "height": e.height,
    }
    if e.type in POINTFUL_TYPES:
        out["points"] = [[px, py] for px, py in e.points]
    if e.type is ElementType.TEXT:
        out["text"] = e.text
    return out


def scene_to_excalidraw(scene: Scene, template: dict | None = None) -> dict:
    """Excalidraw document for a scene. Unknown top-level fields of
    `template` are carried through; its `elements` are replaced."""
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
    doc["elements"] = [element_to_excalidraw_dict(e) for e in scene.elements]
    return doc
