"""Element token grammar: encode elements to one-line strings and parse
predictor output back into elements.

Line shape: ``TYPE | ONSET | x0,y0 | x1,y1 ... [| text="..."]`` with
absolute canvas coordinates at fixed two-decimal precision. The decoder is
total: any byte string either parses or raises a DecodeError naming the
offending field.
"""

from __future__ import annotations

import hashlib
import re
from decimal import ROUND_HALF_UP, Decimal

from .errors import StrokeSyncError
from .scene import Element, ElementType, InvalidElementError, nominal_text_box

END_TOKEN = "END"
SEP = " | "

_POINT_RE = re.compile(r"^(-?\d+(?:\.\d+)?),(-?\d+(?:\.\d+)?)$")
_ONSET_RE = re.compile(r"^\d+$")
_TYPE_BY_NAME = {t.value: t for t in ElementType}


class DecodeError(StrokeSyncError):
    """Base for all parse failures; `position` is the 0-based field index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"field {position}: {message}")
        self.position = position


class UnknownTypeError(DecodeError):
    pass


class BadOnsetError(DecodeError):
    pass


class BadPointError(DecodeError):
    pass


class ArityError(DecodeError):
    pass


class UnterminatedTextError(DecodeError):
    pass


class DegenerateGeometryError(DecodeError):
    pass


def format_coord(v: float) -> str:
    """Fixed two decimals, ties rounded half away from zero, '.' separator."""
    q = Decimal(repr(float(v))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    if q == 0:
        q = abs(q)  # never emit "-0.00"
    return f"{q:.2f}"


def _escape_text(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _scan_text_field(raw: str, position: int) -> str:
    """Parse a full ``text="..."`` field; the closing quote must be the
    final, unescaped character."""
    prefix = 'text="'
    if not raw.startswith(prefix):
        raise UnterminatedTextError('text field must look like text="..."', position)
    body = raw[len(prefix) :]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise UnterminatedTextError("dangling escape in text field", position)
            out.append(body[i + 1])
            i += 2
        elif ch == '"':
            if i != len(body) - 1:
                raise UnterminatedTextError("junk after closing quote", position)
            return "".join(out)
        else:
            out.append(ch)
            i += 1
    raise UnterminatedTextError("text field missing its closing quote", position)


def encode_element(e: Element, onset_ms: int) -> str:
    """Serialize an element with its absolute onset in milliseconds."""
    if not isinstance(onset_ms, int) or onset_ms < 0:
        raise InvalidElementError(f"onset_ms must be a non-negative integer, got {onset_ms!r}")
    if e.type in (ElementType.RECTANGLE, ElementType.ELLIPSE):
        pts = [(e.x, e.y), (e.x + e.width, e.y + e.height)]
    elif e.type is ElementType.TEXT:
        pts = [(e.x, e.y)]
    else:
        pts = list(e.absolute_points())
    fields = [e.type.value, str(onset_ms)]
    fields.extend(f"{format_coord(px)},{format_coord(py)}" for px, py in pts)
    if e.type is ElementType.TEXT:
        fields.append(f'text="{_escape_text(e.text or "")}"')
    return SEP.join(fields)


def _parse_point(token: str, position: int) -> tuple[float, float]:
    m = _POINT_RE.match(token)
    if not m:
        raise BadPointError(f"malformed point {token!r}", position)
    return (float(m.group(1)), float(m.group(2)))


def _fresh_id(line: str) -> str:
    return "dec-" + hashlib.sha1(line.encode("utf-8")).hexdigest()[:10]


def decode_element(line: str, fresh_id: str | None = None) -> tuple[Element, int]:
    """Inverse of encode_element, up to coordinate rounding and a new id.

    The separator is the literal ``" | "`` so quoted text may itself contain
    pipes. `fresh_id` overrides the content-derived default id.
    """
    s = line.strip()
    parts = s.split(SEP)
    etype = _TYPE_BY_NAME.get(parts[0])
    if etype is None:
        raise UnknownTypeError(f"unknown element type {parts[0]!r}", 0)
    if len(parts) < 3:
        raise ArityError("expected onset and at least one point", len(parts))
    if not _ONSET_RE.match(parts[1]):
        raise BadOnsetError(f"onset must be a non-negative integer, got {parts[1]!r}", 1)
    onset = int(parts[1])

    if etype is ElementType.TEXT:
        anchor = _parse_point(parts[2], 2)
        if len(parts) < 4:
            raise ArityError("text element lacks its text field", len(parts))
        if _POINT_RE.match(parts[3]):
            raise ArityError("text element takes exactly one anchor point", 3)
        text = _scan_text_field(SEP.join(parts[3:]), 3)
        width, height = nominal_text_box(text)
        element = Element(
            id=fresh_id or _fresh_id(s),
            type=etype,
            updated_ms=onset,
            x=anchor[0],
            y=anchor[1],
            width=width,
            height=height,
            text=text,
        )
        return element, onset

    pts = [_parse_point(tok, i) for i, tok in enumerate(parts[2:], start=2)]
    if etype in (ElementType.RECTANGLE, ElementType.ELLIPSE):
        if len(pts) != 2:
            raise ArityError(f"{etype.value} takes exactly 2 corner points", len(parts))
        (x1, y1), (x2, y2) = pts
        x, y = min(x1, x2), min(y1, y2)
        width, height = abs(x2 - x1), abs(y2 - y1)
        if width == 0 or height == 0:
            raise DegenerateGeometryError(f"{etype.value} corners must span a box", 3)
        element = Element(
            id=fresh_id or _fresh_id(s),
            type=etype,
            updated_ms=onset,
            x=x,
            y=y,
            width=width,
            height=height,
        )
        return element, onset

    if etype in (ElementType.LINE, ElementType.ARROW) and len(pts) < 2:
        raise ArityError(f"{etype.value} needs at least 2 points", len(parts))
    x, y = pts[0]
    rel = tuple((px - x, py - y) for px, py in pts)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    element = Element(
        id=fresh_id or _fresh_id(s),
        type=etype,
        updated_ms=onset,
        x=x,
        y=y,
        width=max(xs) - min(xs),
        height=max(ys) - min(ys),
        points=rel,
    )
    return element, onset


def is_end_token(s: str) -> bool:
    return s.strip() == END_TOKEN
