from __future__ import annotations

import hypothesis.strategies as st
from hypothesis import settings

from strokesync.scene import Element, ElementType, nominal_text_box

settings.register_profile("default", deadline=None)
settings.load_profile("default")

coords = st.floats(
    min_value=-4000.0, max_value=4000.0, allow_nan=False, allow_infinity=False
)
deltas = st.floats(
    min_value=-500.0, max_value=500.0, allow_nan=False, allow_infinity=False
)
box_sides = st.floats(
    min_value=0.01, max_value=2000.0, allow_nan=False, allow_infinity=False
)
onsets = st.integers(min_value=0, max_value=10**9)


@st.composite
def elements(draw, eid: str = "e1", max_points: int = 24) -> Element:
    """Random valid element of any of the six types."""
    etype = draw(st.sampled_from(list(ElementType)))
    updated = draw(onsets)
    x = draw(coords)
    y = draw(coords)
    if etype in (ElementType.RECTANGLE, ElementType.ELLIPSE):
        return Element(eid, etype, updated, x, y, draw(box_sides), draw(box_sides))
    if etype is ElementType.TEXT:
        text = draw(st.text(max_size=40))
        w, h = nominal_text_box(text)
        return Element(eid, etype, updated, x, y, w, h, text=text)
    min_points = 1 if etype is ElementType.FREEDRAW else 2
    pts = draw(
        st.lists(st.tuples(deltas, deltas), min_size=min_points, max_size=max_points)
    )
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return Element(
        eid, etype, updated, x, y, max(xs) - min(xs), max(ys) - min(ys), tuple(pts)
    )


def carried_points(e: Element) -> list[tuple[float, float]]:
    """The absolute points the token grammar carries for an element."""
    if e.type in (ElementType.RECTANGLE, ElementType.ELLIPSE):
        return [(e.x, e.y), (e.x + e.width, e.y + e.height)]
    if e.type is ElementType.TEXT:
        return [(e.x, e.y)]
    return list(e.absolute_points())
