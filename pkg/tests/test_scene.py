from __future__ import annotations

import json

import hypothesis.strategies as st
import pytest
from hypothesis import given

from strokesync.scene import (
    DuplicateIdError,
    Element,
    ElementType,
    EmptySceneError,
    InvalidElementError,
    MalformedJsonError,
    MissingFieldError,
    Scene,
    append_element,
    parse_scene,
    scene_bounds,
    scene_to_excalidraw,
)


def raw_doc(elements: list[dict]) -> str:
    return json.dumps({"type": "excalidraw", "version": 2, "elements": elements})


def raw_freedraw(eid: str, updated: int, **over) -> dict:
    el = {
        "id": eid,
        "type": "freedraw",
        "updated": updated,
        "x": 0.0,
        "y": 0.0,
        "width": 5.0,
        "height": 5.0,
        "points": [[0, 0], [5, 5]],
    }
    el.update(over)
    return el


def test_deletion_filter():
    doc = raw_doc(
        [
            raw_freedraw("a", 1),
            raw_freedraw("b", 2, isDeleted=True),
            raw_freedraw("c", 3),
        ]
    )
    parsed = parse_scene(doc)
    assert [e.id for e in parsed.scene.elements] == ["a", "c"]
    assert parsed.n_deleted == 1
    assert parsed.n_skipped == 0


def test_equal_updated_breaks_ties_by_id():
    doc = raw_doc([raw_freedraw("b", 100), raw_freedraw("a", 100)])
    parsed = parse_scene(doc)
    assert [e.id for e in parsed.scene.elements] == ["a", "b"]


def test_unsupported_type_is_skipped_with_warning():
    doc = raw_doc(
        [raw_freedraw("a", 1), {"id": "img", "type": "image", "updated": 2}]
    )
    parsed = parse_scene(doc)
    assert [e.id for e in parsed.scene.elements] == ["a"]
    assert parsed.n_skipped == 1
    assert any("image" in w for w in parsed.warnings)


def test_invalid_geometry_is_skipped_with_warning():
    doc = raw_doc(
        [
            raw_freedraw("a", 1),
            {"id": "r", "type": "rectangle", "updated": 2, "x": 0, "y": 0,
             "width": 0, "height": 10},
        ]
    )
    parsed = parse_scene(doc)
    assert parsed.n_skipped == 1
    assert len(parsed.scene.elements) == 1


def test_missing_required_field_is_error():
    doc = raw_doc([{"type": "freedraw", "updated": 1, "points": [[0, 0]]}])
    with pytest.raises(MissingFieldError):
        parse_scene(doc)


def test_malformed_json():
    with pytest.raises(MalformedJsonError):
        parse_scene(b"{nope")
    with pytest.raises(MalformedJsonError):
        parse_scene(json.dumps({"no_elements": []}))
    with pytest.raises(MalformedJsonError):
        parse_scene(json.dumps({"elements": "not-a-list"}))


def test_bounds_rectangle():
    scene = Scene((Element("r", ElementType.RECTANGLE, 0, 10, 20, 30, 40),))
    assert scene_bounds(scene) == (10, 20, 40, 60)


def test_bounds_freedraw_uses_points():
    scene = Scene(
        (Element("f", ElementType.FREEDRAW, 0, 0, 0, 5, 3, ((0, 0), (5, -3))),)
    )
    assert scene_bounds(scene) == (0, -3, 5, 0)


def brute_force_bounds(scene: Scene) -> tuple[float, float, float, float]:
    # enumerate every extent point of every element, take raw min/max
    pts: list[tuple[float, float]] = []
    for e in scene.elements:
        if e.type is ElementType.FREEDRAW:
            pts.extend(e.absolute_points())
        else:
            pts.extend(
                [(e.x, e.y), (e.x + e.width, e.y), (e.x, e.y + e.height),
                 (e.x + e.width, e.y + e.height)]
            )
    return (
        min(p[0] for p in pts),
        min(p[1] for p in pts),
        max(p[0] for p in pts),
        max(p[1] for p in pts),
    )


def test_bounds_of_disjoint_elements_is_union():
    scene = Scene.ordered(
        [
            Element("r", ElementType.RECTANGLE, 0, -50, -10, 20, 5),
            Element("f", ElementType.FREEDRAW, 1, 100, 200, 7, 9,
                    ((0, 0), (7, 9), (3, -2))),
        ]
    )
    assert scene_bounds(scene) == brute_force_bounds(scene)
    assert scene_bounds(scene) == (-50, -10, 107, 209)


def test_bounds_empty_scene():
    with pytest.raises(EmptySceneError):
        scene_bounds(Scene())


def test_append_to_empty():
    e = Element("a", ElementType.FREEDRAW, 5, 0, 0, 1, 1, ((0, 0),))
    scene = append_element(Scene(), e)
    assert len(scene) == 1


def test_append_inserts_at_sorted_position():
    s = Scene.ordered(
        [
            Element("a", ElementType.FREEDRAW, 10, 0, 0, 1, 1, ((0, 0),)),
            Element("c", ElementType.FREEDRAW, 30, 0, 0, 1, 1, ((0, 0),)),
        ]
    )
    s2 = append_element(s, Element("b", ElementType.FREEDRAW, 20, 0, 0, 1, 1, ((0, 0),)))
    assert [e.id for e in s2.elements] == ["a", "b", "c"]
    assert len(s) == 2  # original untouched


def test_append_duplicate_id():
    e = Element("a", ElementType.FREEDRAW, 5, 0, 0, 1, 1, ((0, 0),))
    scene = append_element(Scene(), e)
    with pytest.raises(DuplicateIdError):
        append_element(scene, e)


def test_element_invariants():
    with pytest.raises(InvalidElementError):
        Element("f", ElementType.FREEDRAW, 0, 0, 0, 1, 1, ())
    with pytest.raises(InvalidElementError):
        Element("r", ElementType.RECTANGLE, 0, 0, 0, 0, 5)
    with pytest.raises(InvalidElementError):
        Element("t", ElementType.TEXT, 0, 0, 0, 10, 10, text=None)
    with pytest.raises(InvalidElementError):
        Element("x", ElementType.FREEDRAW, -1, 0, 0, 1, 1, ((0, 0),))
    with pytest.raises(InvalidElementError):
        Element("", ElementType.FREEDRAW, 0, 0, 0, 1, 1, ((0, 0),))


_raw_kinds = st.sampled_from(["ok", "deleted", "unsupported", "invalid"])


@st.composite
def raw_element_lists(draw):
    kinds = draw(st.lists(_raw_kinds, max_size=12))
    out = []
    for i, kind in enumerate(kinds):
        updated = draw(st.integers(min_value=0, max_value=10**6))
        if kind == "ok":
            out.append(raw_freedraw(f"e{i}", updated))
        elif kind == "deleted":
            out.append(raw_freedraw(f"e{i}", updated, isDeleted=True))
        elif kind == "unsupported":
            out.append({"id": f"e{i}", "type": "frame", "updated": updated})
        else:
            out.append(
                {"id": f"e{i}", "type": "freedraw", "updated": updated, "points": []}
            )
    return out


@given(raw_element_lists())
def test_parse_accounting_and_invariants(raw_elements):
    parsed = parse_scene(raw_doc(raw_elements))
    # every input element lands in exactly one bucket
    assert len(parsed.scene.elements) + parsed.n_deleted + parsed.n_skipped == len(
        raw_elements
    )
    keys = [(e.updated_ms, e.id) for e in parsed.scene.elements]
    assert keys == sorted(keys)
    assert len({e.id for e in parsed.scene.elements}) == len(parsed.scene.elements)


@given(raw_element_lists())
def test_parse_idempotent_through_reserialization(raw_elements):
    first = parse_scene(raw_doc(raw_elements)).scene
    again = parse_scene(json.dumps(scene_to_excalidraw(first))).scene
    assert again == first


def test_template_top_level_fields_preserved():
    template = {"type": "excalidraw", "appState": {"zoom": 2}, "custom": "kept",
                "elements": [{"stale": True}]}
    doc = scene_to_excalidraw(Scene(), template)
    assert doc["custom"] == "kept"
    assert doc["appState"] == {"zoom": 2}
    assert doc["elements"] == []
