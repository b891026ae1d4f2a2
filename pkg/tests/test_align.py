from __future__ import annotations

import math

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from strokesync.align import (
    AlignedElement,
    EmptyInputError,
    align_demo,
    aligned_to_records,
    dtw_align,
    emit_aligned,
    load_aligned,
    normalize_times,
)
from strokesync.scene import Element, ElementType, Scene
from strokesync.transcript import Transcript, Word


def brute_force_dtw_cost(a: list[float], b: list[float]) -> float:
    """Independent oracle: enumerate every monotone, continuous path from
    (0,0) to (n-1,m-1) and take the cheapest. Local costs are non-negative,
    so abandoning a branch that already exceeds the best finished path
    cannot drop the optimum."""
    n, m = len(a), len(b)
    best = math.inf

    def walk(i: int, j: int, acc: float) -> None:
        nonlocal best
        acc += abs(a[i] - b[j])
        if acc > best:
            return
        if i == n - 1 and j == m - 1:
            best = acc
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc)
        if i + 1 < n:
            walk(i + 1, j, acc)
        if j + 1 < m:
            walk(i, j + 1, acc)

    walk(0, 0, 0.0)
    return best


def path_cost(a: list[float], b: list[float], pairs) -> float:
    return sum(abs(a[i] - b[j]) for i, j in pairs)


def assert_valid_path(pairs, n: int, m: int) -> None:
    assert pairs[0] == (0, 0)
    assert pairs[-1] == (n - 1, m - 1)
    for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
        assert (i1 - i0, j1 - j0) in {(1, 0), (0, 1), (1, 1)}


# --- normalize_times ------------------------------------------------------


def test_normalize_basic():
    assert normalize_times([100, 200, 300]) == [0.0, 0.5, 1.0]


def test_normalize_single_value():
    assert normalize_times([7]) == [0.0]


def test_normalize_constant_sequence():
    assert normalize_times([3, 3, 3]) == [0.0, 0.0, 0.0]


def test_normalize_affine_oracle():
    values = [0, 1, 1, 4]
    lo, hi = min(values), max(values)
    expected = [(v - lo) / (hi - lo) for v in values]
    assert normalize_times(values) == expected == [0.0, 0.25, 0.25, 1.0]


def test_normalize_empty():
    with pytest.raises(EmptyInputError):
        normalize_times([])


# --- dtw_align ------------------------------------------------------------


def test_dtw_identity_alignment():
    path = dtw_align([0, 0.5, 1], [0, 0.5, 1])
    assert path.pairs == ((0, 0), (1, 1), (2, 2))
    assert path.cost == 0.0


def test_dtw_two_vs_three_matches_brute_force():
    a, b = [0.0, 1.0], [0.0, 0.5, 1.0]
    path = dtw_align(a, b)
    assert path.cost == pytest.approx(brute_force_dtw_cost(a, b), abs=1e-12)
    assert_valid_path(path.pairs, len(a), len(b))


def test_dtw_single_element_row():
    path = dtw_align([0.3], [0.0, 0.5, 1.0])
    assert path.pairs == ((0, 0), (0, 1), (0, 2))
    assert path.cost == pytest.approx(0.3 + 0.2 + 0.7, abs=1e-12)


def test_dtw_empty_input():
    with pytest.raises(EmptyInputError):
        dtw_align([], [1.0])
    with pytest.raises(EmptyInputError):
        dtw_align([1.0], [])


seqs = st.lists(
    st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=12
)


@given(seqs, seqs)
def test_dtw_path_is_monotone_continuous_and_bounded(a, b):
    path = dtw_align(a, b)
    assert_valid_path(path.pairs, len(a), len(b))
    assert path.cost == pytest.approx(path_cost(a, b, path.pairs), abs=1e-9)


@settings(max_examples=60)
@given(
    st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=8),
    st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=8),
)
def test_dtw_cost_matches_exhaustive_enumeration(a, b):
    assert dtw_align(a, b).cost == pytest.approx(brute_force_dtw_cost(a, b), abs=1e-9)


@given(st.lists(st.floats(min_value=0, max_value=1e6, allow_nan=False), min_size=1,
                max_size=79, unique=True))
def test_dtw_self_alignment_is_zero_cost_diagonal(xs):
    xs = sorted(xs)
    path = dtw_align(xs, xs)
    assert path.cost == 0.0
    assert path.pairs == tuple((i, i) for i in range(len(xs)))


def test_dtw_band_restricts_search():
    a = [0.0, 0.1, 0.2, 0.9, 1.0]
    full = dtw_align(a, a)
    banded = dtw_align(a, a, band=1)
    assert banded.pairs == full.pairs


# --- align_demo -----------------------------------------------------------


def _freedraw(eid: str, t: int) -> Element:
    return Element(eid, ElementType.FREEDRAW, t, 0, 0, 1, 1, ((0, 0), (1, 1)))


def _scene(times: list[int]) -> Scene:
    return Scene.ordered([_freedraw(f"e{i}", t) for i, t in enumerate(times)])


def _transcript(starts: list[float]) -> Transcript:
    return Transcript(tuple(Word(f"w{i}", s, s + 0.2) for i, s in enumerate(starts)))


def test_align_single_element_single_word():
    aligned = align_demo(_scene([1000]), _transcript([3.5]))
    assert len(aligned) == 1
    assert aligned[0].matched_word_index == 0
    assert aligned[0].speech_onset_s == 3.5
    assert aligned[0].speech_phrase == "w0"


def test_align_proportional_times_gives_identity_mapping():
    times = [0, 1200, 2500, 7000, 9000]
    aligned = align_demo(_scene(times), _transcript([t / 1000 for t in times]))
    assert [ae.matched_word_index for ae in aligned] == [0, 1, 2, 3, 4]


def test_align_output_order_and_length_match_scene():
    scene = _scene([5, 100, 2000, 2100])
    aligned = align_demo(scene, _transcript([0.0, 0.5, 1.0]))
    assert len(aligned) == len(scene.elements)
    assert [ae.element.id for ae in aligned] == [e.id for e in scene.elements]


def test_align_context_contains_phrase():
    aligned = align_demo(_scene([0, 10, 20]), _transcript([0.0, 1.0, 2.0]), k=1)
    for ae in aligned:
        assert ae.speech_phrase in ae.speech_context


@given(st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=40,
                unique=True),
       st.lists(st.floats(min_value=0, max_value=500, allow_nan=False), min_size=1,
                max_size=40))
def test_align_onsets_non_decreasing(times, starts):
    aligned = align_demo(_scene(sorted(times)), _transcript(sorted(starts)))
    onsets = [ae.speech_onset_s for ae in aligned]
    assert onsets == sorted(onsets)
    for ae in aligned:
        assert 0 <= ae.matched_word_index < len(starts)


def test_align_empty_inputs():
    with pytest.raises(EmptyInputError):
        align_demo(Scene(), _transcript([0.0]))
    with pytest.raises(EmptyInputError):
        align_demo(_scene([1]), Transcript(()))


# --- aligned file io ------------------------------------------------------


def test_emit_and_load_round_trip(tmp_path):
    aligned = align_demo(_scene([0, 500, 900]), _transcript([0.1, 0.4, 0.9]))
    out = tmp_path / "aligned_1.json"
    emit_aligned(aligned, out)
    assert load_aligned(out) == aligned


def test_emit_rejects_empty_list(tmp_path):
    with pytest.raises(EmptyInputError):
        emit_aligned([], tmp_path / "nope.json")


def test_emit_is_deterministic(tmp_path):
    aligned = align_demo(_scene([0, 500]), _transcript([0.1, 0.4]))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_aligned(aligned, a)
    emit_aligned(aligned, b)
    assert a.read_bytes() == b.read_bytes()


def test_record_key_order_is_fixed():
    aligned = align_demo(_scene([0]), _transcript([0.0]))
    keys = list(aligned_to_records(aligned)[0])
    assert keys == [
        "id", "type", "updated_ms", "x", "y", "width", "height", "points",
        "text", "speech_onset_s", "speech_phrase", "speech_context",
        "matched_word_index",
    ]


def test_empty_phrase_representable():
    # the format permits an empty phrase even though the aligner never
    # produces one for non-empty transcripts
    e = _freedraw("e", 0)
    ae = AlignedElement(e, 1.0, "", "", 0)
    assert aligned_to_records([ae])[0]["speech_phrase"] == ""
