from __future__ import annotations

import json

import hypothesis.strategies as st
import pytest
from hypothesis import given

from strokesync.transcript import (
    EndBeforeStartError,
    IndexOutOfRangeError,
    MalformedRecordError,
    NegativeTimeError,
    Transcript,
    Word,
    context_window,
    parse_transcript,
    transcript_to_records,
)


def rec(word: str, start: float, end: float) -> dict:
    return {"word": word, "start_s": start, "end_s": end}


def test_parse_sorts_by_start():
    raw = json.dumps([rec("c", 2.0, 2.5), rec("a", 0.0, 0.4), rec("b", 1.0, 1.2)])
    t = parse_transcript(raw)
    assert [w.word for w in t.words] == ["a", "b", "c"]


def test_parse_accepts_json_lines():
    raw = "\n".join(json.dumps(rec(w, i * 1.0, i * 1.0 + 0.2)) for i, w in enumerate("abc"))
    t = parse_transcript(raw)
    assert len(t) == 3


def test_ties_keep_input_order():
    raw = json.dumps([rec("first", 1.0, 1.1), rec("second", 1.0, 1.2)])
    t = parse_transcript(raw)
    assert [w.word for w in t.words] == ["first", "second"]


def test_end_before_start_rejected():
    with pytest.raises(EndBeforeStartError):
        parse_transcript(json.dumps([rec("x", 2.0, 1.0)]))


def test_negative_time_rejected():
    with pytest.raises(NegativeTimeError):
        parse_transcript(json.dumps([rec("x", -0.5, 1.0)]))


def test_empty_word_rejected():
    with pytest.raises(MalformedRecordError):
        parse_transcript(json.dumps([rec("", 0.0, 1.0)]))


def test_missing_field_rejected():
    with pytest.raises(MalformedRecordError):
        parse_transcript(json.dumps([{"word": "x", "start_s": 0.0}]))


def test_garbage_rejected():
    with pytest.raises(MalformedRecordError):
        parse_transcript("not json at all {{{")


def _transcript(n: int) -> Transcript:
    return Transcript(tuple(Word(f"w{i}", float(i), float(i) + 0.5) for i in range(n)))


def test_context_window_middle():
    words = context_window(_transcript(10), center=5, k=2)
    assert [w.word for w in words] == ["w3", "w4", "w5", "w6", "w7"]


def test_context_window_clamps_at_start():
    words = context_window(_transcript(10), center=0, k=3)
    assert [w.word for w in words] == ["w0", "w1", "w2", "w3"]


def test_context_window_radius_zero():
    assert [w.word for w in context_window(_transcript(10), 4, 0)] == ["w4"]


def test_context_window_bad_center():
    with pytest.raises(IndexOutOfRangeError):
        context_window(_transcript(3), 3, 1)


@given(
    st.integers(min_value=1, max_value=30),
    st.integers(min_value=0, max_value=29),
    st.integers(min_value=0, max_value=10),
)
def test_context_window_size_bounds(n, center, k):
    if center >= n:
        center = n - 1
    words = context_window(_transcript(n), center, k)
    assert 1 <= len(words) <= 2 * k + 1


def test_emit_parse_identity():
    t = _transcript(5)
    again = parse_transcript(json.dumps(transcript_to_records(t)))
    assert again.words == t.words
