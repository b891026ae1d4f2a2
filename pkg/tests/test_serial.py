from __future__ import annotations

import hypothesis.strategies as st
import pytest
from hypothesis import given

from strokesync.scene import Element, ElementType, InvalidElementError
from strokesync.serial import (
    ArityError,
    BadOnsetError,
    BadPointError,
    DecodeError,
    DegenerateGeometryError,
    UnknownTypeError,
    UnterminatedTextError,
    decode_element,
    encode_element,
    format_coord,
    is_end_token,
)

from conftest import carried_points, elements


def test_encode_freedraw_example():
    e = Element("f", ElementType.FREEDRAW, 0, 10, 20, 2.5, 1, ((0, 0), (2.5, 1)))
    assert encode_element(e, 1520) == "freedraw | 1520 | 10.00,20.00 | 12.50,21.00"


def test_encode_rectangle_example():
    e = Element("r", ElementType.RECTANGLE, 0, 0, 0, 5, 5)
    assert encode_element(e, 0) == "rectangle | 0 | 0.00,0.00 | 5.00,5.00"


def test_encode_text_escapes_quotes():
    e = Element("t", ElementType.TEXT, 0, 1, 2, 10, 20, text='Hi "A"')
    assert encode_element(e, 3) == 'text | 3 | 1.00,2.00 | text="Hi \\"A\\""'


def test_encode_rejects_bad_onset():
    e = Element("r", ElementType.RECTANGLE, 0, 0, 0, 5, 5)
    with pytest.raises(InvalidElementError):
        encode_element(e, -1)


def test_format_coord_half_away_from_zero():
    assert format_coord(2.675) == "2.68"
    assert format_coord(-2.675) == "-2.68"
    assert format_coord(0.005) == "0.01"
    assert format_coord(-0.001) == "0.00"
    assert format_coord(7) == "7.00"


def test_decode_rectangle_arity_error():
    with pytest.raises(ArityError):
        decode_element("rectangle | 0 | 0.00,0.00")


def test_decode_unknown_type():
    with pytest.raises(UnknownTypeError) as err:
        decode_element("blob | 5 | 0,0")
    assert err.value.position == 0


def test_decode_bad_onset():
    for bad in ("-5", "1.5", "x", ""):
        with pytest.raises(BadOnsetError) as err:
            decode_element(f"freedraw | {bad} | 0.00,0.00")
        assert err.value.position == 1


def test_decode_bad_point_names_position():
    with pytest.raises(BadPointError) as err:
        decode_element("freedraw | 0 | 0.00,0.00 | nope")
    assert err.value.position == 3


def test_decode_unterminated_text():
    with pytest.raises(UnterminatedTextError):
        decode_element('text | 0 | 1.00,2.00 | text="oops')
    with pytest.raises(UnterminatedTextError):
        decode_element('text | 0 | 1.00,2.00 | text="a" trailing')
    with pytest.raises(UnterminatedTextError):
        decode_element('text | 0 | 1.00,2.00 | text="dangling\\')


def test_decode_text_missing_field():
    with pytest.raises(ArityError):
        decode_element("text | 0 | 1.00,2.00")


def test_decode_text_with_two_points():
    with pytest.raises(ArityError):
        decode_element('text | 0 | 1.00,2.00 | 3.00,4.00 | text="x"')


def test_decode_degenerate_rectangle():
    with pytest.raises(DegenerateGeometryError):
        decode_element("rectangle | 0 | 1.00,1.00 | 1.00,5.00")


def test_decode_line_needs_two_points():
    with pytest.raises(ArityError):
        decode_element("line | 0 | 1.00,1.00")


def test_decode_text_may_contain_pipes():
    e, onset = decode_element('text | 9 | 0.00,0.00 | text="a | b | c"')
    assert e.text == "a | b | c"
    assert onset == 9


def test_decode_synthesizes_deterministic_id():
    line = "freedraw | 0 | 1.00,1.00"
    e1, _ = decode_element(line)
    e2, _ = decode_element(line)
    assert e1.id == e2.id
    e3, _ = decode_element(line, fresh_id="p0001")
    assert e3.id == "p0001"


def test_is_end_token():
    assert is_end_token("END")
    assert is_end_token("  END\n")
    assert not is_end_token("end ")
    assert not is_end_token("freedraw | 0 | 0.00,0.00")
    assert not is_end_token("ENDING")


@given(elements(), st.integers(min_value=0, max_value=10**9))
def test_round_trip(e, onset):
    decoded, got_onset = decode_element(encode_element(e, onset))
    assert decoded.type is e.type
    assert got_onset == onset
    assert decoded.text == e.text
    want = carried_points(e)
    got = carried_points(decoded)
    assert len(got) == len(want)
    for (wx, wy), (gx, gy) in zip(want, got):
        assert abs(wx - gx) <= 0.005 + 1e-9
        assert abs(wy - gy) <= 0.005 + 1e-9


@given(st.text(max_size=60))
def test_decode_is_total(junk):
    try:
        decode_element(junk)
    except DecodeError:
        pass
    except InvalidElementError:
        pass


@given(elements(), st.integers(min_value=0, max_value=10**6))
def test_encode_is_deterministic(e, onset):
    assert encode_element(e, onset) == encode_element(e, onset)
