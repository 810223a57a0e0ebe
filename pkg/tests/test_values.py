from __future__ import annotations

from fractions import Fraction

import pytest

from htntutor.values import (
    Bool,
    Int,
    Ratio,
    Sym,
    Text,
    format_value,
    from_fraction,
    from_json,
    make_ratio,
    parse_entry,
    sort_key,
    to_json,
)


def test_ratio_normalizes_to_lowest_terms():
    assert make_ratio(2, 4) == Ratio(1, 2)
    assert make_ratio(-2, -4) == Ratio(1, 2)
    assert make_ratio(2, -4) == Ratio(-1, 2)


def test_whole_ratios_collapse_to_int():
    assert make_ratio(4, 4) == Int(1)
    assert make_ratio(10, 2) == Int(5)
    assert make_ratio(0, 7) == Int(0)


def test_ratio_constructor_rejects_denormalized():
    with pytest.raises(ValueError):
        Ratio(2, 4)
    with pytest.raises(ValueError):
        Ratio(3, 1)


def test_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        make_ratio(1, 0)


def test_equality_never_crosses_kinds():
    assert Int(1) != Bool(True)
    assert Sym("x") != Text("x")
    assert Int(0) != Bool(False)


def test_parse_entry():
    assert parse_entry("5") == Int(5)
    assert parse_entry(" -3 ") == Int(-3)
    assert parse_entry("3/4") == Ratio(3, 4)
    assert parse_entry("4/4") == Int(1)
    assert parse_entry("5/0") == Text("5/0")
    assert parse_entry("log2(32)") == Text("log2(32)")


def test_format_round_trips_numerics_and_text():
    for v in [Int(7), Int(-2), Ratio(3, 4), Text("hello there")]:
        assert parse_entry(format_value(v)) == v


def test_sort_key_is_total_and_numeric_aware():
    values = [Text("b"), Int(2), Ratio(1, 2), Bool(True), Sym("a"), Int(-1)]
    ordered = sorted(values, key=sort_key)
    assert ordered == [Bool(True), Int(-1), Ratio(1, 2), Int(2), Sym("a"), Text("b")]


def test_json_round_trip_all_kinds():
    for v in [Sym("x"), Text("t"), Int(-4), Ratio(5, 7), Bool(False)]:
        assert from_json(to_json(v)) == v


def test_from_fraction():
    assert from_fraction(Fraction(6, 8)) == Ratio(3, 4)
    assert from_fraction(Fraction(8, 4)) == Int(2)
