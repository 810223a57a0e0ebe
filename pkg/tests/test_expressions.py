from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from htntutor.domain import Bin, Call, Lit, Ref, Unary, eval_expression
from htntutor.errors import ExpressionError
from htntutor.values import Int, Ratio, Sym, Text, as_fraction


def lit(n):
    return Lit(Int(n))


def test_lcm_and_gcd():
    # arithmetic oracle: lcm(2,4) = 8/gcd(2,4) = 4
    assert eval_expression(Call("lcm", (lit(2), lit(4))), {}) == Int(4)
    assert eval_expression(Call("gcd", (lit(12), lit(18))), {}) == Int(6)


def test_exact_fraction_addition():
    # Fraction(1,2) + Fraction(1,4) == Fraction(3,4) by exact arithmetic
    assert Fraction(1, 2) + Fraction(1, 4) == Fraction(3, 4)
    e = Bin("+", Call("frac", (lit(1), lit(2))), Call("frac", (lit(1), lit(4))))
    assert eval_expression(e, {}) == Ratio(3, 4)


def test_int_log():
    assert 2 ** 5 == 32  # exponentiation oracle
    assert eval_expression(Call("intLog", (lit(2), lit(32))), {}) == Int(5)
    assert eval_expression(Call("intLog", (lit(10), lit(1000))), {}) == Int(3)


def test_int_log_out_of_domain_is_an_error_not_a_value():
    with pytest.raises(ExpressionError):
        eval_expression(Call("intLog", (lit(2), lit(6))), {})
    with pytest.raises(ExpressionError):
        eval_expression(Call("intLog", (lit(1), lit(1))), {})


def test_division_normalizes_whole_results_to_int():
    assert eval_expression(Bin("/", lit(4), lit(2)), {}) == Int(2)
    assert eval_expression(Bin("/", lit(1), lit(2)), {}) == Ratio(1, 2)


def test_division_by_zero():
    with pytest.raises(ExpressionError):
        eval_expression(Bin("/", lit(1), lit(0)), {})


def test_unbound_variable():
    with pytest.raises(ExpressionError):
        eval_expression(Ref("x"), {})
    assert eval_expression(Ref("x"), {"x": Int(3)}) == Int(3)


def test_unary_minus():
    assert eval_expression(Unary("-", Ref("x")), {"x": Ratio(1, 2)}) == Ratio(-1, 2)


def test_non_numeric_operands_error():
    with pytest.raises(ExpressionError):
        eval_expression(Bin("+", Lit(Sym("a")), lit(1)), {})
    with pytest.raises(ExpressionError):
        eval_expression(Call("gcd", (Lit(Text("x")), lit(1))), {})


def test_num_den_frac_text():
    assert eval_expression(Call("num", (Call("frac", (lit(3), lit(4))),)), {}) == Int(3)
    assert eval_expression(Call("den", (Call("frac", (lit(3), lit(4))),)), {}) == Int(4)
    assert eval_expression(Call("den", (lit(5),)), {}) == Int(1)
    assert eval_expression(Call("fracText", (Call("frac", (lit(3), lit(4))),)), {}) == Text("3/4")
    assert eval_expression(Call("fracText", (lit(7),)), {}) == Text("7")


@given(st.integers(-50, 50), st.integers(1, 30), st.integers(-50, 50), st.integers(1, 30))
def test_sum_times_common_denominator_is_integral(a, b, c, d):
    # (a/b + c/d) * (b*d) is a whole number, so evaluation must yield Int
    e = Bin("*",
            Bin("+", Call("frac", (lit(a), lit(b))), Call("frac", (lit(c), lit(d)))),
            Bin("*", lit(b), lit(d)))
    out = eval_expression(e, {})
    assert isinstance(out, Int)
    assert as_fraction(out) == (Fraction(a, b) + Fraction(c, d)) * b * d
