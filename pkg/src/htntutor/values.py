"""Ground values and terms used in facts, patterns, and expressions.

Five value kinds exist: symbols, text, integers, exact ratios, and booleans.
Equality is structural and never crosses kinds. Ratios are kept in lowest
terms with a positive denominator; a ratio that reduces to a whole number is
always represented as an Int, so the Ratio kind only ever holds non-integral
values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


@dataclass(frozen=True)
class Sym:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Text:
    value: str

    def __repr__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Int:
    value: int

    def __repr__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Ratio:
    num: int
    den: int

    def __post_init__(self) -> None:
        if self.den < 2 or math.gcd(self.num, self.den) != 1:
            raise ValueError(f"ratio {self.num}/{self.den} is not normalized")

    def __repr__(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class Bool:
    value: bool

    def __repr__(self) -> str:
        return "true" if self.value else "false"


Value = Union[Sym, Text, Int, Ratio, Bool]


@dataclass(frozen=True)
class Var:
    """A named variable, written ?name in domain files."""

    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


Term = Union[Value, Var]


def make_ratio(num: int, den: int) -> Value:
    """Build an exact numeric value, collapsing whole ratios to Int."""
    if den == 0:
        raise ZeroDivisionError("ratio with zero denominator")
    if den < 0:
        num, den = -num, -den
    g = math.gcd(num, den)
    num, den = num // g, den // g
    if den == 1:
        return Int(num)
    return Ratio(num, den)


def from_fraction(f: Fraction) -> Value:
    return make_ratio(f.numerator, f.denominator)


def as_fraction(v: Value) -> Fraction:
    """Numeric view of a value; raises TypeError for non-numeric kinds."""
    if isinstance(v, Int):
        return Fraction(v.value)
    if isinstance(v, Ratio):
        return Fraction(v.num, v.den)
    raise TypeError(f"not a numeric value: {v!r}")


def is_numeric(v: Term) -> bool:
    return isinstance(v, (Int, Ratio))


_KIND_RANK = {Bool: 0, Int: 1, Ratio: 1, Sym: 2, Text: 3}


def sort_key(v: Value):
    """Total order over values: booleans, then numerics by magnitude,
    then symbols, then text. Used wherever enumeration order must be
    reproducible."""
    if isinstance(v, Bool):
        return (0, int(v.value), "")
    if isinstance(v, (Int, Ratio)):
        f = as_fraction(v)
        return (1, f, "")
    if isinstance(v, Sym):
        return (2, 0, v.name)
    if isinstance(v, Text):
        return (3, 0, v.value)
    raise TypeError(f"not a value: {v!r}")


_INT_RE = re.compile(r"^[+-]?\d+$")
_RATIO_RE = re.compile(r"^([+-]?\d+)\s*/\s*(\d+)$")


def parse_entry(text: str) -> Value:
    """Parse a student-typed string into a value.

    Bare integers become Int, "a/b" becomes an exact ratio (normalized the
    same way expressions are, so "4/4" equals the integer 1), anything else
    is kept as literal text.
    """
    s = text.strip()
    if _INT_RE.match(s):
        return Int(int(s))
    m = _RATIO_RE.match(s)
    if m and int(m.group(2)) != 0:
        return make_ratio(int(m.group(1)), int(m.group(2)))
    return Text(s)


def format_value(v: Value) -> str:
    """Canonical display string; parse_entry(format_value(v)) == v for
    numeric and text values."""
    if isinstance(v, Bool):
        return "true" if v.value else "false"
    if isinstance(v, Int):
        return str(v.value)
    if isinstance(v, Ratio):
        return f"{v.num}/{v.den}"
    if isinstance(v, Sym):
        return v.name
    if isinstance(v, Text):
        return v.value
    raise TypeError(f"not a value: {v!r}")


def to_json(v: Value) -> dict:
    """Tagged JSON encoding, exact for all kinds (used in event logs)."""
    if isinstance(v, Sym):
        return {"k": "sym", "v": v.name}
    if isinstance(v, Text):
        return {"k": "text", "v": v.value}
    if isinstance(v, Int):
        return {"k": "int", "v": v.value}
    if isinstance(v, Ratio):
        return {"k": "ratio", "n": v.num, "d": v.den}
    if isinstance(v, Bool):
        return {"k": "bool", "v": v.value}
    raise TypeError(f"not a value: {v!r}")


def from_json(obj: dict) -> Value:
    kind = obj["k"]
    if kind == "sym":
        return Sym(obj["v"])
    if kind == "text":
        return Text(obj["v"])
    if kind == "int":
        return Int(obj["v"])
    if kind == "ratio":
        return Ratio(obj["n"], obj["d"])
    if kind == "bool":
        return Bool(obj["v"])
    raise ValueError(f"unknown value tag: {kind!r}")
