"""Built-in domains and the seeded problem generator."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from importlib import resources

from .domain import Domain, TaskHead
from .errors import TutorError
from .facts import Fact
from .parser import parse_domain
from .values import Int, Sym, Text, Value

FRACTION_DOMAIN = "fractionAddition"
LOG_DOMAIN = "logReduction"

DENOMINATOR_RANGE = (2, 12)
LOG_BASES = (2, 3, 5, 10)
LOG_EXPONENT_RANGE = (1, 4)

_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


class GenerationError(TutorError):
    """Problem parameters out of range or unsatisfiable."""


@dataclass(frozen=True)
class ProblemSpec:
    domain: str
    params: dict = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class Problem:
    root: TaskHead
    facts: tuple[Fact, ...]
    statement: str


def builtin_domains() -> list[Domain]:
    out = []
    for name in ("fraction.htn", "logarithm.htn"):
        text = resources.files("htntutor.content").joinpath(name).read_text(encoding="utf-8")
        out.append(parse_domain(text))
    return out


class DomainRegistry:
    """Loaded domains by name. Tracing a problem touches only the records
    of the domain it belongs to, regardless of what else is registered."""

    def __init__(self, domains: list[Domain] | None = None):
        self._domains: dict[str, Domain] = {}
        for d in domains if domains is not None else builtin_domains():
            self.add(d)

    def add(self, d: Domain) -> None:
        self._domains[d.name] = d

    def get(self, name: str) -> Domain:
        if name not in self._domains:
            raise KeyError(f"unknown domain {name!r}")
        return self._domains[name]

    def names(self) -> list[str]:
        return sorted(self._domains)


def _subscript(n: int) -> str:
    return str(n).translate(_SUBSCRIPTS)


def generate_problem(spec: ProblemSpec) -> Problem:
    """Deterministic for a given spec: explicit parameters are honored and
    validated, missing ones are drawn from the documented ranges using the
    seed."""
    if spec.domain == FRACTION_DOMAIN:
        return _fraction_problem(spec)
    if spec.domain == LOG_DOMAIN:
        return _log_problem(spec)
    raise GenerationError(f"no generator for domain {spec.domain!r}")


def _fraction_problem(spec: ProblemSpec) -> Problem:
    rng = random.Random(spec.seed)
    lo, hi = DENOMINATOR_RANGE

    def pick(which: str) -> tuple[int, int]:
        den = spec.params.get(f"den{which}")
        if den is None:
            den = rng.randint(lo, hi)
        if not lo <= den <= hi:
            raise GenerationError(f"den{which}={den} outside {lo}..{hi}")
        num = spec.params.get(f"num{which}")
        if num is None:
            num = rng.randint(1, den - 1)
        if not 1 <= num < den:
            raise GenerationError(f"num{which}={num} is not a proper numerator for /{den}")
        return num, den

    n1, d1 = pick("1")
    n2, d2 = pick("2")
    statement_expr = f"{n1}/{d1}+{n2}/{d2}"
    statement = f"Add the fractions: {n1}/{d1} + {n2}/{d2}"
    f1, f2 = Sym("f1"), Sym("f2")
    facts = (
        Fact("num", (f1, Int(n1))),
        Fact("den", (f1, Int(d1))),
        Fact("num", (f2, Int(n2))),
        Fact("den", (f2, Int(d2))),
        Fact("convertField", (f1, Sym("conv1Field"))),
        Fact("convertField", (f2, Sym("conv2Field"))),
        Fact("field", (Sym("addFraction"), Text(statement_expr))),
        Fact("statement", (Text(statement),)),
    )
    return Problem(TaskHead("addFractions", (f1, f2)), facts, statement)


def _log_problem(spec: ProblemSpec) -> Problem:
    rng = random.Random(spec.seed)
    base = spec.params.get("base")
    if base is None:
        base = rng.choice(LOG_BASES)
    if base not in LOG_BASES:
        raise GenerationError(f"base={base} not one of {LOG_BASES}")

    def pick(which: str) -> int:
        arg = spec.params.get(f"arg{which}")
        if arg is None:
            return base ** rng.randint(*LOG_EXPONENT_RANGE)
        power = base
        while power < arg:
            power *= base
        if power != arg:
            raise GenerationError(f"arg{which}={arg} is not an exact power of {base}")
        return arg

    x = pick("1")
    y = pick("2")
    statement = f"Reduce: log{_subscript(base)}{x} + log{_subscript(base)}{y}"
    p = Sym("p1")
    facts = (
        Fact("base", (p, Int(base))),
        Fact("arg1", (p, Int(x))),
        Fact("arg2", (p, Int(y))),
        Fact("field", (Sym("reduceLog"), Text(f"log{_subscript(base)}{x}+log{_subscript(base)}{y}"))),
        Fact("statement", (Text(statement),)),
    )
    return Problem(TaskHead("reduceLogSum", (p,)), facts, statement)
