"""Working memory: ground facts, pattern matching, and axiom saturation.

Facts are logical predicates over ground values. Queries are conjunctions
of positive patterns, negation-as-failure patterns, and comparison tests,
evaluated in a deterministic order so that tracing and golden tests are
reproducible.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .errors import MalformedFactError, SafetyError, SaturationOverflowError
from .values import Bool, Int, Ratio, Sym, Term, Text, Value, Var, as_fraction, is_numeric, sort_key

ASSERTED = "asserted"
INFERRED = "inferred"

Binding = dict  # variable name -> Value


@dataclass(frozen=True)
class Fact:
    predicate: str
    args: tuple[Value, ...]
    provenance: str = field(default=ASSERTED, compare=False)

    def key(self) -> tuple:
        return (self.predicate, self.args)

    def __repr__(self) -> str:
        inner = ", ".join(repr(a) for a in self.args)
        return f"{self.predicate}({inner})"


@dataclass(frozen=True)
class Pattern:
    predicate: str
    args: tuple[Term, ...]

    def variables(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}

    def __repr__(self) -> str:
        inner = ", ".join(repr(a) for a in self.args)
        return f"{self.predicate}({inner})"


@dataclass(frozen=True)
class Positive:
    pattern: Pattern


@dataclass(frozen=True)
class Negated:
    pattern: Pattern


@dataclass(frozen=True)
class Test:
    op: str  # one of = != < <= > >=
    left: Term
    right: Term


Condition = object  # Positive | Negated | Test

_TEST_OPS = ("=", "!=", "<", "<=", ">", ">=")


def _args_key(args: Iterable[Value]) -> tuple:
    return tuple(sort_key(a) for a in args)


class WorkingMemory:
    """A set of ground facts with a by-predicate index.

    Instances behave as immutable values: mutators return new memories.
    Deduplication ignores provenance; asserting a fact that was previously
    inferred upgrades it to asserted so it survives re-saturation.
    """

    __slots__ = ("_facts", "_by_pred")

    def __init__(self) -> None:
        self._facts: dict[tuple, Fact] = {}
        self._by_pred: dict[str, list[Fact]] = {}

    @classmethod
    def from_facts(cls, facts: Iterable[Fact]) -> "WorkingMemory":
        wm = cls()
        for f in facts:
            wm._add(f)
        return wm

    def _clone(self) -> "WorkingMemory":
        wm = WorkingMemory()
        wm._facts = dict(self._facts)
        wm._by_pred = {p: list(l) for p, l in self._by_pred.items()}
        return wm

    def _add(self, f: Fact) -> bool:
        for a in f.args:
            if isinstance(a, Var):
                raise MalformedFactError(f"fact {f.predicate} contains variable ?{a.name}")
        k = f.key()
        existing = self._facts.get(k)
        if existing is not None:
            if existing.provenance == INFERRED and f.provenance == ASSERTED:
                self._facts[k] = f
                lst = self._by_pred[f.predicate]
                lst[lst.index(existing)] = f
            return False
        self._facts[k] = f
        lst = self._by_pred.setdefault(f.predicate, [])
        bisect.insort(lst, f, key=lambda x: _args_key(x.args))
        return True

    def _remove(self, f: Fact) -> bool:
        k = f.key()
        existing = self._facts.pop(k, None)
        if existing is None:
            return False
        lst = self._by_pred[f.predicate]
        lst.remove(existing)
        if not lst:
            del self._by_pred[f.predicate]
        return True

    def assert_fact(self, f: Fact) -> "WorkingMemory":
        wm = self._clone()
        wm._add(f)
        return wm

    def retract_fact(self, f: Fact) -> "WorkingMemory":
        if f.key() not in self._facts:
            return self
        wm = self._clone()
        wm._remove(f)
        return wm

    def has(self, f: Fact) -> bool:
        return f.key() in self._facts

    def facts_for(self, predicate: str) -> list[Fact]:
        return self._by_pred.get(predicate, [])

    def facts(self) -> list[Fact]:
        """All facts in deterministic (predicate, args) order."""
        out = []
        for pred in sorted(self._by_pred):
            out.extend(self._by_pred[pred])
        return out

    def without_inferred(self) -> "WorkingMemory":
        return WorkingMemory.from_facts(f for f in self._facts.values() if f.provenance == ASSERTED)

    def __len__(self) -> int:
        return len(self._facts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorkingMemory):
            return NotImplemented
        if self._facts.keys() != other._facts.keys():
            return False
        return all(other._facts[k].provenance == f.provenance for k, f in self._facts.items())

    def __repr__(self) -> str:
        return f"WorkingMemory({len(self._facts)} facts)"


def unify_args(pattern_args: tuple[Term, ...], values: tuple[Value, ...], binding: Binding) -> Optional[Binding]:
    """Extend binding so the pattern args equal the values, or None."""
    if len(pattern_args) != len(values):
        return None
    out = binding
    copied = False
    for p, v in zip(pattern_args, values):
        if isinstance(p, Var):
            bound = out.get(p.name)
            if bound is None:
                if not copied:
                    out = dict(out)
                    copied = True
                out[p.name] = v
            elif bound != v:
                return None
        elif p != v:
            return None
    return out


def substitute(term: Term, binding: Binding) -> Term:
    if isinstance(term, Var):
        return binding.get(term.name, term)
    return term


def ground_pattern(pattern: Pattern, binding: Binding) -> Fact:
    args = []
    for t in pattern.args:
        t = substitute(t, binding)
        if isinstance(t, Var):
            raise MalformedFactError(f"unbound ?{t.name} when grounding {pattern.predicate}")
        args.append(t)
    return Fact(pattern.predicate, tuple(args))


def compare_values(op: str, a: Value, b: Value) -> bool:
    """Comparison semantics for tests. Equality is structural across any
    kinds; order comparisons hold only within a comparable kind and are
    false otherwise."""
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if is_numeric(a) and is_numeric(b):
        x, y = as_fraction(a), as_fraction(b)
    elif isinstance(a, Sym) and isinstance(b, Sym):
        x, y = a.name, b.name
    elif isinstance(a, Text) and isinstance(b, Text):
        x, y = a.value, b.value
    elif isinstance(a, Bool) and isinstance(b, Bool):
        x, y = a.value, b.value
    else:
        return False
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    if op == ">=":
        return x >= y
    raise ValueError(f"unknown comparison operator {op!r}")


def check_safety(conditions: list, initially_bound: set[str] | None = None) -> None:
    """Enforce the condition-list safety rule: every variable in a negated
    or test condition must be bound by an earlier positive condition (or be
    in initially_bound, e.g. head parameters). Raised at domain-load time."""
    bound: set[str] = set(initially_bound or ())
    for c in conditions:
        if isinstance(c, Positive):
            bound |= c.pattern.variables()
        elif isinstance(c, Negated):
            free = c.pattern.variables() - bound
            if free:
                names = ", ".join(sorted(f"?{v}" for v in free))
                raise SafetyError(f"negated {c.pattern.predicate} uses unbound {names}")
        elif isinstance(c, Test):
            free = {t.name for t in (c.left, c.right) if isinstance(t, Var)} - bound
            if free:
                names = ", ".join(sorted(f"?{v}" for v in free))
                raise SafetyError(f"test uses unbound {names}")
        else:
            raise TypeError(f"not a condition: {c!r}")


def match(wm: WorkingMemory, conditions: list, seed: Optional[Binding] = None) -> Iterator[Binding]:
    """Yield every binding extending seed that satisfies all conditions.

    Enumeration is deterministic: positive conditions scan candidate facts
    in (predicate, args) sort order. With an empty condition list, yields
    exactly the seed.
    """
    if seed is None:
        seed = {}

    def rec(i: int, binding: Binding) -> Iterator[Binding]:
        if i == len(conditions):
            yield binding
            return
        c = conditions[i]
        if isinstance(c, Positive):
            for f in wm.facts_for(c.pattern.predicate):
                b2 = unify_args(c.pattern.args, f.args, binding)
                if b2 is not None:
                    yield from rec(i + 1, b2)
        elif isinstance(c, Negated):
            found = False
            for f in wm.facts_for(c.pattern.predicate):
                if unify_args(c.pattern.args, f.args, binding) is not None:
                    found = True
                    break
            if not found:
                yield from rec(i + 1, binding)
        elif isinstance(c, Test):
            left = substitute(c.left, binding)
            right = substitute(c.right, binding)
            if isinstance(left, Var) or isinstance(right, Var):
                raise SafetyError("test evaluated with unbound variable (unsafe condition list)")
            if compare_values(c.op, left, right):
                yield from rec(i + 1, binding)
        else:
            raise TypeError(f"not a condition: {c!r}")

    yield from rec(0, dict(seed))


def saturate(wm: WorkingMemory, axioms: list, fact_ceiling: int = 100_000) -> WorkingMemory:
    """Forward-chain the axioms to their least fixpoint.

    Inferred facts are added with inferred provenance and may feed later
    rounds. Monotone and independent of axiom order; raises if the fact
    count would exceed the ceiling.
    """
    if not axioms:
        return wm
    current = wm._clone()
    changed = True
    while changed:
        changed = False
        for ax in axioms:
            for binding in match(current, ax.preconditions):
                head = ground_pattern(ax.head, binding)
                if not current.has(head):
                    if len(current) >= fact_ceiling:
                        raise SaturationOverflowError(
                            f"saturation exceeded {fact_ceiling} facts (last head: {head.predicate})"
                        )
                    current._add(Fact(head.predicate, head.args, provenance=INFERRED))
                    changed = True
    return current
