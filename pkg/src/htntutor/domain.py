"""Domain representation: tasks, operators, methods, axioms, and the
expression language used by operator actions.

A domain is immutable after load and freely shareable. A task name is
either compound (achieved by methods) or primitive (achieved by operators),
never both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import ExpressionError
from .facts import Binding, Pattern, substitute
from .values import Int, Term, Text, Value, Var, as_fraction, format_value, from_fraction, is_numeric, make_ratio

SEQUENTIAL = "sequential"
UNORDERED = "unordered"


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-"
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # gcd lcm intLog frac num den fracText
    args: tuple["Expr", ...]


Expr = Union[Lit, Ref, Unary, Bin, Call]

CALL_ARITY = {"gcd": 2, "lcm": 2, "intLog": 2, "frac": 2, "num": 1, "den": 1, "fracText": 1}


def expr_variables(e: Expr) -> set[str]:
    if isinstance(e, Lit):
        return set()
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, Unary):
        return expr_variables(e.operand)
    if isinstance(e, Bin):
        return expr_variables(e.left) | expr_variables(e.right)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= expr_variables(a)
        return out
    raise TypeError(f"not an expression: {e!r}")


def _numeric(v: Value, ctx: str) -> Fraction:
    if not is_numeric(v):
        raise ExpressionError(f"{ctx} needs a numeric operand, got {v!r}")
    return as_fraction(v)


def _int(v: Value, ctx: str) -> int:
    if not isinstance(v, Int):
        raise ExpressionError(f"{ctx} needs an integer operand, got {v!r}")
    return v.value


def eval_expression(e: Expr, binding: Binding) -> Value:
    """Evaluate to a ground value under the binding. Exact arithmetic:
    results that reduce to whole numbers come back as Int."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Ref):
        v = binding.get(e.name)
        if v is None:
            raise ExpressionError(f"unbound variable ?{e.name}")
        return v
    if isinstance(e, Unary):
        return from_fraction(-_numeric(eval_expression(e.operand, binding), "negation"))
    if isinstance(e, Bin):
        left = _numeric(eval_expression(e.left, binding), f"'{e.op}'")
        right = _numeric(eval_expression(e.right, binding), f"'{e.op}'")
        if e.op == "+":
            return from_fraction(left + right)
        if e.op == "-":
            return from_fraction(left - right)
        if e.op == "*":
            return from_fraction(left * right)
        if e.op == "/":
            if right == 0:
                raise ExpressionError("division by zero")
            return from_fraction(left / right)
        raise ExpressionError(f"unknown operator {e.op!r}")
    if isinstance(e, Call):
        args = [eval_expression(a, binding) for a in e.args]
        return _eval_call(e.fn, args)
    raise TypeError(f"not an expression: {e!r}")


def _eval_call(fn: str, args: list[Value]) -> Value:
    if fn == "gcd":
        return Int(math.gcd(_int(args[0], "gcd"), _int(args[1], "gcd")))
    if fn == "lcm":
        return Int(math.lcm(_int(args[0], "lcm"), _int(args[1], "lcm")))
    if fn == "intLog":
        base = _int(args[0], "intLog")
        n = _int(args[1], "intLog")
        if base < 2 or n < 1:
            raise ExpressionError(f"intLog({base}, {n}) is out of domain")
        power, k = 1, 0
        while power < n:
            power *= base
            k += 1
        if power != n:
            raise ExpressionError(f"intLog({base}, {n}) is out of domain: {n} is not a power of {base}")
        return Int(k)
    if fn == "frac":
        den = _int(args[1], "frac")
        if den == 0:
            raise ExpressionError("frac with zero denominator")
        return make_ratio(_int(args[0], "frac"), den)
    if fn == "num":
        f = _numeric(args[0], "num")
        return Int(f.numerator)
    if fn == "den":
        f = _numeric(args[0], "den")
        return Int(f.denominator)
    if fn == "fracText":
        _numeric(args[0], "fracText")
        return Text(format_value(args[0]))
    raise ExpressionError(f"unknown function {fn!r}")


# --- task network records --------------------------------------------------

@dataclass(frozen=True)
class TaskHead:
    name: str
    params: tuple[Term, ...] = ()

    def variables(self) -> set[str]:
        return {t.name for t in self.params if isinstance(t, Var)}

    def is_ground(self) -> bool:
        return not any(isinstance(t, Var) for t in self.params)

    def substituted(self, binding: Binding) -> "TaskHead":
        return TaskHead(self.name, tuple(substitute(t, binding) for t in self.params))

    def __repr__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(repr(p) for p in self.params)})"


@dataclass(frozen=True)
class ActionTemplate:
    field: Term
    value_expr: Expr


@dataclass(frozen=True)
class Operator:
    name: str
    head: TaskHead
    preconditions: tuple
    action: ActionTemplate
    add_effects: tuple[Pattern, ...] = ()
    del_effects: tuple[Pattern, ...] = ()
    skill: Optional[str] = None


@dataclass(frozen=True)
class Method:
    name: str
    head: TaskHead
    preconditions: tuple
    subtasks: tuple[TaskHead, ...]
    ordering: str = SEQUENTIAL
    skill: Optional[str] = None


@dataclass(frozen=True)
class Axiom:
    head: Pattern
    preconditions: tuple


@dataclass
class Domain:
    name: str
    skills: dict[str, str]  # symbol -> display name
    methods: tuple[Method, ...]
    operators: tuple[Operator, ...]
    axioms: tuple[Axiom, ...]
    root_schema: TaskHead
    _methods_by_head: dict[str, list[Method]] = field(init=False, repr=False, compare=False)
    _operators_by_head: dict[str, list[Operator]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_m: dict[str, list[Method]] = {}
        for m in self.methods:
            by_m.setdefault(m.head.name, []).append(m)
        by_o: dict[str, list[Operator]] = {}
        for o in self.operators:
            by_o.setdefault(o.head.name, []).append(o)
        self._methods_by_head = by_m
        self._operators_by_head = by_o

    def methods_for(self, task_name: str) -> list[Method]:
        return self._methods_by_head.get(task_name, [])

    def operators_for(self, task_name: str) -> list[Operator]:
        return self._operators_by_head.get(task_name, [])

    def is_primitive(self, task_name: str) -> bool:
        return task_name in self._operators_by_head

    def has_task(self, task_name: str) -> bool:
        return task_name in self._methods_by_head or task_name in self._operators_by_head
