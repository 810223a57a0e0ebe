"""Random valid domains for round-trip property tests.

Records are generated already in canonical (sorted) order so that
parse(serialize(d)) must reproduce d exactly.
"""

from __future__ import annotations

import random

from htntutor.domain import (
    ActionTemplate,
    Axiom,
    Bin,
    Call,
    CALL_ARITY,
    Domain,
    Lit,
    Method,
    Operator,
    Ref,
    TaskHead,
    Unary,
)
from htntutor.facts import Negated, Pattern, Positive, Test
from htntutor.values import Bool, Int, Sym, Text, Var, make_ratio

_OPS = ["=", "!=", "<", "<=", ">", ">="]


def _value(rng: random.Random):
    k = rng.randrange(5)
    if k == 0:
        return Int(rng.randint(-9, 99))
    if k == 1:
        return Sym(f"c{rng.randrange(5)}")
    if k == 2:
        return Text(rng.choice(["alpha", "two words", "x y z"]))
    if k == 3:
        return Bool(rng.random() < 0.5)
    return make_ratio(rng.choice([1, 2, 3, 5, 7]), rng.choice([2, 3, 4, 6]))


def _term(rng: random.Random, bound: list[str]):
    if bound and rng.random() < 0.5:
        return Var(rng.choice(bound))
    return _value(rng)


def _pattern(rng: random.Random, bound: list[str], may_bind: bool) -> Pattern:
    args = []
    for _ in range(rng.randrange(0, 3)):
        if may_bind and rng.random() < 0.4:
            name = f"w{len(bound)}"
            bound.append(name)
            args.append(Var(name))
        else:
            args.append(_term(rng, bound))
    return Pattern(f"p{rng.randrange(6)}", tuple(args))


def _conditions(rng: random.Random, head_vars: list[str]) -> tuple:
    bound = list(head_vars)
    conds = [Positive(_pattern(rng, bound, may_bind=True)) for _ in range(rng.randrange(1, 3))]
    if bound and rng.random() < 0.5:
        conds.append(Test(rng.choice(_OPS), Var(rng.choice(bound)), _value(rng)))
    if rng.random() < 0.4:
        conds.append(Negated(_pattern(rng, bound, may_bind=False)))
    return tuple(conds)


def _expr(rng: random.Random, bound: list[str], depth: int = 0):
    if depth >= 2 or rng.random() < 0.4:
        k = rng.randrange(3) if not bound else rng.randrange(4)
        if k == 0:
            return Lit(Int(rng.randint(-9, 99)))
        if k == 1:
            return Lit(Sym(f"c{rng.randrange(5)}"))
        if k == 2:
            return Lit(Bool(True)) if rng.random() < 0.5 else Lit(Text("note"))
        return Ref(rng.choice(bound))
    k = rng.randrange(3)
    if k == 0:
        return Bin(rng.choice(["+", "-", "*", "/"]), _expr(rng, bound, depth + 1), _expr(rng, bound, depth + 1))
    if k == 1 and bound:
        return Unary("-", Ref(rng.choice(bound)))
    fn = rng.choice(sorted(CALL_ARITY))
    return Call(fn, tuple(_expr(rng, bound, depth + 1) for _ in range(CALL_ARITY[fn])))


def random_domain(rng: random.Random) -> Domain:
    n_skills = rng.randrange(0, 4)
    skills = {f"s{i:02d}": f"Skill number {i}" for i in range(n_skills)}
    skill_pool = [None, *skills.keys()]

    n_methods = rng.randrange(1, 4)
    n_operators = rng.randrange(1, 4)
    method_tasks = [f"mt{i:02d}" for i in range(n_methods)]
    operator_tasks = [f"ot{i:02d}" for i in range(n_operators)]
    task_pool = method_tasks + operator_tasks

    methods = []
    for i, task in enumerate(method_tasks):
        head_vars = [f"v{j}" for j in range(rng.randrange(0, 3))]
        head = TaskHead(task, tuple(Var(v) for v in head_vars))
        pre = _conditions(rng, head_vars) if rng.random() < 0.8 else ()
        bound = list(head_vars)
        for c in pre:
            if isinstance(c, Positive):
                bound.extend(v for v in c.pattern.variables() if v not in bound)
        subtasks = tuple(
            TaskHead(rng.choice(task_pool), tuple(_term(rng, bound) for _ in range(rng.randrange(0, 2))))
            for _ in range(rng.randrange(1, 4))
        )
        ordering = "unordered" if rng.random() < 0.3 else "sequential"
        methods.append(Method(f"m{i:02d}", head, pre, subtasks, ordering, rng.choice(skill_pool)))

    operators = []
    for i, task in enumerate(operator_tasks):
        head_vars = [f"v{j}" for j in range(rng.randrange(0, 3))]
        head = TaskHead(task, tuple(Var(v) for v in head_vars))
        pre = _conditions(rng, head_vars) if rng.random() < 0.8 else ()
        bound = list(head_vars)
        for c in pre:
            if isinstance(c, Positive):
                bound.extend(v for v in c.pattern.variables() if v not in bound)
        action_field = Var(rng.choice(bound)) if bound and rng.random() < 0.3 else Sym(f"fld{i}")
        adds = tuple(_pattern(rng, bound, may_bind=False) for _ in range(rng.randrange(0, 2)))
        dels = tuple(_pattern(rng, bound, may_bind=False) for _ in range(rng.randrange(0, 2)))
        operators.append(Operator(f"o{i:02d}", head, pre,
                                  ActionTemplate(action_field, _expr(rng, bound)),
                                  adds, dels, rng.choice(skill_pool)))

    axioms = []
    for i in range(rng.randrange(0, 3)):
        bound: list[str] = []
        body = [Positive(_pattern(rng, bound, may_bind=True)) for _ in range(rng.randrange(1, 3))]
        if bound and rng.random() < 0.4:
            body.append(Test(rng.choice(_OPS), Var(rng.choice(bound)), _value(rng)))
        head_args = tuple(Var(v) for v in bound[: rng.randrange(0, len(bound) + 1)])
        axioms.append(Axiom(Pattern(f"axp{i:02d}", head_args), tuple(body)))

    root = TaskHead(method_tasks[0], methods[0].head.params)
    return Domain(f"d{rng.randrange(1000)}", skills, tuple(methods), tuple(operators), tuple(axioms), root)
