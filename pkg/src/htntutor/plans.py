"""Exhaustive enumeration of complete action sequences for a problem.

This is written independently of the tracing frontier, as a small-step
recursion over a nested agenda, so the two implementations can check each
other: a sequence of actions is accepted step-by-step by the tracer iff it
is a prefix of a sequence enumerated here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .domain import Domain, TaskHead, eval_expression
from .errors import DomainAuthoringError, ExpressionError
from .facts import Fact, WorkingMemory, ground_pattern, match, saturate, substitute, unify_args
from .values import Sym, Value, Var, format_value

_DEPTH_CEILING = 64


@dataclass(frozen=True)
class PlanStep:
    field: str
    value: Value
    operator_name: str
    skill: Optional[str]


@dataclass(frozen=True)
class PlanEnumeration:
    sequences: tuple[tuple[PlanStep, ...], ...]
    truncated: bool

    def action_sequences(self) -> list[list[tuple[str, Value]]]:
        return [[(s.field, s.value) for s in seq] for seq in self.sequences]


# agenda items: ("task", TaskHead, depth) | ("seq", items) | ("any", items)
_Agenda = Union[tuple, None]


def _options(domain: Domain, wm: WorkingMemory, item: tuple) -> Iterator[tuple[PlanStep, WorkingMemory, _Agenda]]:
    kind = item[0]
    if kind == "task":
        _, task, depth = item
        if depth > _DEPTH_CEILING:
            raise DomainAuthoringError(f"decomposition deeper than {_DEPTH_CEILING}", (repr(task),))
        for op in domain.operators_for(task.name):
            head_binding = unify_args(op.head.params, task.params, {})
            if head_binding is None:
                continue
            for binding in match(wm, list(op.preconditions), head_binding):
                field_term = substitute(op.action.field, binding)
                if isinstance(field_term, Var):
                    raise DomainAuthoringError(f"operator {op.name} leaves its field unbound")
                field_id = format_value(field_term)
                try:
                    value = eval_expression(op.action.value_expr, binding)
                except ExpressionError as e:
                    raise DomainAuthoringError(f"operator {op.name}: {e}") from e
                core = wm.without_inferred()
                for pat in op.del_effects:
                    core = core.retract_fact(ground_pattern(pat, binding))
                for pat in op.add_effects:
                    core = core.assert_fact(ground_pattern(pat, binding))
                core = core.assert_fact(Fact("field", (Sym(field_id), value)))
                new_wm = saturate(core, list(domain.axioms))
                yield PlanStep(field_id, value, op.name, op.skill), new_wm, None
        for m in domain.methods_for(task.name):
            head_binding = unify_args(m.head.params, task.params, {})
            if head_binding is None:
                continue
            for binding in match(wm, list(m.preconditions), head_binding):
                subitems = tuple(("task", st.substituted(binding), depth + 1) for st in m.subtasks)
                expanded = ("any" if m.ordering == "unordered" else "seq", subitems)
                yield from _options(domain, wm, expanded)
    elif kind == "seq":
        items = item[1]
        for step, new_wm, rest in _options(domain, wm, items[0]):
            remaining = ((rest,) if rest is not None else ()) + items[1:]
            yield step, new_wm, ("seq", remaining) if remaining else None
    elif kind == "any":
        items = item[1]
        for i, sub in enumerate(items):
            for step, new_wm, rest in _options(domain, wm, sub):
                remaining = items[:i] + ((rest,) if rest is not None else ()) + items[i + 1:]
                yield step, new_wm, ("any", remaining) if remaining else None
    else:
        raise ValueError(f"unknown agenda item {kind!r}")


def enumerate_plans(domain: Domain, root: TaskHead, initial_facts: list[Fact],
                    limit: int = 1000) -> PlanEnumeration:
    """Depth-first enumeration of every complete leaf-action sequence: all
    method choices, all precondition bindings, and all admissible
    interleavings of unordered siblings. Stops at ``limit`` sequences and
    reports truncation."""
    if limit < 1:
        raise ValueError("limit must be at least 1")
    wm = saturate(WorkingMemory.from_facts(initial_facts), list(domain.axioms))
    sequences: list[tuple[PlanStep, ...]] = []
    truncated = False

    def rec(wm: WorkingMemory, agenda: _Agenda, acc: list[PlanStep]) -> None:
        nonlocal truncated
        if truncated:
            return
        if agenda is None:
            if len(sequences) >= limit:
                truncated = True
            else:
                sequences.append(tuple(acc))
            return
        for step, new_wm, rest in _options(domain, wm, agenda):
            acc.append(step)
            rec(new_wm, rest, acc)
            acc.pop()
            if truncated:
                return

    rec(wm, ("task", root, 0), [])
    return PlanEnumeration(tuple(sequences), truncated)
