"""Reachability and binding diagnostics for loaded domains.

A domain that parses cleanly and produces zero error diagnostics will not
raise safety or head-resolution errors while tracing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import Domain, Method, Operator, expr_variables
from .facts import Positive
from .values import Var

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}[{self.code}]: {self.message}"


def _positive_vars(preconditions: tuple) -> set[str]:
    out: set[str] = set()
    for c in preconditions:
        if isinstance(c, Positive):
            out |= c.pattern.variables()
    return out


def validate_domain(d: Domain) -> list[Diagnostic]:
    """Return all diagnostics, errors first, in a deterministic order."""
    diags: list[Diagnostic] = []

    # every task named anywhere must have an achieving method or operator
    wanted: dict[str, str] = {d.root_schema.name: "root"}
    for m in d.methods:
        for st in m.subtasks:
            wanted.setdefault(st.name, f"method {m.name}")
    for task in sorted(wanted):
        if not d.has_task(task):
            diags.append(Diagnostic(ERROR, "unachievable-task",
                                    f"task {task} (used by {wanted[task]}) has no method or operator"))

    # records whose head never appears as the root or as a subtask
    referenced = {d.root_schema.name}
    for m in d.methods:
        referenced.update(st.name for st in m.subtasks)
    for rec in [*d.methods, *d.operators]:
        if rec.head.name not in referenced:
            kind = "method" if isinstance(rec, Method) else "operator"
            diags.append(Diagnostic(WARNING, "unreachable",
                                    f"{kind} {rec.name} achieves {rec.head.name}, which is never required"))

    # variables used by subtasks, actions, and effects must be bound
    for m in d.methods:
        bound = m.head.variables() | _positive_vars(m.preconditions)
        used: set[str] = set()
        for st in m.subtasks:
            used |= st.variables()
        free = used - bound
        if free:
            names = ", ".join(sorted("?" + v for v in free))
            diags.append(Diagnostic(ERROR, "unbound-variable",
                                    f"method {m.name} subtasks use unbound {names}"))
    for o in d.operators:
        bound = o.head.variables() | _positive_vars(o.preconditions)
        used = expr_variables(o.action.value_expr)
        if isinstance(o.action.field, Var):
            used = used | {o.action.field.name}
        for pat in [*o.add_effects, *o.del_effects]:
            used |= pat.variables()
        free = used - bound
        if free:
            names = ", ".join(sorted("?" + v for v in free))
            diags.append(Diagnostic(ERROR, "unbound-variable",
                                    f"operator {o.name} uses unbound {names}"))

    # skills declared but never attached to a method or operator
    used_skills = {rec.skill for rec in [*d.methods, *d.operators] if rec.skill}
    for skill in sorted(set(d.skills) - used_skills):
        diags.append(Diagnostic(WARNING, "unused-skill", f"skill {skill} is declared but never referenced"))

    diags.sort(key=lambda g: (g.severity != ERROR, g.code, g.message))
    return diags


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(g.severity == ERROR for g in diags)
