"""Adaptive scaffolding: choosing how much of the decomposition becomes
visible input fields, plus fading schedules and manual expansion.

The planner walks the deterministic-first decomposition of the problem. At
each compound task it either expands into the subtask fields or collapses
the whole subtree into a single field whose expected value is the final
committed value of the subtree's simulated plan. Collapsed compound fields
are expandable; expanding one replaces it with a heading row (kept for the
greyed expansion control) followed by one level of child fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Iterator, Optional, Union

from .bkt import BAND_HIGH, BAND_LOW, BAND_MEDIUM, DEFAULT_THRESHOLDS, StudentModel, mastery_band
from .domain import Domain, Method, TaskHead, eval_expression
from .errors import ConfigError, ExpressionError, LayoutError, TraceCompletedError
from .facts import Fact, WorkingMemory, ground_pattern, match, saturate, substitute, unify_args
from .tracing import DEPTH_CEILING, IN_PROGRESS, Hint, TraceState, assert_session_fact
from .values import Sym, Text, Value, Var, format_value

STATE_EMPTY = "empty"
STATE_CORRECT = "correct"
STATE_INCORRECT = "incorrect"


class UnknownFieldError(LayoutError):
    pass


class NotExpandableError(LayoutError):
    pass


class AlreadyExpandedError(LayoutError):
    pass


# --- fading policies ---------------------------------------------------------

@dataclass(frozen=True)
class AdaptivePolicy:
    """Band-driven expansion: low-band skills get unlimited depth, medium
    one level, high none."""

    low_hi: float = DEFAULT_THRESHOLDS[0]
    high_lo: float = DEFAULT_THRESHOLDS[1]

    def thresholds(self) -> tuple[float, float]:
        return (self.low_hi, self.high_lo)


@dataclass(frozen=True)
class StaticPolicy:
    depth: int


@dataclass(frozen=True)
class UShapedPolicy:
    d_max: int
    d_min: int
    midpoint: float
    width: float


@dataclass(frozen=True)
class SigmoidPolicy:
    d_min: int
    d_max: int
    midpoint: float
    steepness: float


ScaffoldPolicy = Union[AdaptivePolicy, StaticPolicy, UShapedPolicy, SigmoidPolicy]

_BAND_DEPTH_BUDGET = {BAND_LOW: DEPTH_CEILING, BAND_MEDIUM: 1, BAND_HIGH: 0}


def validate_policy(p: ScaffoldPolicy) -> ScaffoldPolicy:
    if isinstance(p, AdaptivePolicy):
        if not 0.0 < p.low_hi < p.high_lo < 1.0:
            raise ConfigError(f"bad adaptive thresholds ({p.low_hi}, {p.high_lo})")
    elif isinstance(p, StaticPolicy):
        if p.depth < 0:
            raise ConfigError("static depth must be >= 0")
    elif isinstance(p, (UShapedPolicy, SigmoidPolicy)):
        if p.d_min < 0 or p.d_max < p.d_min:
            raise ConfigError("schedule needs 0 <= d_min <= d_max")
        if isinstance(p, UShapedPolicy) and p.width <= 0:
            raise ConfigError("u_shaped width must be positive")
    else:
        raise ConfigError(f"unknown policy {p!r}")
    return p


def policy_from_config(cfg: dict) -> ScaffoldPolicy:
    kind = cfg.get("kind")
    if kind == "adaptive":
        return validate_policy(AdaptivePolicy(
            float(cfg.get("low", DEFAULT_THRESHOLDS[0])), float(cfg.get("high", DEFAULT_THRESHOLDS[1]))))
    if kind == "static":
        return validate_policy(StaticPolicy(int(cfg["depth"])))
    if kind == "u_shaped":
        return validate_policy(UShapedPolicy(
            int(cfg["d_max"]), int(cfg["d_min"]), float(cfg["midpoint"]), float(cfg["width"])))
    if kind == "sigmoid":
        return validate_policy(SigmoidPolicy(
            int(cfg["d_min"]), int(cfg["d_max"]), float(cfg["midpoint"]), float(cfg["steepness"])))
    raise ConfigError(f"unknown policy kind {kind!r}")


def _half_up(x: float) -> int:
    return math.floor(x + 0.5)


def schedule_depth(policy: ScaffoldPolicy, opportunities: int) -> int:
    """Target scaffold depth for a schedule policy at the given opportunity
    count. Depth starts at d_max, reaches d_min at the u-shape midpoint, and
    returns; the sigmoid fades monotonically from d_max toward d_min."""
    n = opportunities
    if isinstance(policy, StaticPolicy):
        return policy.depth
    if isinstance(policy, UShapedPolicy):
        frac = min(1.0, max(0.0, abs(n - policy.midpoint) / policy.width))
        return policy.d_min + _half_up((policy.d_max - policy.d_min) * frac)
    if isinstance(policy, SigmoidPolicy):
        rising = policy.d_min + _half_up(
            (policy.d_max - policy.d_min) / (1.0 + math.exp(-policy.steepness * (n - policy.midpoint))))
        return policy.d_max - rising + policy.d_min
    raise ValueError("schedule_depth applies to static, u_shaped, and sigmoid policies only")


# --- deterministic-first simulation -----------------------------------------

@dataclass(frozen=True)
class SimStep:
    field_id: str
    value: Value
    skill: Optional[str]
    operator_name: str


@dataclass(frozen=True)
class _SimLeaf:
    task: TaskHead
    step: SimStep


@dataclass(frozen=True)
class _SimGroup:
    task: TaskHead
    method: Method
    children: tuple


_SimNode = Union[_SimLeaf, _SimGroup]


def _build_options(domain: Domain, wm: WorkingMemory, task: TaskHead,
                   depth: int) -> Iterator[tuple[_SimNode, WorkingMemory]]:
    if depth > DEPTH_CEILING:
        raise LayoutError(f"simulation deeper than {DEPTH_CEILING} at {task!r}")
    for op in domain.operators_for(task.name):
        head_binding = unify_args(op.head.params, task.params, {})
        if head_binding is None:
            continue
        for binding in match(wm, list(op.preconditions), head_binding):
            field_term = substitute(op.action.field, binding)
            if isinstance(field_term, Var):
                raise LayoutError(f"operator {op.name} leaves its field unbound at {task!r}")
            try:
                value = eval_expression(op.action.value_expr, binding)
            except ExpressionError as e:
                raise LayoutError(f"simulating {task!r}: {e}") from e
            field_id = format_value(field_term)
            core = wm.without_inferred()
            for pat in op.del_effects:
                core = core.retract_fact(ground_pattern(pat, binding))
            for pat in op.add_effects:
                core = core.assert_fact(ground_pattern(pat, binding))
            core = core.assert_fact(Fact("field", (Sym(field_id), value)))
            yield _SimLeaf(task, SimStep(field_id, value, op.skill, op.name)), saturate(core, list(domain.axioms))
    for m in domain.methods_for(task.name):
        head_binding = unify_args(m.head.params, task.params, {})
        if head_binding is None:
            continue
        for binding in match(wm, list(m.preconditions), head_binding):
            subtasks = [st.substituted(binding) for st in m.subtasks]

            def rec(i: int, wm_cur: WorkingMemory, acc: tuple) -> Iterator[tuple[_SimNode, WorkingMemory]]:
                if i == len(subtasks):
                    yield _SimGroup(task, m, acc), wm_cur
                    return
                for child, wm_next in _build_options(domain, wm_cur, subtasks[i], depth + 1):
                    yield from rec(i + 1, wm_next, acc + (child,))

            yield from rec(0, wm, ())


def _build_sim(domain: Domain, wm: WorkingMemory, root: TaskHead) -> _SimNode:
    """First completable decomposition in deterministic order; unordered
    subtasks are linearized in declaration order."""
    for node, _ in _build_options(domain, wm, root, 0):
        return node
    raise LayoutError(f"no decomposition of {root!r} can be simulated")


def _sim_leaves(node: _SimNode) -> list[SimStep]:
    if isinstance(node, _SimLeaf):
        return [node.step]
    out: list[SimStep] = []
    for c in node.children:
        out.extend(_sim_leaves(c))
    return out


def _governing_skill(node: _SimNode) -> Optional[str]:
    """A group's method skill, else the skill of its deepest operator
    (earliest in traversal order on ties)."""
    if isinstance(node, _SimLeaf):
        return node.step.skill
    if node.method.skill:
        return node.method.skill
    best: tuple[int, int] | None = None
    best_skill: Optional[str] = None
    order = [0]

    def walk(n: _SimNode, depth: int) -> None:
        nonlocal best, best_skill
        if isinstance(n, _SimLeaf):
            order[0] += 1
            if n.step.skill is not None:
                rank = (depth, -order[0])
                if best is None or rank > best:
                    best = rank
                    best_skill = n.step.skill
            return
        for c in n.children:
            walk(c, depth + 1)

    walk(node, 0)
    return best_skill


# --- layout ------------------------------------------------------------------

@dataclass
class LayoutField:
    field_id: str
    label: str
    expected: Value
    skill: Optional[str]
    mastery_band: str
    expandable: bool
    expanded: bool
    state: str = STATE_EMPTY
    entered: Optional[Value] = None
    task: Optional[TaskHead] = None
    chain: tuple[SimStep, ...] = ()

    def is_input(self) -> bool:
        return not self.expanded


@dataclass(frozen=True)
class SkillSummary:
    skill: str
    display: str
    p_mastery: float
    band: str


@dataclass
class ProblemLayout:
    fields: list[LayoutField]
    statement: str
    skills: list[SkillSummary]
    policy: ScaffoldPolicy
    expanded_tasks: frozenset = frozenset()
    already_expanded_ids: frozenset = frozenset()
    skill_view: dict = dc_field(default_factory=dict)  # skill -> (band, opportunities)
    _domain: Optional[Domain] = None
    _wm0: Optional[WorkingMemory] = None
    _root: Optional[TaskHead] = None

    def input_fields(self) -> list[LayoutField]:
        return [f for f in self.fields if f.is_input()]

    def find_input(self, field_id: str) -> Optional[LayoutField]:
        for f in self.fields:
            if f.is_input() and f.field_id == field_id:
                return f
        return None


def _task_key(task: TaskHead) -> str:
    return repr(task)


def _statement_from(wm: WorkingMemory) -> str:
    for f in wm.facts_for("statement"):
        if f.args and isinstance(f.args[0], Text):
            return f.args[0].value
    return ""


def _should_expand(policy: ScaffoldPolicy, skill_view: dict, gov_skill: Optional[str], depth: int) -> bool:
    band, opportunities = skill_view.get(gov_skill, (BAND_LOW, 0))
    if isinstance(policy, AdaptivePolicy):
        return depth < _BAND_DEPTH_BUDGET[band]
    return depth < schedule_depth(policy, opportunities)


def _assemble(domain: Domain, wm0: WorkingMemory, root: TaskHead, policy: ScaffoldPolicy,
              skill_view: dict, expanded_tasks: frozenset, skills: list[SkillSummary],
              statement: str, already_expanded_ids: frozenset) -> ProblemLayout:
    sim = _build_sim(domain, wm0, root)
    fields: list[LayoutField] = []
    displays = dict(domain.skills)

    def label_for(skill: Optional[str], fallback: str) -> str:
        return displays.get(skill, fallback) if skill else fallback

    def band_of(skill: Optional[str]) -> str:
        return skill_view.get(skill, (BAND_LOW, 0))[0]

    def emit(node: _SimNode, depth: int) -> None:
        if isinstance(node, _SimLeaf):
            step = node.step
            fields.append(LayoutField(
                field_id=step.field_id,
                label=label_for(step.skill, step.field_id),
                expected=step.value,
                skill=step.skill,
                mastery_band=band_of(step.skill),
                expandable=False,
                expanded=False,
                task=node.task,
                chain=(step,),
            ))
            return
        gov = _governing_skill(node)
        key = _task_key(node.task)
        if key in expanded_tasks:
            chain = tuple(_sim_leaves(node))
            fields.append(LayoutField(
                field_id=f"expanded_{chain[-1].field_id}_{node.task.name}",
                label=label_for(gov, node.task.name),
                expected=chain[-1].value,
                skill=gov,
                mastery_band=band_of(gov),
                expandable=False,
                expanded=True,
                task=node.task,
                chain=(),
            ))
            for c in node.children:
                emit(c, depth + 1)
        elif _should_expand(policy, skill_view, gov, depth):
            for c in node.children:
                emit(c, depth + 1)
        else:
            chain = tuple(_sim_leaves(node))
            fields.append(LayoutField(
                field_id=chain[-1].field_id,
                label=label_for(gov, node.task.name),
                expected=chain[-1].value,
                skill=gov,
                mastery_band=band_of(gov),
                expandable=True,
                expanded=False,
                task=node.task,
                chain=chain,
            ))

    emit(sim, 0)
    seen: set[str] = set()
    for f in fields:
        if f.is_input():
            if f.field_id in seen:
                raise LayoutError(f"layout produced duplicate input field {f.field_id}")
            seen.add(f.field_id)
    return ProblemLayout(fields, statement, skills, policy, expanded_tasks,
                         already_expanded_ids, skill_view, domain, wm0, root)


def compute_layout(t: TraceState, m: StudentModel, policy: ScaffoldPolicy,
                   thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> ProblemLayout:
    """Build the visible-field layout for a freshly initialized trace.

    Raising every skill's mastery can only shrink the result: bands map to
    monotonically smaller depth budgets, so fields merge but never split.
    """
    if t.status != IN_PROGRESS:
        raise TraceCompletedError("compute_layout requires an in-progress trace")
    validate_policy(policy)
    band_thresholds = policy.thresholds() if isinstance(policy, AdaptivePolicy) else thresholds
    domain = t.domain
    skill_view = {
        s: (mastery_band(m.state_for(s), band_thresholds), m.state_for(s).opportunities)
        for s in domain.skills
    }
    skills = skill_summaries(domain, m, band_thresholds)
    wm0 = t.candidates[0].wm
    return _assemble(domain, wm0, t.root_task, policy, skill_view, frozenset(),
                     skills, _statement_from(wm0), frozenset())


def skill_summaries(domain: Domain, m: StudentModel,
                    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> list[SkillSummary]:
    return [
        SkillSummary(s, domain.skills[s], m.state_for(s).p_mastery, mastery_band(m.state_for(s), thresholds))
        for s in sorted(domain.skills)
    ]


def refresh_states(layout: ProblemLayout, t: TraceState) -> None:
    """Re-derive field completion from the trace history (used after a
    structural rebuild). Transient incorrect marks are not reconstructed."""
    done = {(e.action.field, e.action.value) for e in t.history}
    for f in layout.fields:
        if not f.is_input() or not f.chain:
            continue
        if all((s.field_id, s.value) in done for s in f.chain):
            f.state = STATE_CORRECT
            f.entered = f.expected
        else:
            f.state = STATE_EMPTY
            f.entered = None


def expand_field(layout: ProblemLayout, field_id: str, t: TraceState) -> tuple[ProblemLayout, TraceState]:
    """Manually expand a collapsed compound field by one decomposition
    level. The field becomes a non-input heading row followed by its
    children; a scaffoldExpanded fact is asserted so axioms can react.
    Expanding the same field twice is an error."""
    if field_id in layout.already_expanded_ids:
        raise AlreadyExpandedError(f"field {field_id} was already expanded")
    target = layout.find_input(field_id)
    if target is None:
        raise UnknownFieldError(f"no field {field_id} in the layout")
    if not target.expandable or target.task is None:
        raise NotExpandableError(f"field {field_id} has no scaffolding to expand")
    new_layout = _assemble(
        layout._domain, layout._wm0, layout._root, layout.policy, layout.skill_view,
        layout.expanded_tasks | {_task_key(target.task)},
        layout.skills, layout.statement,
        layout.already_expanded_ids | {field_id},
    )
    refresh_states(new_layout, t)
    new_trace = assert_session_fact(t, Fact("scaffoldExpanded", (Sym(target.task.name),)))
    return new_layout, new_trace


def project_hint(hint: Hint, layout: ProblemLayout) -> LayoutField:
    """Map a trace-level hint onto the layout: the input field whose
    committed chain contains the hinted action. For a collapsed field this
    is the field itself, whose expected value is the chain's final one."""
    for f in layout.fields:
        if not f.is_input() or f.state == STATE_CORRECT:
            continue
        if any(s.field_id == hint.field and s.value == hint.value for s in f.chain):
            return f
    raise LayoutError(f"hint for {hint.field} does not map to any open field")
