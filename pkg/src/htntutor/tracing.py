"""Model tracing over hierarchical task decompositions.

A trace keeps a frontier of candidate decompositions, each a consistent
selection of method choices whose matched leaves equal the observed action
history. An action is correct when at least one candidate can consume it as
its next admissible step; when none can, the action is incorrect and the
trace is left untouched. The frontier realizes backtracking declaratively:
alternatives are explored in parallel instead of being unwound on mismatch.

Each candidate owns its working memory. Accepted actions assert the fact
``field(<field>, <value>)``, apply the operator's declared effects to the
asserted core, and re-saturate the axioms, so inference can react to
progress mid-problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .domain import Domain, Method, Operator, TaskHead, eval_expression
from .errors import (
    DomainAuthoringError,
    ExpressionError,
    NoDecompositionError,
    TraceCompletedError,
)
from .facts import Fact, WorkingMemory, ground_pattern, match, saturate, substitute, unify_args
from .values import Sym, Value, Var, format_value

DEPTH_CEILING = 64
FRONTIER_CEILING = 10_000
_COMPLETION_NODE_BUDGET = 200_000

IN_PROGRESS = "in-progress"
COMPLETE = "complete"


# --- decomposition trees -----------------------------------------------------

@dataclass(frozen=True)
class TaskNode:
    """A pending task not yet committed to a decomposition."""

    task: TaskHead


@dataclass(frozen=True)
class LeafNode:
    """An operator leaf whose action the student has performed."""

    operator_name: str
    field_id: str
    value: Value
    skill: Optional[str]


@dataclass(frozen=True)
class AndNode:
    """A committed method application over ordered or unordered children."""

    method: Method
    children: tuple["Node", ...]


Node = Union[TaskNode, LeafNode, AndNode]


def node_complete(n: Node) -> bool:
    if isinstance(n, LeafNode):
        return True
    if isinstance(n, TaskNode):
        return False
    return all(node_complete(c) for c in n.children)


class TraceStats:
    """Counts how many times each record's applicability was evaluated.

    Keys are (domain name, "method" | "operator", record name). Excluded
    from trace equality; incorrect actions never touch it because no
    exploration happens on rejection.
    """

    def __init__(self) -> None:
        self.precondition_evals: dict[tuple[str, str, str], int] = {}

    def count(self, domain_name: str, kind: str, record_name: str) -> None:
        key = (domain_name, kind, record_name)
        self.precondition_evals[key] = self.precondition_evals.get(key, 0) + 1

    def domains_touched(self) -> set[str]:
        return {k[0] for k in self.precondition_evals}


@dataclass(frozen=True)
class _Step:
    """One admissible next action of a candidate, with its successor."""

    field_id: str
    value: Value
    skill: Optional[str]
    operator_name: str
    method_chain: tuple[str, ...]
    new_tree: Node
    new_wm: WorkingMemory
    completed_methods: tuple[Method, ...]  # deepest first, completed by this step


@dataclass(frozen=True)
class _Candidate:
    wm: WorkingMemory
    tree: Node
    steps: tuple[_Step, ...]


@dataclass(frozen=True)
class StudentAction:
    field: str
    value: Value
    seq: int = 0


@dataclass(frozen=True)
class Correct:
    skills: tuple[str, ...]
    strategy: tuple[str, ...]
    ambiguous: bool = False


@dataclass(frozen=True)
class Complete:
    skills: tuple[str, ...]
    strategy: tuple[str, ...]


@dataclass(frozen=True)
class Incorrect:
    expected: tuple[tuple[str, Value], ...]


TraceResult = Union[Correct, Complete, Incorrect]


@dataclass(frozen=True)
class Hint:
    field: str
    value: Value
    skill: Optional[str]
    strategy: tuple[str, ...]


@dataclass(frozen=True)
class HistoryEntry:
    action: StudentAction
    skills: tuple[str, ...]
    strategy: tuple[str, ...]


@dataclass(frozen=True)
class TraceState:
    domain: Domain
    root_task: TaskHead
    candidates: tuple[_Candidate, ...]
    history: tuple[HistoryEntry, ...]
    status: str
    stats: TraceStats = field(compare=False, repr=False, default_factory=TraceStats)


# --- exploration -------------------------------------------------------------

def _explore(domain: Domain, wm: WorkingMemory, node: Node, depth: int,
             chain: tuple[str, ...], stats: Optional[TraceStats]) -> list[_Step]:
    """All admissible next steps beneath this node, in deterministic order.

    Expansion forks at every method choice and every precondition binding;
    committed structure above the node is rebuilt by the caller.
    """
    if depth > DEPTH_CEILING:
        raise DomainAuthoringError(f"decomposition deeper than {DEPTH_CEILING}", chain)
    if isinstance(node, LeafNode):
        return []
    if isinstance(node, TaskNode):
        return _explore_task(domain, wm, node.task, depth, chain, stats)
    out: list[_Step] = []
    if node.method.ordering == "unordered":
        enabled = [i for i, c in enumerate(node.children) if not node_complete(c)]
    else:
        enabled = [next(i for i, c in enumerate(node.children) if not node_complete(c))]
    sub_chain = chain + (node.method.name,)
    for idx in enabled:
        for step in _explore(domain, wm, node.children[idx], depth + 1, sub_chain, stats):
            new_children = node.children[:idx] + (step.new_tree,) + node.children[idx + 1:]
            new_node = AndNode(node.method, new_children)
            completed = step.completed_methods
            if all(node_complete(c) for c in new_children):
                completed = completed + (node.method,)
            out.append(replace(step, new_tree=new_node, completed_methods=completed))
    return out


def _explore_task(domain: Domain, wm: WorkingMemory, task: TaskHead, depth: int,
                  chain: tuple[str, ...], stats: Optional[TraceStats]) -> list[_Step]:
    out: list[_Step] = []
    task_chain = chain + (repr(task),)
    for op in domain.operators_for(task.name):
        if stats is not None:
            stats.count(domain.name, "operator", op.name)
        head_binding = unify_args(op.head.params, task.params, {})
        if head_binding is None:
            continue
        for binding in match(wm, list(op.preconditions), head_binding):
            out.append(_ground_operator_step(domain, wm, op, binding, chain, task_chain))
    for m in domain.methods_for(task.name):
        if stats is not None:
            stats.count(domain.name, "method", m.name)
        head_binding = unify_args(m.head.params, task.params, {})
        if head_binding is None:
            continue
        for binding in match(wm, list(m.preconditions), head_binding):
            children = []
            for st in m.subtasks:
                ground = st.substituted(binding)
                if not ground.is_ground():
                    raise DomainAuthoringError(
                        f"method {m.name} leaves subtask {ground!r} unground", task_chain)
                children.append(TaskNode(ground))
            and_node = AndNode(m, tuple(children))
            out.extend(_explore(domain, wm, and_node, depth, chain, stats))
    return out


def _ground_operator_step(domain: Domain, wm: WorkingMemory, op: Operator, binding: dict,
                          chain: tuple[str, ...], task_chain: tuple[str, ...]) -> _Step:
    field_term = substitute(op.action.field, binding)
    if isinstance(field_term, Var):
        raise DomainAuthoringError(f"operator {op.name} leaves its field unbound", task_chain)
    field_id = format_value(field_term)
    try:
        value = eval_expression(op.action.value_expr, binding)
    except ExpressionError as e:
        raise DomainAuthoringError(f"operator {op.name}: {e}", task_chain) from e
    core = wm.without_inferred()
    for pat in op.del_effects:
        core = core.retract_fact(ground_pattern(pat, binding))
    for pat in op.add_effects:
        core = core.assert_fact(ground_pattern(pat, binding))
    core = core.assert_fact(Fact("field", (Sym(field_id), value)))
    new_wm = saturate(core, list(domain.axioms))
    leaf = LeafNode(op.name, field_id, value, op.skill)
    return _Step(field_id, value, op.skill, op.name, chain, leaf, new_wm, ())


def _has_completion(domain: Domain, wm: WorkingMemory, tree: Node, budget: list[int]) -> bool:
    """Whether some sequence of steps finishes this decomposition."""
    if node_complete(tree):
        return True
    budget[0] -= 1
    if budget[0] <= 0:
        raise DomainAuthoringError(f"completion search exceeded {_COMPLETION_NODE_BUDGET} nodes")
    for step in _explore(domain, wm, tree, 0, (), None):
        if _has_completion(domain, step.new_wm, step.new_tree, budget):
            return True
    return False


def _viable_steps(domain: Domain, wm: WorkingMemory, tree: Node, stats: Optional[TraceStats]) -> tuple[_Step, ...]:
    """Next steps that can still be extended to a finished decomposition."""
    steps = _explore(domain, wm, tree, 0, (), stats)
    kept = []
    for s in steps:
        budget = [_COMPLETION_NODE_BUDGET]
        if _has_completion(domain, s.new_wm, s.new_tree, budget):
            kept.append(s)
    return tuple(kept)


# --- public operations ---------------------------------------------------------

def init_trace(domain: Domain, root: TaskHead, initial_facts: list[Fact],
               stats: Optional[TraceStats] = None) -> TraceState:
    """Start tracing the given ground root task over the initial facts."""
    if not root.is_ground():
        raise NoDecompositionError(f"root task {root!r} is not ground")
    if root.name != domain.root_schema.name or unify_args(domain.root_schema.params, root.params, {}) is None:
        raise NoDecompositionError(
            f"root task {root!r} does not match the domain root {domain.root_schema!r}")
    stats = stats or TraceStats()
    wm = saturate(WorkingMemory.from_facts(initial_facts), list(domain.axioms))
    tree: Node = TaskNode(root)
    steps = _viable_steps(domain, wm, tree, stats)
    if not steps:
        raise NoDecompositionError(f"no decomposition of {root!r} is applicable under the initial facts")
    candidate = _Candidate(wm, tree, steps)
    return TraceState(domain, root, (candidate,), (), IN_PROGRESS, stats)


def expected_actions(t: TraceState) -> list[tuple[str, Value, Optional[str]]]:
    """Deduplicated (field, value, skill) triples the trace will accept next."""
    if t.status != IN_PROGRESS:
        raise TraceCompletedError("expected_actions requires an in-progress trace")
    seen: set[tuple] = set()
    out: list[tuple[str, Value, Optional[str]]] = []
    for cand in t.candidates:
        for s in cand.steps:
            key = (s.field_id, s.value, s.skill)
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def apply_action(t: TraceState, action: StudentAction) -> tuple[TraceState, TraceResult]:
    """Consume one student action.

    Returns the unchanged state with Incorrect when no candidate admits the
    action (including actions on unknown fields); otherwise the surviving
    candidates advance, effects and re-saturation apply, and skills are
    credited: the operator's own skill plus the skill of every method whose
    subtree this action finished.
    """
    if t.status != IN_PROGRESS:
        raise TraceCompletedError("apply_action requires an in-progress trace")
    matches: list[_Step] = []
    for cand in t.candidates:
        for s in cand.steps:
            if s.field_id == action.field and s.value == action.value:
                matches.append(s)
    if not matches:
        expected = tuple((f, v) for f, v, _ in expected_actions(t))
        return t, Incorrect(expected)

    survivors: list[_Candidate] = []
    complete_step: Optional[_Step] = None
    for s in matches:
        if node_complete(s.new_tree):
            survivors.append(_Candidate(s.new_wm, s.new_tree, ()))
            if complete_step is None:
                complete_step = s
        else:
            steps = _viable_steps(t.domain, s.new_wm, s.new_tree, t.stats)
            if steps:
                survivors.append(_Candidate(s.new_wm, s.new_tree, steps))
    if len(survivors) > FRONTIER_CEILING:
        raise DomainAuthoringError(f"frontier exceeded {FRONTIER_CEILING} candidates")
    if not survivors:
        # every successor is a dead end, so the action extends no full plan
        expected = tuple((f, v) for f, v, _ in expected_actions(t))
        return t, Incorrect(expected)

    reported = complete_step if complete_step is not None else matches[0]
    skills = tuple([reported.skill] if reported.skill else []) + tuple(
        m.skill for m in reported.completed_methods if m.skill)
    strategy = reported.method_chain
    ambiguous = len({s.method_chain for s in matches}) > 1
    entry = HistoryEntry(action, skills, strategy)
    status = COMPLETE if complete_step is not None else IN_PROGRESS
    new_state = TraceState(t.domain, t.root_task, tuple(survivors), t.history + (entry,), status, t.stats)
    if status == COMPLETE:
        return new_state, Complete(skills, strategy)
    return new_state, Correct(skills, strategy, ambiguous)


def next_hint(t: TraceState) -> Hint:
    """The first expected action under deterministic order, with the method
    chain that owns it."""
    if t.status != IN_PROGRESS:
        raise TraceCompletedError("next_hint requires an in-progress trace")
    first = t.candidates[0].steps[0]
    return Hint(first.field_id, first.value, first.skill, first.method_chain)


def assert_session_fact(t: TraceState, fact: Fact) -> TraceState:
    """Assert a tutor-level fact (e.g. a manual-expansion marker) into every
    candidate's memory and re-saturate, so axioms can react to it."""
    if t.status != IN_PROGRESS:
        return t
    new_candidates = []
    for cand in t.candidates:
        core = cand.wm.without_inferred().assert_fact(fact)
        wm = saturate(core, list(t.domain.axioms))
        steps = _viable_steps(t.domain, wm, cand.tree, t.stats)
        if steps or node_complete(cand.tree):
            new_candidates.append(_Candidate(wm, cand.tree, steps))
    if not new_candidates:
        raise DomainAuthoringError(f"asserting {fact!r} made every decomposition unviable")
    return TraceState(t.domain, t.root_task, tuple(new_candidates), t.history, t.status, t.stats)
