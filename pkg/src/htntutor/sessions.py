"""The tutoring loop as a session engine.

A session ties together one problem's trace, its layout, and the student's
mastery model. Every accepted command appends to the session's event log;
replaying a log from its creation snapshot reproduces the identical
session, which is also how sessions are recovered after a restart.

Entering a collapsed field replays its whole simulated chain through the
tracer transactionally: either every intermediate action is accepted and
credited, or nothing changes and the entry is incorrect.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .bkt import StudentModel, mastery_band
from .config import ServiceConfig
from .domain import Domain
from .errors import TutorError
from .facts import Fact
from .problems import DomainRegistry, ProblemSpec, generate_problem
from .scaffolding import (
    STATE_CORRECT,
    STATE_INCORRECT,
    ProblemLayout,
    compute_layout,
    expand_field,
    project_hint,
    skill_summaries,
)
from .tracing import Complete, Incorrect, StudentAction, TraceState, apply_action, init_trace, next_hint
from .values import Sym, Value, format_value, from_fraction, from_json, parse_entry, to_json

IN_PROGRESS = "in-progress"
COMPLETED = "complete"

INCORRECT_MESSAGE = "That is not the step the tutor expected here. Try again, or ask for a hint."


class SessionNotFound(TutorError):
    pass


class TurnConflict(TutorError):
    pass


class InvalidSessionState(TutorError):
    pass


class UnknownPolicy(TutorError):
    pass


@dataclass
class Feedback:
    kind: str  # correct | incorrect | complete
    message: str
    skills: tuple[str, ...] = ()
    strategy: tuple[str, ...] = ()


class Session:
    def __init__(self, session_id: str, student_id: str, domain: Domain, params: dict,
                 seed: int, policy_name: str, statement: str,
                 trace: TraceState, layout: ProblemLayout, model: StudentModel):
        self.session_id = session_id
        self.student_id = student_id
        self.domain = domain
        self.params = params
        self.seed = seed
        self.policy_name = policy_name
        self.statement = statement
        self.trace = trace
        self.layout = layout
        self.model = model
        self.turn = 0
        self.status = IN_PROGRESS
        self.submissions: list[dict] = []
        self.lock = threading.Lock()


def mastery_facts(model: StudentModel, domain: Domain, thresholds: tuple[float, float]) -> list[Fact]:
    """Export the student's per-skill mastery into working-memory facts so
    domain axioms can react to it. Probabilities are rounded to 1/10000 and
    stored exactly."""
    facts = []
    for s in sorted(domain.skills):
        st = model.state_for(s)
        p = Fraction(round(st.p_mastery * 10000), 10000)
        facts.append(Fact("pMastery", (Sym(s), from_fraction(p))))
        facts.append(Fact("mastery", (Sym(s), Sym(mastery_band(st, thresholds)))))
    return facts


class SessionEngine:
    """Owns sessions, student models, and their persistence. Commands on one
    session are serialized; distinct sessions never contend."""

    def __init__(self, registry: Optional[DomainRegistry] = None,
                 config: Optional[ServiceConfig] = None,
                 data_dir: str | None = "__config__"):
        self.registry = registry or DomainRegistry()
        self.config = config or ServiceConfig()
        if data_dir == "__config__":
            data_dir = self.config.data_dir
        self.data_dir = Path(data_dir) if data_dir else None
        self.sessions: dict[str, Session] = {}
        self._students: dict[str, StudentModel] = {}
        self._engine_lock = threading.Lock()
        if self.data_dir is not None:
            (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
            (self.data_dir / "students").mkdir(parents=True, exist_ok=True)

    # --- student models -----------------------------------------------

    def student_model(self, student_id: str) -> StudentModel:
        with self._engine_lock:
            m = self._students.get(student_id)
            if m is None:
                m = StudentModel(student_id, self.config.bkt_default, dict(self.config.bkt_skills))
                if self.data_dir is not None:
                    path = self.data_dir / "students" / f"{student_id}.json"
                    if path.exists():
                        m.restore(json.loads(path.read_text())["skills"])
                self._students[student_id] = m
            return m

    def _save_student(self, model: StudentModel) -> None:
        if self.data_dir is None:
            return
        path = self.data_dir / "students" / f"{model.student_id}.json"
        path.write_text(json.dumps({"skills": model.snapshot()}, sort_keys=True))

    # --- event log -------------------------------------------------------

    def _log_path(self, session_id: str) -> Optional[Path]:
        if self.data_dir is None:
            return None
        return self.data_dir / "sessions" / f"{session_id}.ndjson"

    def _append_event(self, session: Session, kind: str, payload: dict) -> None:
        path = self._log_path(session.session_id)
        if path is None:
            return
        event = {"turn": session.turn, "kind": kind, "payload": payload, "ts": time.time()}
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()

    # --- commands ---------------------------------------------------------

    def create_session(self, student_id: str, domain_name: str, params: dict | None = None,
                       seed: int = 0, policy: str = "adaptive",
                       session_id: str | None = None) -> Session:
        if policy not in self.config.policies:
            raise UnknownPolicy(f"unknown policy {policy!r}")
        domain = self.registry.get(domain_name)
        model = self.student_model(student_id)
        session_id = session_id or uuid.uuid4().hex[:12]
        session = self._build_session(session_id, student_id, domain, dict(params or {}),
                                      seed, policy, model)
        with self._engine_lock:
            self.sessions[session_id] = session
        self._append_event(session, "created", {
            "session_id": session_id,
            "student_id": student_id,
            "domain": domain_name,
            "params": session.params,
            "seed": seed,
            "policy": policy,
            "mastery": model.snapshot(),
        })
        return session

    def _build_session(self, session_id: str, student_id: str, domain: Domain, params: dict,
                       seed: int, policy_name: str, model: StudentModel) -> Session:
        problem = generate_problem(ProblemSpec(domain.name, params, seed))
        facts = list(problem.facts) + mastery_facts(model, domain, self.config.bands)
        trace = init_trace(domain, problem.root, facts)
        layout = compute_layout(trace, model, self.config.policies[policy_name],
                                thresholds=self.config.bands)
        return Session(session_id, student_id, domain, params, seed, policy_name,
                       problem.statement, trace, layout, model)

    def get_session(self, session_id: str) -> Session:
        with self._engine_lock:
            if session_id in self.sessions:
                return self.sessions[session_id]
        path = self._log_path(session_id)
        if path is None or not path.exists():
            raise SessionNotFound(f"no session {session_id}")
        session = self.replay(path.read_text().splitlines())
        session.model = self.student_model(session.student_id)
        with self._engine_lock:
            self.sessions[session_id] = session
        return session

    def submit_action(self, session_id: str, field: str, value, turn: int) -> tuple[Session, Feedback]:
        session = self.get_session(session_id)
        with session.lock:
            self._check_turn(session, turn)
            feedback = self._do_submit(session, field, value)
            self._append_event(session, "action_submitted",
                               {"field": field, "value": to_json(_as_value(value)), "turn": turn})
            self._append_event(session, "result", {
                "kind": feedback.kind, "skills": list(feedback.skills), "strategy": list(feedback.strategy),
            })
            if session.status == COMPLETED:
                self._append_event(session, "completed", {})
            self._save_student(session.model)
        return session, feedback

    def request_hint(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            if session.status != IN_PROGRESS:
                raise InvalidSessionState("session is complete")
            hint = next_hint(session.trace)
            target = project_hint(hint, session.layout)
            by_name = {m.name: m for m in session.domain.methods}
            chain = []
            for name in hint.strategy:
                m = by_name.get(name)
                if m is not None and m.skill:
                    chain.append(session.domain.skills.get(m.skill, name))
                else:
                    chain.append(name)
            message = f"Work on '{target.label}' next."
            if chain:
                message += " Strategy: " + " > ".join(chain) + "."
            payload = {"field": target.field_id, "message": message, "strategy": list(hint.strategy)}
            self._append_event(session, "hint_served", payload)
        return payload

    def expand_scaffold(self, session_id: str, field_id: str, turn: int) -> Session:
        session = self.get_session(session_id)
        with session.lock:
            self._check_turn(session, turn)
            if session.status != IN_PROGRESS:
                raise InvalidSessionState("session is complete")
            self._do_expand(session, field_id)
            self._append_event(session, "scaffold_expanded", {"field": field_id, "turn": turn})
        return session

    # --- command bodies (shared by live path and replay) ---------------

    def _check_turn(self, session: Session, turn: int) -> None:
        if turn != session.turn:
            raise TurnConflict(f"stale turn {turn}, session is at {session.turn}")

    def _do_submit(self, session: Session, field: str, value) -> Feedback:
        if session.status != IN_PROGRESS:
            raise InvalidSessionState("session is complete")
        value = _as_value(value)
        target = session.layout.find_input(field)
        feedback = Feedback("incorrect", INCORRECT_MESSAGE)
        accepted = False
        if target is not None and target.state != STATE_CORRECT and value == target.expected:
            trace = session.trace
            results = []
            ok = True
            for step in target.chain:
                trace, res = apply_action(trace, StudentAction(step.field_id, step.value, session.turn))
                if isinstance(res, Incorrect):
                    ok = False
                    break
                results.append(res)
            if ok:
                accepted = True
                session.trace = trace
                skills: list[str] = []
                for res in results:
                    for s in res.skills:
                        skills.append(s)
                        session.model.observe(s, True)
                target.state = STATE_CORRECT
                target.entered = value
                final = results[-1]
                kind = "complete" if isinstance(final, Complete) else "correct"
                if kind == "complete":
                    session.status = COMPLETED
                feedback = Feedback(kind, "Correct." if kind == "correct" else "Problem complete.",
                                    tuple(skills), final.strategy)
        if not accepted:
            debit = self._expected_skill(session)
            if debit is not None:
                session.model.observe(debit, False)
            if target is not None and target.state != STATE_CORRECT:
                target.state = STATE_INCORRECT
                target.entered = value
        session.submissions.append({
            "field": field,
            "value": to_json(value),
            "result": feedback.kind,
            "skills": list(feedback.skills),
            "strategy": list(feedback.strategy),
        })
        session.turn += 1
        return feedback

    def _expected_skill(self, session: Session) -> Optional[str]:
        for f in session.layout.fields:
            if f.is_input() and f.state != STATE_CORRECT:
                return f.skill
        return None

    def _do_expand(self, session: Session, field_id: str) -> None:
        layout, trace = expand_field(session.layout, field_id, session.trace)
        session.layout = layout
        session.trace = trace
        session.turn += 1

    # --- replay ------------------------------------------------------------

    def replay(self, lines: list[str]) -> Session:
        """Rebuild a session by replaying its event log from the creation
        snapshot. The student model starts from the logged snapshot and the
        same command bodies are re-run, so the result is bit-identical."""
        events = [json.loads(line) for line in lines if line.strip()]
        if not events or events[0]["kind"] != "created":
            raise TutorError("event log does not start with a created event")
        created = events[0]["payload"]
        domain = self.registry.get(created["domain"])
        model = StudentModel(created["student_id"], self.config.bkt_default, dict(self.config.bkt_skills))
        model.restore(created["mastery"])
        session = self._build_session(created["session_id"], created["student_id"], domain,
                                      created["params"], created["seed"], created["policy"], model)
        for ev in events[1:]:
            kind, payload = ev["kind"], ev["payload"]
            if kind == "action_submitted":
                self._do_submit(session, payload["field"], from_json(payload["value"]))
            elif kind == "scaffold_expanded":
                self._do_expand(session, payload["field"])
        return session

    # --- views -----------------------------------------------------------

    def serialize_state(self, session: Session) -> str:
        """Canonical JSON of the observable session state (no clocks)."""
        state = {
            "session_id": session.session_id,
            "student_id": session.student_id,
            "domain": session.domain.name,
            "params": session.params,
            "seed": session.seed,
            "policy": session.policy_name,
            "turn": session.turn,
            "status": session.status,
            "history": session.submissions,
            "fields": [
                {
                    "id": f.field_id,
                    "state": f.state,
                    "expandable": f.expandable,
                    "expanded": f.expanded,
                    "entered": to_json(f.entered) if f.entered is not None else None,
                }
                for f in session.layout.fields
            ],
            "expanded": sorted(session.layout.already_expanded_ids),
            "mastery": session.model.snapshot(),
        }
        return json.dumps(state, sort_keys=True, separators=(",", ":"))

    def session_payload(self, session: Session) -> dict:
        """The wire view of a session. Expected values never appear."""
        thresholds = self.config.bands
        return {
            "session_id": session.session_id,
            "student_id": session.student_id,
            "domain": session.domain.name,
            "statement": session.statement,
            "policy": session.policy_name,
            "turn": session.turn,
            "status": session.status,
            "fields": [
                {
                    "id": f.field_id,
                    "label": f.label,
                    "state": f.state,
                    "expandable": f.expandable,
                    "expanded": f.expanded,
                    "entered": format_value(f.entered) if f.entered is not None else None,
                    "skill": f.skill,
                    "band": f.mastery_band,
                }
                for f in session.layout.fields
            ],
            "skills": [
                {"skill": s.skill, "display": s.display, "p_mastery": s.p_mastery, "band": s.band}
                for s in skill_summaries(session.domain, session.model, thresholds)
            ],
        }


def _as_value(value) -> Value:
    if isinstance(value, str):
        return parse_entry(value)
    return value
