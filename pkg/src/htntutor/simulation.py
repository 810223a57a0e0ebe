"""Fading-policy comparison harness.

Synthetic students execute oracle-derived layouts with skill-dependent
noise: each attempt succeeds with probability tied to the student's hidden
knowledge, which grows with practice. The harness measures, per policy and
skill, how many opportunities the traced model needed to reach mastery and
the observed error rate. It evaluates the engine, not human learning.
"""

from __future__ import annotations

import io
import json
import random
from dataclasses import dataclass, field

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .config import ServiceConfig
from .errors import ConfigError
from .problems import DomainRegistry
from .scaffolding import STATE_CORRECT, policy_from_config
from .sessions import SessionEngine
from .values import Int, Ratio, Value, format_value, make_ratio


@dataclass
class SimConfig:
    domain: str
    policies: dict[str, dict]
    students: int = 20
    problems_per_student: int = 5
    true_learn_rate: float = 0.15
    true_guess: float = 0.15
    true_slip: float = 0.10
    initial_know: float = 0.20
    mastery_threshold: float = 0.95
    seed: int = 0


def load_sim_config(path: str) -> SimConfig:
    try:
        if path.endswith(".toml"):
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"simulation spec not found: {path}")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"malformed simulation spec {path}: {e}")
    try:
        return SimConfig(
            domain=data["domain"],
            policies=dict(data["policies"]),
            students=int(data.get("students", 20)),
            problems_per_student=int(data.get("problems_per_student", 5)),
            true_learn_rate=float(data.get("true_learn_rate", 0.15)),
            true_guess=float(data.get("true_guess", 0.15)),
            true_slip=float(data.get("true_slip", 0.10)),
            initial_know=float(data.get("initial_know", 0.20)),
            mastery_threshold=float(data.get("mastery_threshold", 0.95)),
            seed=int(data.get("seed", 0)),
        )
    except KeyError as e:
        raise ConfigError(f"simulation spec missing key {e}")


def _wrong_value(expected: Value) -> str:
    if isinstance(expected, Int):
        return str(expected.value + 1)
    if isinstance(expected, Ratio):
        return format_value(make_ratio(expected.num + expected.den, expected.den))
    return "(wrong)"


def run_simulation(cfg: SimConfig, registry: DomainRegistry | None = None) -> tuple[list[dict], str]:
    """Returns (rows, csv). Deterministic for a given spec: all randomness
    flows from per-(policy, student) generators seeded off cfg.seed."""
    registry = registry or DomainRegistry()
    domain = registry.get(cfg.domain)
    parsed_policies = {name: policy_from_config(p) for name, p in cfg.policies.items()}
    rows: list[dict] = []

    for policy_name in sorted(parsed_policies):
        service_config = ServiceConfig(policies=dict(parsed_policies))
        engine = SessionEngine(registry, service_config, data_dir=None)
        mastered_opps: dict[str, list[int]] = {s: [] for s in domain.skills}
        errors: dict[str, int] = {s: 0 for s in domain.skills}
        attempts: dict[str, int] = {s: 0 for s in domain.skills}

        for i in range(cfg.students):
            rng = random.Random(f"{cfg.seed}:{policy_name}:{i}")
            student_id = f"sim-{policy_name}-{i}"
            know: dict[str, float] = {}
            mastered_at: dict[str, int] = {}
            model = engine.student_model(student_id)

            def check_mastery() -> None:
                for s, st in model.states.items():
                    if s not in mastered_at and st.p_mastery >= cfg.mastery_threshold:
                        mastered_at[s] = st.opportunities

            for _ in range(cfg.problems_per_student):
                session = engine.create_session(student_id, cfg.domain,
                                                seed=rng.randrange(2 ** 31), policy=policy_name)
                while session.status == "in-progress":
                    target = next(f for f in session.layout.fields
                                  if f.is_input() and f.state != STATE_CORRECT)
                    skill = target.skill or "untagged"
                    p_know = know.setdefault(skill, cfg.initial_know)
                    p_correct = p_know * (1 - cfg.true_slip) + (1 - p_know) * cfg.true_guess
                    if skill in attempts:
                        attempts[skill] += 1
                    if rng.random() >= p_correct:
                        if skill in errors:
                            errors[skill] += 1
                        engine.submit_action(session.session_id, target.field_id,
                                             _wrong_value(target.expected), session.turn)
                        check_mastery()
                        if skill in attempts:
                            attempts[skill] += 1
                    engine.submit_action(session.session_id, target.field_id,
                                         format_value(target.expected), session.turn)
                    check_mastery()
                    know[skill] = p_know + (1 - p_know) * cfg.true_learn_rate

            for s, n in mastered_at.items():
                if s in mastered_opps:
                    mastered_opps[s].append(n)

        for skill in sorted(domain.skills):
            reached = mastered_opps[skill]
            mean = sum(reached) / len(reached) if reached else None
            att = attempts[skill]
            rows.append({
                "policy": policy_name,
                "skill": skill,
                "students": cfg.students,
                "mastered": len(reached),
                "mean_opportunities_to_mastery": mean,
                "error_rate": (errors[skill] / att) if att else None,
            })

    rows.sort(key=lambda r: (r["policy"], r["skill"]))
    return rows, _to_csv(rows)


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("policy,skill,students,mastered,mean_opportunities_to_mastery,error_rate\n")
    for r in rows:
        mean = "" if r["mean_opportunities_to_mastery"] is None else f"{r['mean_opportunities_to_mastery']:.4f}"
        err = "" if r["error_rate"] is None else f"{r['error_rate']:.4f}"
        buf.write(f"{r['policy']},{r['skill']},{r['students']},{r['mastered']},{mean},{err}\n")
    return buf.getvalue()
