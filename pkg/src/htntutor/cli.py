"""Operator command line: validate domain files, trace problems, run
fading-policy simulations, and launch the service.

Exit codes: 0 success, 1 validation or trace failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ServiceConfig, load_config
from .errors import ConfigError, DomainParseError, TutorError
from .parser import parse_domain
from .plans import enumerate_plans
from .problems import DomainRegistry, ProblemSpec, generate_problem
from .sessions import SessionEngine
from .simulation import load_sim_config, run_simulation
from .validation import has_errors, validate_domain
from .values import format_value


def _load_domain(registry: DomainRegistry, name_or_path: str):
    if name_or_path.endswith(".htn") or Path(name_or_path).is_file():
        return parse_domain(Path(name_or_path).read_text(encoding="utf-8"))
    return registry.get(name_or_path)


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.domain_file).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        domain = parse_domain(text)
    except DomainParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1
    diags = validate_domain(domain)
    for d in diags:
        print(d)
    if has_errors(diags):
        return 1
    print(f"ok: domain {domain.name} ({len(domain.methods)} methods, "
          f"{len(domain.operators)} operators, {len(domain.axioms)} axioms)")
    return 0


def _problem_args(raw: str) -> dict:
    if raw.startswith("@"):
        raw = Path(raw[1:]).read_text(encoding="utf-8")
    parsed = json.loads(raw) if raw.strip() else {}
    if not isinstance(parsed, dict):
        raise ConfigError("problem spec must be a JSON object")
    return parsed


def _cmd_trace(args: argparse.Namespace) -> int:
    registry = DomainRegistry()
    try:
        domain = _load_domain(registry, args.domain)
        registry.add(domain)
        spec = _problem_args(args.problem)
        problem = generate_problem(ProblemSpec(domain.name, spec, args.seed))
    except (TutorError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    print(problem.statement)
    if args.transcript is None:
        plans = enumerate_plans(domain, problem.root, list(problem.facts), limit=args.limit)
        suffix = " (truncated)" if plans.truncated else ""
        print(f"{len(plans.sequences)} complete solution path(s){suffix}; first:")
        for step in plans.sequences[0]:
            print(f"  {step.field} = {format_value(step.value)}"
                  + (f"   [{step.skill}]" if step.skill else ""))
        return 0

    try:
        transcript = json.loads(Path(args.transcript).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        print(f"error reading transcript: {e}", file=sys.stderr)
        return 1
    engine = SessionEngine(registry, ServiceConfig(), data_dir=None)
    policy = transcript.get("policy", "full")
    model = engine.student_model("transcript")
    if transcript.get("mastery"):
        model.restore(transcript["mastery"])
    session = engine.create_session("transcript", domain.name, spec, args.seed, policy)
    failures = 0
    for entry in transcript.get("actions", []):
        _, feedback = engine.submit_action(session.session_id, entry["field"],
                                           str(entry["value"]), session.turn)
        print(f"turn {session.turn}: {entry['field']} = {entry['value']} -> {feedback.kind}")
        if feedback.kind == "incorrect":
            failures += 1
    print(f"status: {session.status}, incorrect entries: {failures}")
    return 1 if failures else 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = load_sim_config(args.sim_config)
        _, csv_text = run_simulation(cfg)
    except TutorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    try:
        serve(args.config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htntutor",
                                     description="HTN tutoring engine tools")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse and validate a domain file")
    v.add_argument("domain_file")
    v.set_defaults(fn=_cmd_validate)

    t = sub.add_parser("trace", help="trace a generated problem, optionally replaying a transcript")
    t.add_argument("domain", help="built-in domain name or path to a .htn file")
    t.add_argument("problem", help="problem parameters as inline JSON or @file")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--limit", type=int, default=200, help="solution path cap when printing plans")
    t.add_argument("--transcript", default=None,
                   help="JSON file {policy?, mastery?, actions: [{field, value}]} to replay")
    t.set_defaults(fn=_cmd_trace)

    s = sub.add_parser("simulate", help="run a fading-policy simulation")
    s.add_argument("sim_config", help="JSON or TOML simulation spec")
    s.add_argument("--out", default=None, help="write CSV here instead of stdout")
    s.set_defaults(fn=_cmd_simulate)

    r = sub.add_parser("serve", help="run the tutoring service")
    r.add_argument("--config", default=None, help="TOML config file")
    r.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
