"""HTN tutoring engine: hierarchical expert models, model tracing,
Bayesian knowledge tracing, and adaptive scaffolding."""

from .bkt import SkillParams, SkillState, StudentModel, bkt_update, mastery_band
from .domain import Domain, Method, Operator, TaskHead, eval_expression
from .facts import Fact, Pattern, WorkingMemory, match, saturate
from .parser import parse_domain, serialize_domain
from .plans import enumerate_plans
from .problems import DomainRegistry, ProblemSpec, builtin_domains, generate_problem
from .scaffolding import compute_layout, expand_field, schedule_depth
from .sessions import SessionEngine
from .tracing import StudentAction, TraceState, apply_action, expected_actions, init_trace, next_hint
from .validation import validate_domain

__version__ = "0.1.0"

__all__ = [
    "SkillParams", "SkillState", "StudentModel", "bkt_update", "mastery_band",
    "Domain", "Method", "Operator", "TaskHead", "eval_expression",
    "Fact", "Pattern", "WorkingMemory", "match", "saturate",
    "parse_domain", "serialize_domain",
    "enumerate_plans",
    "DomainRegistry", "ProblemSpec", "builtin_domains", "generate_problem",
    "compute_layout", "expand_field", "schedule_depth",
    "SessionEngine",
    "StudentAction", "TraceState", "apply_action", "expected_actions", "init_trace", "next_hint",
    "validate_domain",
    "__version__",
]
