"""Exception types shared across the engine."""

from __future__ import annotations


class TutorError(Exception):
    """Base class for all engine errors."""


class MalformedFactError(TutorError):
    """A fact with variables (or other non-ground content) was asserted."""


class SafetyError(TutorError):
    """A negated or test condition uses a variable no earlier positive
    condition binds. Raised when a domain is loaded, never at query time."""


class StratificationError(TutorError):
    """An axiom-head predicate appears negated in an axiom's conditions."""


class SaturationOverflowError(TutorError):
    """Axiom saturation exceeded the configured fact ceiling."""


class ExpressionError(TutorError):
    """Expression evaluation failed (unbound variable, bad operand kind,
    division by zero, or an out-of-domain intLog)."""


class DomainParseError(TutorError):
    """Domain file rejected. ``kind`` names the error class; ``line`` and
    ``column`` point at the offending token when known."""

    def __init__(self, kind: str, message: str, line: int | None = None, column: int | None = None):
        self.kind = kind
        self.line = line
        self.column = column
        where = f" at line {line}" if line is not None else ""
        where += f", column {column}" if column is not None else ""
        super().__init__(f"{kind}{where}: {message}")


class DomainAuthoringError(TutorError):
    """A structurally valid domain behaved pathologically at run time
    (depth or frontier ceiling exceeded, or a collapsed subtree failed to
    simulate). Carries the offending task chain when known."""

    def __init__(self, message: str, task_chain: tuple[str, ...] = ()):
        self.task_chain = task_chain
        if task_chain:
            message = f"{message} (task chain: {' > '.join(task_chain)})"
        super().__init__(message)


class NoDecompositionError(TutorError):
    """The root task cannot be decomposed under the initial facts."""


class TraceCompletedError(TutorError):
    """An operation requiring an in-progress trace was called on a
    completed one."""


class LayoutError(TutorError):
    """Layout construction or expansion failed."""


class ConfigError(TutorError):
    """Bad service configuration (parameters, thresholds, or policies)."""
