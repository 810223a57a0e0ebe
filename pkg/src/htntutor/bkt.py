"""Per-skill Bayesian knowledge tracing.

Standard two-state model: a Bayes posterior on each observation followed by
a learning transition. Defaults are the common literature values and can be
overridden per skill in the service configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

DEFAULT_P_INIT = 0.3
DEFAULT_P_TRANSIT = 0.2
DEFAULT_P_GUESS = 0.2
DEFAULT_P_SLIP = 0.1

BAND_LOW = "low"
BAND_MEDIUM = "medium"
BAND_HIGH = "high"

DEFAULT_THRESHOLDS = (0.4, 0.8)


@dataclass(frozen=True)
class SkillParams:
    p_init: float = DEFAULT_P_INIT
    p_transit: float = DEFAULT_P_TRANSIT
    p_guess: float = DEFAULT_P_GUESS
    p_slip: float = DEFAULT_P_SLIP

    def validate(self) -> "SkillParams":
        for name in ("p_init", "p_transit", "p_guess", "p_slip"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}={v} outside [0, 1]")
        if not self.p_guess < 1.0 - self.p_slip:
            raise ConfigError(
                f"p_guess={self.p_guess} must be below 1 - p_slip={1.0 - self.p_slip} "
                "(identifiability guard)")
        return self


@dataclass(frozen=True)
class SkillState:
    p_mastery: float
    opportunities: int = 0


def bkt_update(s: SkillState, p: SkillParams, correct: bool) -> SkillState:
    """Posterior on the observation, then the learning transition.

    Correct:   post = L(1-S) / (L(1-S) + (1-L)G)
    Incorrect: post = L·S   / (L·S   + (1-L)(1-G))
    Then L' = post + (1-post)·T.
    """
    L = s.p_mastery
    if correct:
        num = L * (1.0 - p.p_slip)
        den = num + (1.0 - L) * p.p_guess
    else:
        num = L * p.p_slip
        den = num + (1.0 - L) * (1.0 - p.p_guess)
    post = L if den == 0.0 else num / den
    new_p = post + (1.0 - post) * p.p_transit
    return SkillState(min(1.0, max(0.0, new_p)), s.opportunities + 1)


def mastery_band(s: SkillState, thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> str:
    """low below the first threshold, high at or above the second,
    medium in between. Both boundaries are left-closed for the band above."""
    low_hi, high_lo = thresholds
    if not 0.0 < low_hi < high_lo < 1.0:
        raise ConfigError(f"bad band thresholds ({low_hi}, {high_lo})")
    if s.p_mastery >= high_lo:
        return BAND_HIGH
    if s.p_mastery < low_hi:
        return BAND_LOW
    return BAND_MEDIUM


class StudentModel:
    """Mastery state per skill for one student. Skills initialize lazily at
    their p_init on first contact."""

    def __init__(self, student_id: str,
                 default_params: SkillParams | None = None,
                 skill_params: dict[str, SkillParams] | None = None):
        self.student_id = student_id
        self.default_params = (default_params or SkillParams()).validate()
        self.skill_params = {k: v.validate() for k, v in (skill_params or {}).items()}
        self.states: dict[str, SkillState] = {}

    def params_for(self, skill: str) -> SkillParams:
        return self.skill_params.get(skill, self.default_params)

    def state_for(self, skill: str) -> SkillState:
        st = self.states.get(skill)
        if st is None:
            st = SkillState(self.params_for(skill).p_init, 0)
            self.states[skill] = st
        return st

    def observe(self, skill: str, correct: bool) -> SkillState:
        new = bkt_update(self.state_for(skill), self.params_for(skill), correct)
        self.states[skill] = new
        return new

    def band_for(self, skill: str, thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> str:
        return mastery_band(self.state_for(skill), thresholds)

    def snapshot(self) -> dict:
        return {k: [v.p_mastery, v.opportunities] for k, v in sorted(self.states.items())}

    def restore(self, snapshot: dict) -> None:
        self.states = {k: SkillState(p, int(n)) for k, (p, n) in snapshot.items()}

    def copy(self) -> "StudentModel":
        m = StudentModel(self.student_id, self.default_params, dict(self.skill_params))
        m.states = dict(self.states)
        return m
