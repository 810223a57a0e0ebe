"""Service configuration: a TOML file plus environment overrides.

Recognized keys: listen_addr, data_dir, ui_dir, api_token, a [bkt] table
with p_init/p_transit/p_guess/p_slip and per-skill [bkt.skills.<name>]
overrides, a [bands] table with low/high thresholds, and [policies.<name>]
tables (kind = adaptive | static | u_shaped | sigmoid with their
parameters). HTNTUTOR_LISTEN_ADDR and HTNTUTOR_DATA_DIR override the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .bkt import DEFAULT_THRESHOLDS, SkillParams
from .errors import ConfigError
from .scaffolding import AdaptivePolicy, ScaffoldPolicy, StaticPolicy, policy_from_config

ENV_LISTEN = "HTNTUTOR_LISTEN_ADDR"
ENV_DATA_DIR = "HTNTUTOR_DATA_DIR"

FULL_SCAFFOLD_DEPTH = 16


def default_policies() -> dict[str, ScaffoldPolicy]:
    return {
        "adaptive": AdaptivePolicy(),
        "full": StaticPolicy(FULL_SCAFFOLD_DEPTH),
        "answer": StaticPolicy(0),
    }


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8700"
    data_dir: str = "./data"
    ui_dir: str | None = None
    api_token: str | None = None
    bkt_default: SkillParams = field(default_factory=SkillParams)
    bkt_skills: dict[str, SkillParams] = field(default_factory=dict)
    bands: tuple[float, float] = DEFAULT_THRESHOLDS
    policies: dict[str, ScaffoldPolicy] = field(default_factory=default_policies)

    def validate(self) -> "ServiceConfig":
        self.bkt_default.validate()
        for p in self.bkt_skills.values():
            p.validate()
        low, high = self.bands
        if not 0.0 < low < high < 1.0:
            raise ConfigError(f"bad band thresholds ({low}, {high})")
        return self


def _params_from(table: dict, base: SkillParams) -> SkillParams:
    return SkillParams(
        p_init=float(table.get("p_init", base.p_init)),
        p_transit=float(table.get("p_transit", base.p_transit)),
        p_guess=float(table.get("p_guess", base.p_guess)),
        p_slip=float(table.get("p_slip", base.p_slip)),
    )


def load_config(path: str | None = None) -> ServiceConfig:
    cfg = ServiceConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"bad config file {path}: {e}")
        cfg.listen_addr = data.get("listen_addr", cfg.listen_addr)
        cfg.data_dir = data.get("data_dir", cfg.data_dir)
        cfg.ui_dir = data.get("ui_dir", cfg.ui_dir)
        cfg.api_token = data.get("api_token", cfg.api_token) or None
        bkt = data.get("bkt", {})
        cfg.bkt_default = _params_from(bkt, SkillParams())
        for skill, table in bkt.get("skills", {}).items():
            cfg.bkt_skills[skill] = _params_from(table, cfg.bkt_default)
        bands = data.get("bands", {})
        cfg.bands = (float(bands.get("low", cfg.bands[0])), float(bands.get("high", cfg.bands[1])))
        for name, table in data.get("policies", {}).items():
            cfg.policies[name] = policy_from_config(table)
    if os.environ.get(ENV_LISTEN):
        cfg.listen_addr = os.environ[ENV_LISTEN]
    if os.environ.get(ENV_DATA_DIR):
        cfg.data_dir = os.environ[ENV_DATA_DIR]
    return cfg.validate()
