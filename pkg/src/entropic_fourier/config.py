"""Run configuration: JSON schema, defaults, overrides and cross-field checks."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from .collision import INIT_MODES, Method, MethodVariant
from .problems import PROBLEMS, ProblemSpec

__all__ = ["CONFIG_SCHEMA", "ConfigError", "RunConfig", "apply_overrides", "load_config"]


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}
_VEC2 = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "entropic_fourier run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "problem": {
            "oneOf": [
                {"type": "string", "enum": list(PROBLEMS)},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["name"],
                    "properties": {
                        "name": {"type": "string", "enum": list(PROBLEMS)},
                        "u1": _VEC2,
                        "u2": _VEC2,
                        "rho1": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                        "eps": {"type": ["number", "null"], "exclusiveMinimum": 0},
                    },
                },
            ]
        },
        "method": {"type": "string", "enum": [v.value for v in MethodVariant]},
        "init": {"type": ["string", "null"], "enum": [*INIT_MODES, None]},
        "filter": {"type": ["string", "null"], "enum": ["jackson", "fejer", "none", None]},
        "d": {"type": ["integer", "null"], "enum": [2, 3, None]},
        "N": {"type": "integer", "minimum": 3},
        "R": {"type": "number", "exclusiveMinimum": 0},
        "T": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "allow_aliasing": {"type": "boolean"},
        "M": _POS_INT,
        "M_r": {"type": "integer", "minimum": 8},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "minimum": 0},
        "output_every": _POS_INT,
        "eps": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "slice_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "field_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "N_list": {"type": "array", "items": {"type": "integer", "minimum": 3}, "minItems": 1},
        "M_list": {"type": ["array", "null"], "items": _POS_INT, "minItems": 1},
        "out": {"type": ["string", "null"]},
        "cache_dir": {"type": ["string", "null"]},
        "use_cache": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
        "threads": _POS_INT,
        "tamper": {"type": ["string", "null"], "enum": ["negate-mode", None]},
    },
}


@dataclass
class RunConfig:
    """Validated configuration.  ``problem`` is kept in its JSON form."""

    problem: dict = field(default_factory=lambda: {"name": "bkw2d"})
    method: str = "efm"
    init: str | None = None
    filter: str | None = None
    d: int | None = None
    N: int = 32
    R: float = 6.0
    T: float | None = None
    allow_aliasing: bool = False
    M: int = 8
    M_r: int = 64
    dt: float = 0.01
    t_end: float = 1.0
    output_every: int = 1
    eps: float | None = None
    slice_times: list = field(default_factory=list)
    field_times: list = field(default_factory=list)
    N_list: list = field(default_factory=lambda: [16, 32, 64])
    M_list: list | None = None
    out: str | None = None
    cache_dir: str | None = None
    use_cache: bool = True
    seed: int = 0
    threads: int = 1
    tamper: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> RunConfig:
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        data = copy.deepcopy(raw)
        if isinstance(data.get("problem"), str):
            data["problem"] = {"name": data["problem"]}
        cfg = cls(**data)
        cfg.check()
        return cfg

    def check(self) -> None:
        prob = self.problem_spec()
        variant = MethodVariant.parse(self.method)
        if self.d is not None and self.d != prob.d:
            raise ConfigError(f"d={self.d} conflicts with problem {prob.name!r}, which is {prob.d}D")
        try:
            Method(variant, self.init, self.filter)
        except ValueError as exc:
            raise ConfigError(f"{exc}; drop 'filter' or pick the matching method") from None

    def problem_spec(self) -> ProblemSpec:
        p = dict(self.problem)
        if "u1" in p:
            p["u1"] = tuple(p["u1"])
        if "u2" in p:
            p["u2"] = tuple(p["u2"])
        if p.get("eps") is None and self.eps is not None:
            p["eps"] = self.eps
        try:
            return ProblemSpec(**p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``KEY=VALUE`` strings; dotted keys reach into objects, values parse as JSON."""
    out = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for p in parts[:-1]:
            cur = node.get(p)
            if isinstance(cur, str) and p == "problem":
                cur = {"name": cur}
            if cur is None:
                cur = {}
            if not isinstance(cur, dict):
                raise ConfigError(f"override {key!r}: {p!r} is not an object")
            node[p] = cur
            node = cur
        node[parts[-1]] = _parse_value(text)
    return out


def load_config(path=None, overrides=()) -> tuple[RunConfig, dict]:
    """Return the validated config and the raw dict it came from."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
    raw = apply_overrides(raw, overrides)
    return RunConfig.from_dict(raw), raw
