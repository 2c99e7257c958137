"""Job configuration files for the command-line front end.

A config is a JSON object. Validation runs before any computation and every
error names the offending key together with the line it appears on.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from .field_models import FieldModel, InvalidModelError, model_from_dict
from .phase_diagram import FAMILIES

DEFAULT_X_VALUES = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    model: FieldModel | None = None
    family: str | FieldModel | None = None
    beta: float | None = None
    beta_range: tuple[float, float] | None = None
    beta_points: int = 8
    h_range: tuple[float, float] | None = None
    h_points: int = 8
    x_points: int = 211
    x_values: list[float] = field(default_factory=lambda: list(DEFAULT_X_VALUES))
    interval: tuple[float, float] = (0.5, 1.0)
    n_list: list[int] = field(default_factory=lambda: [250, 1000, 4000])
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    theory_beta: float | None = None
    budget: float = 0.02
    critical_line: bool = True
    format: str = "csv"
    out: str | None = None


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(r'"%s"\s*:' % re.escape(key))
    for i, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return i
    return None


class _Checker:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def fail(self, key: str, msg: str):
        line = _line_of(self.text, key)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: {key}: {msg}")

    def number(self, key, v, positive=False) -> float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(key, f"expected a number, got {v!r}")
        if positive and not v > 0:
            self.fail(key, f"must be > 0, got {v!r}")
        return float(v)

    def range(self, key, v, positive=False) -> tuple[float, float]:
        if not isinstance(v, list) or len(v) != 2:
            self.fail(key, f"expected [lo, hi], got {v!r}")
        lo, hi = (self.number(key, x, positive) for x in v)
        if lo > hi:
            self.fail(key, f"range is empty or unordered: [{lo}, {hi}]")
        return lo, hi

    def count(self, key, v, minimum) -> int:
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            self.fail(key, f"expected an integer >= {minimum}, got {v!r}")
        return v

    def int_list(self, key, v, minimum=None) -> list[int]:
        if not isinstance(v, list) or not v or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in v):
            self.fail(key, f"expected a non-empty list of integers, got {v!r}")
        if minimum is not None and min(v) < minimum:
            self.fail(key, f"entries must be >= {minimum}")
        return list(v)


_KEYS = {"model", "family", "beta", "beta_range", "beta_points", "h_range", "h_points",
         "x_points", "x_values", "set", "n_list", "seeds", "theory_beta", "budget",
         "critical_line", "format", "out"}


def parse_config(text: str, source: str = "<config>") -> JobConfig:
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be a JSON object")
    return build_config(raw, text, source)


def build_config(raw: dict[str, Any], text: str = "", source: str = "<config>") -> JobConfig:
    c = _Checker(text, source)
    cfg = JobConfig()
    for key in raw:
        if key not in _KEYS:
            c.fail(key, "unknown key")
    if "model" in raw:
        try:
            cfg.model = model_from_dict(raw["model"])
        except (InvalidModelError, KeyError, TypeError) as exc:
            c.fail("model", str(exc))
    if "family" in raw:
        fam = raw["family"]
        if isinstance(fam, str):
            if fam not in FAMILIES:
                c.fail("family", f"expected one of {sorted(FAMILIES)}, got {fam!r}")
            cfg.family = fam
        else:
            try:
                cfg.family = model_from_dict(fam)
            except (InvalidModelError, KeyError, TypeError) as exc:
                c.fail("family", str(exc))
    if "beta" in raw:
        cfg.beta = c.number("beta", raw["beta"], positive=True)
    if "theory_beta" in raw:
        cfg.theory_beta = c.number("theory_beta", raw["theory_beta"], positive=True)
    if "beta_range" in raw:
        cfg.beta_range = c.range("beta_range", raw["beta_range"], positive=True)
    if "h_range" in raw:
        cfg.h_range = c.range("h_range", raw["h_range"])
    for key in ("beta_points", "h_points", "x_points"):
        if key in raw:
            setattr(cfg, key, c.count(key, raw[key], 2))
    if "x_values" in raw:
        v = raw["x_values"]
        if not isinstance(v, list) or not v:
            c.fail("x_values", "expected a non-empty list of numbers")
        cfg.x_values = [c.number("x_values", x) for x in v]
    if "set" in raw:
        cfg.interval = c.range("set", raw["set"])
    if "n_list" in raw:
        cfg.n_list = c.int_list("n_list", raw["n_list"], minimum=1)
        if any(b <= a for a, b in zip(cfg.n_list, cfg.n_list[1:])):
            c.fail("n_list", "must be strictly increasing")
    if "seeds" in raw:
        cfg.seeds = c.int_list("seeds", raw["seeds"])
    if "budget" in raw:
        cfg.budget = c.number("budget", raw["budget"], positive=True)
    if "critical_line" in raw:
        if not isinstance(raw["critical_line"], bool):
            c.fail("critical_line", "expected true or false")
        cfg.critical_line = raw["critical_line"]
    if "format" in raw:
        if raw["format"] not in ("csv", "json"):
            c.fail("format", "expected 'csv' or 'json'")
        cfg.format = raw["format"]
    if "out" in raw:
        if not isinstance(raw["out"], str):
            c.fail("out", "expected a path string")
        cfg.out = raw["out"]
    return cfg


def require(cfg: JobConfig, command: str, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"{command}: missing required config key(s): {', '.join(missing)}")
