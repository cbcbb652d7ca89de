"""Run configuration: defaults < config file (``key = value`` lines) < command-line flags."""
from __future__ import annotations

import ast
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .errors import ConfigError
from .models import MODEL_NAMES


@dataclass(frozen=True)
class RunConfig:
    model: Optional[str] = None  # None: every model the suite applies to
    scale: float = 1.0
    lam: Optional[float] = None  # None: the model's Einstein constant
    scheme: str = "analytic"
    h: float = 1e-3
    tol: Optional[float] = None  # None: each check's documented tolerance
    points: int = 100
    seed: int = 0
    margin: float = 0.0
    workers: int = 4
    out: Optional[str] = None

    def validate(self):
        if self.model is not None and self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.scheme not in ("analytic", "fd"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not self.h > 0 or not self.scale > 0:
            raise ConfigError("h and scale must be positive")
        if self.points < 1 or self.workers < 1:
            raise ConfigError("points and workers must be >= 1")
        if self.lam == 0:
            raise ConfigError("lambda must be nonzero")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")
        return self

    def echo(self):
        return asdict(self)


_ALIASES = {"lambda": "lam", "fd_step": "h", "chart_margin": "margin"}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    kind = _TYPES[key]
    if raw.lower() in ("none", "null", ""):
        return None
    try:
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    if raw[:1] in "'\"":
        try:
            return ast.literal_eval(raw)
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"bad string for {key}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, raw)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        cfg = replace(cfg, **parse_config_text(text))
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()
