"""Run configuration: defaults, optional JSON file, CLI overrides."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from . import numkit
from .bicomplex import VALIDATION_TOL
from .io import DocumentError


@dataclass
class RunConfig:
    rank_tol: float = numkit.RANK_TOL
    cluster_tol: float = numkit.CLUSTER_TOL
    validation_tol: float = VALIDATION_TOL
    seed: int = 0
    lambdas: list = field(default_factory=list)
    eps: list = field(default_factory=lambda: [1e-3])
    theta: float = math.pi
    output: str = "table"
    threads: int = 1

    def __post_init__(self):
        for name in ("rank_tol", "cluster_tol", "validation_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.theta < 2 * math.pi:
            raise ValueError("theta must lie in (0, 2pi)")
        if self.output not in ("table", "json"):
            raise ValueError("output must be 'table' or 'json'")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if any(e <= 0 for e in self.eps):
            raise ValueError("eps values must be positive")
        if any(x < 0 for x in self.lambdas):
            raise ValueError("lambda values must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def load(path=None, **overrides) -> RunConfig:
    """File values over defaults, then non-None overrides over both."""
    values = {}
    if path:
        try:
            with open(path) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DocumentError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(values, dict):
            raise DocumentError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise DocumentError(f"unknown config keys: {unknown}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"bad configuration: {exc}") from exc
