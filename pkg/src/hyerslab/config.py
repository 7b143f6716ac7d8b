"""Experiment configuration (single JSON file) and object construction.

Schema::

    {
      "algebra": {"kind": "matrix", "dim": 2} | {"kind": "poly", "max_terms": 100000},
      "params": {"r": 2, "s": 1, "t": 1, "direction": "forward", "pivot": "s"},
      "probe": {
        "core": {"type": "identity" | "linear" | "similarity" | "unitary"
                         | "poly_sign" | "poly_linear" | "conjugation", ...},
        "perturbation": {"kind": "power", "delta": 0.1, "p": 0.5, "seed": 42,
                         "direction": "hash"}
      },
      "control": {"type": "power", "eps": 0.3, "p": 0.5, "arity": 2}
               | {"type": "constant", "eps": 0.3}
               | {"type": "calibrated", "p": 0.5, "budget": 2000},
      "suite": "algebra" | "series" | "jensen" | "homstab" | "linearity" | "generated" | "full",
      "samples": 100, "seed": 0, "tol": 1e-6, "n_cap": 64, "output_dir": "out",
      "residual_sign": "minus", "n_probe": 20, "scalars": [[2, 3], [0, 1], ...]
    }
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .algebra import AlgebraContext, Kind, as_scalar
from .control import Constant, PowerType, control_to_json
from .errors import ConfigError, HyersLabError
from .hyers import JensenParams
from .perturb import (ConjugationCore, IdentityCore, LinearCore, PerturbationSpec, PolyLinearCore,
                      PolySignCore, SimilarityCore, UnitaryCore)

SUITES = ("algebra", "series", "jensen", "homstab", "linearity", "generated", "full")

DEFAULT_SCALARS = [
    [1, 0], [0, 1], [-1, 0], [0, -1], [2, 3], [0.5, -0.25], [-3, 1], [0.1, 0.1], [4, 0], [0, 4],
    [-2.5, -2.5], [1, 1], [0.75, 0], [0, 0.3], [5, -1], [-0.2, 7], [3.3, 3.3], [-6, 0.5], [0.01, 0], [0, 0],
]


@dataclass
class ExperimentConfig:
    algebra: dict = field(default_factory=lambda: {"kind": "matrix", "dim": 2})
    params: dict = field(default_factory=lambda: {"r": 2, "s": 1, "t": 1})
    probe: dict = field(default_factory=lambda: {"core": {"type": "identity"}})
    control: dict = field(default_factory=lambda: {"type": "calibrated", "p": 0.5})
    suite: str = "full"
    samples: int = 20
    seed: int = 0
    tol: float = 1e-6
    n_cap: int = 64
    output_dir: str = "out"
    residual_sign: str = "minus"
    n_probe: int = 20
    scalars: list = field(default_factory=lambda: [list(s) for s in DEFAULT_SCALARS])

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def override(self, **kw) -> "ExperimentConfig":
        cfg = replace(self, **{k: v for k, v in kw.items() if v is not None})
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def validate(self) -> None:
        if self.suite not in SUITES:
            raise ConfigError(f"suite must be one of {SUITES}, got {self.suite!r}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ConfigError("samples must be a positive integer")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigError("tol must be positive")
        if self.residual_sign not in ("minus", "plus"):
            raise ConfigError("residual_sign must be 'minus' or 'plus'")
        if int(self.n_cap) != self.n_cap or not 0 <= self.n_cap <= 64:
            raise ConfigError("n_cap must be an integer in [0, 64]")
        try:
            self.context()
            self.jensen_params()
            self.perturbation()
            self.scalar_grid()
            self.core()
            self.fixed_control()
        except ConfigError:
            raise
        except (HyersLabError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    # -- builders ----------------------------------------------------------

    def context(self) -> AlgebraContext:
        kind = self.algebra.get("kind")
        if kind == "matrix":
            return AlgebraContext.matrix(int(self.algebra.get("dim", 2)))
        if kind == "poly":
            return AlgebraContext.poly(int(self.algebra.get("max_terms", 100_000)))
        raise ConfigError(f"algebra kind must be 'matrix' or 'poly', got {kind!r}")

    def jensen_params(self) -> JensenParams:
        p = self.params
        return JensenParams(p["r"], p["s"], p["t"], p.get("direction", "forward"), p.get("pivot", "s"))

    def perturbation(self, seed_offset: int = 0) -> PerturbationSpec:
        spec = dict(self.probe.get("perturbation") or {"delta": 0.0})
        spec.setdefault("seed", self.seed)
        spec["seed"] = int(spec["seed"]) + seed_offset
        return PerturbationSpec(spec.get("kind", "power"), float(spec.get("delta", 0.0)),
                                float(spec.get("p", 0.5)), spec["seed"], spec.get("direction", "hash"))

    def core(self):
        ctx = self.context()
        c = self.probe.get("core", {"type": "identity"})
        kind = c.get("type", "identity")
        if kind == "identity":
            return IdentityCore()
        if kind == "conjugation":
            return ConjugationCore()
        if ctx.kind is Kind.MATRIX:
            if kind == "linear":
                if "operator" in c:
                    return LinearCore(ctx, _complex_matrix(c["operator"]))
                return LinearCore.random(ctx, int(c.get("seed", self.seed)))
            if kind == "similarity":
                return SimilarityCore(_complex_matrix(c["S"]))
            if kind == "unitary":
                if "U" in c:
                    return UnitaryCore(_complex_matrix(c["U"]))
                return UnitaryCore.random(ctx, int(c.get("seed", self.seed)))
        else:
            if kind == "poly_sign":
                return PolySignCore(int(c.get("sigma", 1)), as_scalar(c.get("c", 1.0)))
            if kind == "poly_linear":
                mult = {int(k): as_scalar(v) for k, v in c.get("multipliers", {}).items()}
                return PolyLinearCore(mult, as_scalar(c.get("default", 1.0)))
        raise ConfigError(f"core type {kind!r} is not available for the {ctx.kind.value} algebra")

    def core_is_hom(self) -> bool:
        return self.probe.get("core", {}).get("type", "identity") in (
            "identity", "similarity", "unitary", "poly_sign", "conjugation")

    def core_is_complex_linear(self) -> bool:
        return self.probe.get("core", {}).get("type", "identity") != "conjugation"

    def fixed_control(self, arity: int | None = None):
        """The configured control, or ``None`` when it is to be calibrated."""
        c = self.control
        kind = c.get("type")
        a = int(arity if arity is not None else c.get("arity", 2))
        if kind == "power":
            return PowerType(float(c["eps"]), float(c["p"]), a)
        if kind == "constant":
            return Constant(float(c["eps"]), a)
        if kind == "calibrated":
            float(c.get("p", 0.5))
            return None
        raise ConfigError(f"control type must be power, constant or calibrated, got {kind!r}")

    def scalar_grid(self) -> list[complex]:
        return [as_scalar(s) for s in self.scalars]


def _complex_matrix(data) -> np.ndarray:
    return np.array([[as_scalar(z) for z in row] for row in data], dtype=complex)


def describe_control(phi) -> dict:
    return control_to_json(phi)
