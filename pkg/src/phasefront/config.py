"""Experiment configuration: strict JSON schema with unknown fields rejected."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curves import FrontCurve, circle_curve, ellipse_curve
from .errors import ConfigError
from .model import ModelSpec, model_from_config


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    params: dict

    def build_curve(self, n_vertices: int = 512) -> FrontCurve:
        p = dict(self.params)
        if self.kind == "circle":
            r = float(p.pop("r"))
            center = (float(p.pop("cx", 0.5)), float(p.pop("cy", 0.5)))
            if p:
                raise ConfigError(f"unknown circle params: {sorted(p)}")
            return circle_curve(center, r, n_vertices,
                                h_target=2 * np.pi * r / n_vertices)
        if self.kind == "ellipse":
            a, b = float(p.pop("a")), float(p.pop("b"))
            center = (float(p.pop("cx", 0.5)), float(p.pop("cy", 0.5)))
            if p:
                raise ConfigError(f"unknown ellipse params: {sorted(p)}")
            return ellipse_curve(center, a, b, n_vertices)
        raise ConfigError(f"shape kind {self.kind!r} does not define a curve")

    @property
    def is_curve(self) -> bool:
        return self.kind in ("circle", "ellipse")


def _shape_from_dict(cfg: dict) -> ShapeSpec:
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    params = dict(cfg.pop("params", {}))
    if cfg:
        raise ConfigError(f"unknown shape fields: {sorted(cfg)}")
    if kind not in ("circle", "ellipse", "trig"):
        raise ConfigError(f"unknown shape kind {kind!r}")
    return ShapeSpec(kind, params)


def parse_shape_string(text: str) -> ShapeSpec:
    """Parse CLI shape strings like ``circle:R=0.25`` or ``trig:amplitude=0.5``."""
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ConfigError(f"malformed shape parameter {item!r}")
            key = {"R": "r"}.get(key.strip(), key.strip().lower())
            params[key] = float(val)
    return _shape_from_dict({"kind": kind.strip().lower(), "params": params})


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    model_cfg: dict
    grid_n: int
    eps_list: tuple[float, ...]
    shape: ShapeSpec
    t_end: float
    checkpoints: tuple[float, ...]
    eta_g: float
    eta_p: float
    m0_ceiling: float
    seed: int
    out_dir: str | None = None
    markers: int = field(default=512)

    def __post_init__(self):
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("epsilon values must be positive")
        if any(a <= b for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ConfigError("epsilon list must be strictly decreasing")
        eta0 = self.model.reaction.eta0
        if not (0.0 < self.eta_g < eta0):
            raise ConfigError(f"eta_g must lie in (0, {eta0}), got {self.eta_g}")
        if not (0.0 < self.eta_p < eta0):
            raise ConfigError(f"eta_p must lie in (0, {eta0}), got {self.eta_p}")
        if self.t_end < 0.0:
            raise ConfigError("t_end must be nonnegative")
        if any(c < 0.0 or c > self.t_end for c in self.checkpoints):
            raise ConfigError("checkpoints must lie in [0, t_end]")

    def grid_size_for(self, eps: float) -> int:
        """Smallest power of two with h <= eps/4, at least the configured floor."""
        need = max(self.grid_n, int(np.ceil(4.0 / eps)))
        n = 8
        while n < need:
            n *= 2
        return n


def experiment_from_dict(cfg: dict) -> ExperimentConfig:
    cfg = dict(cfg)

    def take(name, default=None, required=False):
        if required and name not in cfg:
            raise ConfigError(f"config is missing field {name!r}")
        return cfg.pop(name, default)

    model_cfg = take("model", required=True)
    model = model_from_config(model_cfg)
    grid = dict(take("grid", {"n": 64}))
    grid_n = int(grid.pop("n", 64))
    if grid:
        raise ConfigError(f"unknown grid fields: {sorted(grid)}")
    eps_list = tuple(float(e) for e in take("eps", [model.epsilon]))
    shape = _shape_from_dict(take("shape", {"kind": "circle",
                                            "params": {"r": 0.25}}))
    times = dict(take("times", {"t_end": 0.01}))
    t_end = float(times.pop("t_end"))
    checkpoints = tuple(float(c) for c in times.pop("checkpoints", [t_end]))
    if times:
        raise ConfigError(f"unknown times fields: {sorted(times)}")
    tol = dict(take("tol", {}))
    eta_g = float(tol.pop("eta_g", 0.1))
    eta_p = float(tol.pop("eta_p", 0.1))
    m0_ceiling = float(tol.pop("m0_ceiling", 10.0))
    if tol:
        raise ConfigError(f"unknown tol fields: {sorted(tol)}")
    seed = int(take("seed", 0))
    out_dir = take("out", None)
    markers = int(take("markers", 512))
    if cfg:
        raise ConfigError(f"unknown config fields: {sorted(cfg)}")
    return ExperimentConfig(model=model, model_cfg=model_cfg, grid_n=grid_n,
                            eps_list=eps_list, shape=shape, t_end=t_end,
                            checkpoints=checkpoints, eta_g=eta_g, eta_p=eta_p,
                            m0_ceiling=m0_ceiling, seed=seed, out_dir=out_dir,
                            markers=markers)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def load_experiment(path) -> ExperimentConfig:
    return experiment_from_dict(load_config(path))


def load_model(path) -> ModelSpec:
    """Model from either a bare model object or a full experiment config."""
    cfg = load_config(path)
    if "model" in cfg:
        cfg = cfg["model"]
    return model_from_config(cfg)


def ensure_out_dir(out_dir) -> Path:
    p = Path(out_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p
