"""Flat key = value run configuration: sections [domain], [norm], [solver],
[sweep], [output].  Unknown keys are errors; every tolerance is validated."""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .grids import Box, Polytope, Slab, Torus, WulffBall
from .norms import DiagQuadratic, Euclidean, NormEngine, PNorm, Quadratic


class ConfigError(ValueError):
    pass


_KNOWN = {
    "domain": {"kind", "lo", "hi", "normal", "width", "extent", "radius", "center",
               "R", "r", "a", "halfspaces", "resolution"},
    "norm": {"kind", "dim", "weights", "p", "matrix", "polar"},
    "solver": {"sweep_tol_factor", "max_rounds", "ridge_tau", "descent_max_iters",
               "descent_tol", "superharmonic_mode", "superharmonic_tol", "expect",
               "distance_source"},
    "sweep": {"theta", "epsilons", "betas", "cutoff", "cutoff_x0", "cutoff_delta"},
    "output": {"dir", "prefix", "seed"},
}


@dataclass
class RunConfig:
    text: str
    domain: object
    engine: NormEngine
    resolution: float
    sweep_tol_factor: float = 1e-6
    max_rounds: int = 500
    ridge_tau: float = 0.2
    descent_max_iters: int = 2000
    descent_tol: float = 1e-6
    superharmonic_mode: str = "distributional"
    superharmonic_tol: float | None = None
    expect: bool | None = None
    distance_source: str = "sweep"
    theta: float = 0.75
    epsilons: tuple = (0.2, 0.1, 0.05, 0.025)
    betas: tuple = (0.0, 0.5, 1.0, -1.5)
    cutoff: object = "global"
    out_dir: str = "."
    prefix: str = "run"
    seed: int = 0

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]


def _floats(s):
    return tuple(float(v) for v in s.replace(";", ",").split(",") if v.strip())


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from exc

    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
    if "domain" not in cp or "norm" not in cp:
        raise ConfigError("sections [domain] and [norm] are required")

    engine = _build_engine(cp["norm"])
    domain = _build_domain(cp["domain"], engine)
    if domain.dim != engine.dim:
        raise ConfigError(
            f"domain dimension {domain.dim} does not match norm dimension {engine.dim}"
        )
    res = cp["domain"].getfloat("resolution", fallback=None)
    if res is None or res <= 0:
        raise ConfigError("domain.resolution must be a positive number")

    cfg = RunConfig(text=text, domain=domain, engine=engine, resolution=res)
    s = cp["solver"] if "solver" in cp else {}
    if s:
        cfg.sweep_tol_factor = _positive(s, "sweep_tol_factor", cfg.sweep_tol_factor)
        cfg.max_rounds = int(_positive(s, "max_rounds", cfg.max_rounds))
        cfg.ridge_tau = _positive(s, "ridge_tau", cfg.ridge_tau)
        cfg.descent_max_iters = int(_positive(s, "descent_max_iters", cfg.descent_max_iters))
        cfg.descent_tol = _positive(s, "descent_tol", cfg.descent_tol)
        cfg.superharmonic_mode = s.get("superharmonic_mode", cfg.superharmonic_mode)
        if cfg.superharmonic_mode not in ("pointwise", "distributional"):
            raise ConfigError("solver.superharmonic_mode must be pointwise or distributional")
        if "superharmonic_tol" in s:
            cfg.superharmonic_tol = _positive(s, "superharmonic_tol", 1.0)
        if "expect" in s:
            val = s["expect"].strip().lower()
            if val not in ("true", "false"):
                raise ConfigError("solver.expect must be true or false")
            cfg.expect = val == "true"
        cfg.distance_source = s.get("distance_source", cfg.distance_source)
        if cfg.distance_source not in ("sweep", "bruteforce", "oracle"):
            raise ConfigError("solver.distance_source must be sweep, bruteforce or oracle")
    w = cp["sweep"] if "sweep" in cp else {}
    if w:
        if "theta" in w:
            cfg.theta = float(w["theta"])
            if not (0.5 < cfg.theta < 1.0):
                raise ConfigError("sweep.theta must lie strictly inside (1/2, 1)")
        if "epsilons" in w:
            cfg.epsilons = _floats(w["epsilons"])
            if any(not (0 < e <= 0.5) for e in cfg.epsilons):
                raise ConfigError("sweep.epsilons must lie in (0, 1/2]")
        if "betas" in w:
            cfg.betas = _floats(w["betas"])
        kind = w.get("cutoff", "global")
        if kind == "global":
            cfg.cutoff = "global"
        elif kind == "local":
            from .hardy import LocalCutoff

            if "cutoff_x0" not in w or "cutoff_delta" not in w:
                raise ConfigError("local cutoff needs sweep.cutoff_x0 and sweep.cutoff_delta")
            cfg.cutoff = LocalCutoff(_floats(w["cutoff_x0"]), float(w["cutoff_delta"]))
        else:
            raise ConfigError("sweep.cutoff must be global or local")
    o = cp["output"] if "output" in cp else {}
    if o:
        cfg.out_dir = o.get("dir", cfg.out_dir)
        cfg.prefix = o.get("prefix", cfg.prefix)
        if "seed" in o:
            cfg.seed = int(o["seed"])
    return cfg


def _positive(section, key, default):
    if key not in section:
        return default
    v = float(section[key])
    if v <= 0:
        raise ConfigError(f"{key} must be positive")
    return v


def _build_engine(sec) -> NormEngine:
    kind = sec.get("kind", None)
    polar = sec.get("polar", "closed-form")
    if polar not in ("closed-form", "numeric"):
        raise ConfigError("norm.polar must be closed-form or numeric")
    try:
        if kind == "euclidean":
            return NormEngine(Euclidean(int(sec.get("dim", 2))), polar_mode=polar)
        if kind == "diag":
            return NormEngine(DiagQuadratic(_floats(sec["weights"])), polar_mode=polar)
        if kind == "quadratic":
            vals = _floats(sec["matrix"])
            n = int(round(len(vals) ** 0.5))
            if n * n != len(vals):
                raise ConfigError("norm.matrix must be a square row-major list")
            mat = tuple(tuple(vals[i * n : (i + 1) * n]) for i in range(n))
            return NormEngine(Quadratic(mat), polar_mode=polar)
        if kind == "pnorm":
            return NormEngine(PNorm(float(sec["p"]), int(sec.get("dim", 2))), polar_mode=polar)
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid norm: {exc}") from exc
    raise ConfigError("norm.kind must be euclidean, diag, quadratic or pnorm")


def _build_domain(sec, engine):
    kind = sec.get("kind", None)
    try:
        if kind == "box":
            return Box(_floats(sec["lo"]), _floats(sec["hi"]))
        if kind == "slab":
            extent = float(sec["extent"]) if "extent" in sec else None
            return Slab(_floats(sec["normal"]), float(sec["width"]), extent)
        if kind == "wulff":
            center = _floats(sec["center"]) if "center" in sec else (0.0,) * engine.dim
            return WulffBall(engine, float(sec["radius"]), center)
        if kind == "torus":
            return Torus(float(sec["R"]), float(sec["r"]), float(sec["a"]))
        if kind == "polytope":
            rows = [r for r in sec["halfspaces"].split(";") if r.strip()]
            return Polytope(tuple(tuple(float(v) for v in r.split(",")) for r in rows))
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid domain: {exc}") from exc
    raise ConfigError("domain.kind must be box, slab, wulff, torus or polytope")
