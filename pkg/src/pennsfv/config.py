"""TOML run/study configuration: parsing, validation and serialization."""
from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import tomli
import tomli_w

from .experiments import EPS_RULES, EXPERIMENTS, StudyPlan
from .geometry import shape_from_config
from .grid import GridSpec
from .scheme import FluidParams, SolverParams


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "grid": {"d": 2, "side": 2.0},
    "solver": {"mode": "implicit", "c_t": 0.25, "T": 0.1, "tol_nl": 1e-10, "max_picard": 100,
               "tol_lin": 1e-12, "linear_solver": "direct", "c_cfl": 0.4},
    "output": {"dir": "out", "snapshot_every": 0, "vtk": False},
}
REQUIRED_FLUID = ("a", "gamma", "mu", "lambda", "alpha")
SECTIONS = ("grid", "shape", "fluid", "solver", "initial", "study", "output")


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_text(text: str, source: str = "<config>") -> dict:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return normalize(raw, source)


def load(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_text(text, str(p))


def normalize(raw: dict, source: str = "<config>") -> dict:
    """Fill defaults and validate; returns a plain dict that round-trips through TOML."""
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")
    cfg = _merge(DEFAULTS, raw)
    fluid = cfg.get("fluid")
    if fluid is None:
        raise ConfigError(f"{source}: missing [fluid] section")
    for key in REQUIRED_FLUID:
        if key not in fluid:
            raise ConfigError(f"{source}: missing required key 'fluid.{key}'")
    study = cfg.get("study")
    if "eps" not in fluid and not (study and study.get("mode") == "paired"):
        raise ConfigError(f"{source}: missing required key 'fluid.eps'")
    init = cfg.get("initial", {})
    exp = init.get("experiment")
    if exp is None:
        raise ConfigError(f"{source}: missing required key 'initial.experiment'")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"{source}: unknown experiment {exp!r}")
    grid = cfg["grid"]
    if study is None and "n" not in grid and "level" not in grid:
        raise ConfigError(f"{source}: [grid] needs 'n' or 'level'")
    try:
        validate(cfg)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def validate(cfg: dict) -> None:
    f = cfg["fluid"]
    FluidParams(a=float(f["a"]), gamma=float(f["gamma"]), mu=float(f["mu"]),
                lam=float(f["lambda"]), alpha=float(f["alpha"]),
                eps=float(f.get("eps", 1.0)), d=int(cfg["grid"]["d"]))
    s = cfg["solver"]
    SolverParams(dt=float(s.get("dt", s["c_t"])), T=float(s["T"]), mode=s["mode"],
                 linear_solver=s["linear_solver"])
    if "shape" in cfg:
        shape_from_config(cfg["shape"])
    if "study" in cfg:
        study_plan(cfg)


def grid_spec(cfg: dict) -> GridSpec:
    g = cfg["grid"]
    side = float(g["side"])
    if "n" in g:
        n = int(g["n"])
    else:
        n = int(round(side / (0.2 * 2.0 ** -int(g["level"]))))
    origin = tuple(float(o) for o in g["origin"]) if "origin" in g else None
    return GridSpec(int(g["d"]), n, side, origin)


def fluid_params(cfg: dict, eps: float | None = None) -> FluidParams:
    f = cfg["fluid"]
    return FluidParams(a=float(f["a"]), gamma=float(f["gamma"]), mu=float(f["mu"]),
                       lam=float(f["lambda"]), alpha=float(f["alpha"]),
                       eps=float(eps if eps is not None else f["eps"]), d=int(cfg["grid"]["d"]))


def solver_params(cfg: dict, h: float) -> SolverParams:
    s = cfg["solver"]
    dt = float(s["dt"]) if "dt" in s else float(s["c_t"]) * h
    return SolverParams(dt=dt, T=float(s["T"]), mode=s["mode"], tol_nl=float(s["tol_nl"]),
                        max_picard=int(s["max_picard"]), tol_lin=float(s["tol_lin"]),
                        max_lin=s.get("max_lin"), linear_solver=s["linear_solver"],
                        c_cfl=float(s["c_cfl"]))


def study_plan(cfg: dict, paper_scale: bool = False) -> StudyPlan:
    st = cfg["study"]
    mode = st.get("mode", "fixed")
    levels = tuple(int(m) for m in st.get("levels", (0, 1, 2)))
    m_ref = int(st.get("m_ref", max(levels) + 1))
    rule = st.get("rule")
    if rule is not None and rule not in EPS_RULES:
        raise ConfigError(f"unknown eps rule {rule!r}; choose from {sorted(EPS_RULES)}")
    eps_ref = st.get("eps_ref")
    if paper_scale:
        levels, m_ref = (0, 1, 2, 3), 4
        eps_ref = None
    eps = float(st.get("eps", cfg["fluid"].get("eps", 0.0))) if mode == "fixed" else None
    return StudyPlan(mode=mode, levels=levels, m_ref=m_ref, eps=eps, rule=rule,
                     eps_ref=None if eps_ref is None else float(eps_ref))


def dumps(cfg: dict) -> str:
    return tomli_w.dumps(cfg)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def apply_overrides(cfg: dict, out: str | None = None) -> dict:
    cfg = copy.deepcopy(cfg)
    if out is not None:
        cfg["output"]["dir"] = out
    return cfg
