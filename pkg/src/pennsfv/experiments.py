"""Initial data of the three ring experiments, parameter sweeps and study driver."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import diagnostics as dg
from . import io
from .geometry import Flower, Ring, Shape, classify_cells, masked_norm, _box_distance_range
from .grid import Grid, GridSpec, State, build_grid
from .ops import project
from .scheme import FluidParams, SolverParams, run

log = logging.getLogger(__name__)

H0 = 0.2
SIDE = 2.0


class CacheMismatch(RuntimeError):
    pass


def _swirl(x: np.ndarray, amp: np.ndarray) -> np.ndarray:
    r = np.sqrt(x[0] ** 2 + x[1] ** 2)
    safe = np.where(r > 0, r, 1.0)
    return np.stack([amp * x[1] / safe, -amp * x[0] / safe])


def _radius(x):
    return np.sqrt(x[0] ** 2 + x[1] ** 2)


def exp1_data(x: np.ndarray) -> np.ndarray:
    """Rows ``(rho, u_1, u_2)`` of the continuous-extension ring data."""
    r = _radius(x)
    ring = (r > 0.2) & (r < 0.7)
    amp = np.where(ring, np.sin(4 * np.pi * (r - 0.2)), 0.0)
    return np.vstack([np.ones_like(r), _swirl(x, amp)])


def exp2_data(x: np.ndarray) -> np.ndarray:
    r = _radius(x)
    out = exp1_data(x)
    out[0] = np.where(r < 0.2, 0.01, np.where(r < 0.7, 1.0, 2.0))
    return out


def exp3_data(x: np.ndarray, delta: float = 0.05) -> np.ndarray:
    r = _radius(x)
    flower = Flower(center=(0.0, 0.0), delta=delta)
    petals = flower.in_petals(x)
    rho = np.where(r < 0.2, 0.01, np.where(petals, 1.0, 0.01))
    c = np.cos(8 * np.pi * (r - 0.2))
    amp = np.where((r > 0.2) & (r < 0.45), 1 - c, np.where((r >= 0.45) & (r < 0.7), -1 + c, 0.0))
    return np.vstack([rho, _swirl(x, amp)])


@dataclass(frozen=True)
class ExperimentDef:
    id: str
    shape: Shape
    data: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    jump_radii: tuple[float, ...] = (0.2, 0.7)
    a: float = 1.0
    gamma: float = 1.4
    mu: float = 0.1
    lam: float = 0.0
    alpha: float = 0.6
    T: float = 0.1

    def fluid(self, eps: float, d: int = 2) -> FluidParams:
        return FluidParams(a=self.a, gamma=self.gamma, mu=self.mu, lam=self.lam,
                           alpha=self.alpha, eps=eps, d=d)


EXPERIMENTS = {
    "exp1": ExperimentDef("exp1", Ring(center=(0.0, 0.0), r_in=0.2, r_out=0.7), exp1_data),
    "exp2": ExperimentDef("exp2", Ring(center=(0.0, 0.0), r_in=0.2, r_out=0.7), exp2_data),
    "exp3": ExperimentDef("exp3", Flower(center=(0.0, 0.0), r_in=0.2, base=0.7, delta=0.05),
                          exp3_data, jump_radii=(0.2, 0.45, 0.7)),
}


def get_experiment(name: str) -> ExperimentDef:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None


def grid_for_level(m: int, side: float = SIDE) -> Grid:
    """Grid with ``h = 0.2 * 2**-m`` on the default side-2 torus centred at 0."""
    n = int(round(side / (H0 * 2.0 ** -m)))
    return build_grid(GridSpec(d=2, n=n, side=side, origin=(-side / 2, -side / 2)))


def crossed_cells(defn: ExperimentDef, grid: Grid) -> np.ndarray:
    """Cells cut by a discontinuity (or kink) of the initial data."""
    dmin, dmax = _box_distance_range(grid, np.asarray(defn.shape.center))
    out = np.zeros(grid.ncells, dtype=bool)
    for R in defn.jump_radii:
        out |= (dmin <= R) & (dmax >= R)
    if isinstance(defn.shape, Flower):
        inside, outside = defn.shape.certify(grid)
        band = (dmax >= defn.shape.base) & (dmin <= defn.shape.base + 2 * defn.shape.delta)
        out |= band & ~(inside | outside)
    return out


def initial_state(defn: ExperimentDef, grid: Grid) -> State:
    """Cell averages of density and momentum; velocity by division."""
    classify_cells(defn.shape, grid)  # validates shape/grid compatibility

    def rho_m(x):
        q = defn.data(x)
        return np.vstack([q[0], q[0] * q[1:]])

    vals = project(rho_m, grid, order=3, crossed=crossed_cells(defn, grid))
    rho = vals[0]
    if not np.all(rho > 0):
        raise ValueError("extended initial density must be positive")
    return State(grid, rho, vals[1:] / rho, 0.0)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

EPS_RULES: dict[str, Callable[[int], float]] = {
    "sqrt": lambda m: 2.0 ** (-(m + 14) / 2),
    "quadratic": lambda m: 4.0 ** (-(m + 2)),
    "quartic": lambda m: 16.0 ** (-m),
}


@dataclass(frozen=True)
class StudyPlan:
    """Either a fixed-eps h-sweep or paired ``(h, eps(h))`` refinement."""

    mode: str = "fixed"
    levels: tuple[int, ...] = (0, 1, 2)
    m_ref: int = 3
    eps: float | None = 4.0 ** -4
    rule: str | None = None
    eps_ref: float | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "paired"):
            raise ValueError(f"unknown study mode {self.mode!r}")
        if self.mode == "fixed" and self.eps is None:
            raise ValueError("fixed-eps study needs eps")
        if self.mode == "paired" and self.rule not in EPS_RULES:
            raise ValueError(f"paired study needs rule in {sorted(EPS_RULES)}")
        if any(m > self.m_ref for m in self.levels):
            raise ValueError("reference level must be the finest")

    def eps_for(self, m: int) -> float:
        if self.mode == "fixed":
            return float(self.eps)
        return EPS_RULES[self.rule](m)

    def reference_eps(self) -> float:
        if self.mode == "fixed":
            return float(self.eps)
        return float(self.eps_ref) if self.eps_ref is not None else EPS_RULES[self.rule](self.m_ref)

    def cases(self) -> list[tuple[int, float]]:
        return [(m, self.eps_for(m)) for m in self.levels]


@dataclass(frozen=True)
class CaseConfig:
    """Everything that determines one ``(h, eps)`` run; hashed for the cache."""

    experiment: str
    m: int
    eps: float
    c_t: float = 0.25
    tol_nl: float = 1e-10
    linear_solver: str = "direct"
    a: float = 1.0
    gamma: float = 1.4
    mu: float = 0.1
    lam: float = 0.0
    alpha: float = 0.6
    T: float = 0.1

    @classmethod
    def for_experiment(cls, defn: ExperimentDef, m: int, eps: float, **kw) -> "CaseConfig":
        return cls(defn.id, m, eps, a=defn.a, gamma=defn.gamma, mu=defn.mu, lam=defn.lam,
                   alpha=defn.alpha, T=defn.T, **kw)

    def key(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def definition(self) -> ExperimentDef:
        return replace(get_experiment(self.experiment), a=self.a, gamma=self.gamma, mu=self.mu,
                       lam=self.lam, alpha=self.alpha, T=self.T)

    def fluid(self) -> FluidParams:
        return self.definition().fluid(self.eps)

    def solver(self, grid: Grid) -> SolverParams:
        return SolverParams(dt=self.c_t * grid.h, T=self.T, tol_nl=self.tol_nl,
                            linear_solver=self.linear_solver)


@dataclass
class CaseResult:
    config: CaseConfig
    grid: Grid
    final: State
    records: list


def run_case(cfg: CaseConfig, out_dir: Path | None = None, resume: bool = True,
             keep_states: bool = False, shape: Shape | None = None):
    """Run (or load from cache) one case; returns ``(CaseResult, Trajectory or None)``.

    ``shape`` replaces the registered domain; such runs are not cached because
    the cache key does not describe the shape.
    """
    defn = cfg.definition()
    if shape is not None and shape != defn.shape:
        if out_dir is not None:
            raise ValueError("cannot cache a case whose shape differs from its experiment")
        defn = replace(defn, shape=shape)
    grid = grid_for_level(cfg.m)
    key = cfg.key()
    if out_dir is not None and resume:
        snap = out_dir / f"{key}.pnsf"
        meta = out_dir / f"{key}.json"
        if snap.exists() and meta.exists():
            stored = json.loads(meta.read_text())
            if stored != asdict(cfg):
                raise CacheMismatch(f"cached case {key} was produced by a different config")
            final, _hdr = io.read_pnsf(snap)
            if not final.grid.same_as(grid):
                raise CacheMismatch(f"cached case {key} lives on a different grid")
            return CaseResult(cfg, grid, final, []), None
    params = cfg.fluid()
    mask = classify_cells(defn.shape, grid)
    init = initial_state(defn, grid)
    solver = cfg.solver(grid)
    records: list[dg.DiagnosticsRecord] = []

    def audit(k, old, new, stats):
        records.append(dg.energy_audit(new, old, mask, params, solver.dt, shape=defn.shape))

    log.info("running %s m=%d eps=%g (%d steps)", cfg.experiment, cfg.m, cfg.eps, solver.nsteps)
    traj = run(init, mask, params, solver, hooks=[audit], keep_states=keep_states)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        header = case_header(cfg, params, solver, grid)
        io.write_pnsf(out_dir / f"{key}.pnsf", traj.final, params)
        io.write_diagnostics_csv(out_dir / f"diag_{cfg.experiment}_m{cfg.m}_{key}.csv",
                                 records, header)
        # metadata last: its presence marks a complete cache entry
        (out_dir / f"{key}.json").write_text(json.dumps(asdict(cfg), sort_keys=True))
    return CaseResult(cfg, grid, traj.final, records), traj


def _run_case_to_cache(args):
    cfg, out_dir, resume = args
    run_case(cfg, out_dir, resume)
    return cfg.key()


def case_header(cfg: CaseConfig, params: FluidParams, solver: SolverParams, grid: Grid) -> dict:
    return {"config_hash": cfg.key(), "experiment": cfg.experiment, "m": cfg.m, "n": grid.n,
            "h": grid.h, "side": grid.side, "eps": params.eps, "a": params.a,
            "gamma": params.gamma, "mu": params.mu, "lambda": params.lam, "nu": params.nu,
            "alpha": params.alpha, "dt": solver.dt, "T": solver.T, "c_t": cfg.c_t,
            "tol_nl": solver.tol_nl, "linear_solver": solver.linear_solver}


@dataclass
class ErrorRow:
    h: float
    eps: float
    E_rho: float
    E_u: float
    E_gradu: float
    RE: float


def study_cases(plan: StudyPlan, defn: ExperimentDef, c_t: float = 0.25) -> tuple[CaseConfig, list[CaseConfig]]:
    ref = CaseConfig.for_experiment(defn, plan.m_ref, plan.reference_eps(), c_t=c_t)
    return ref, [CaseConfig.for_experiment(defn, m, eps, c_t=c_t) for m, eps in plan.cases()]


def run_study(plan: StudyPlan, experiment: str | ExperimentDef, out_dir: Path | None = None,
              c_t: float = 0.25, resume: bool = True, grad_transfer: str = "exact",
              workers: int = 1, collect: dict | None = None) -> tuple[list[ErrorRow], list[dict]]:
    """Errors of every case against the reference case, plus consecutive EOCs.

    With ``workers > 1`` and an output directory, the cases run in separate
    processes first and are then read back from the snapshot cache.  If
    ``collect`` is a dict, every :class:`CaseResult` is stored in it by case key.
    """
    defn = get_experiment(experiment) if isinstance(experiment, str) else experiment
    ref_cfg, cfgs = study_cases(plan, defn, c_t)
    out_dir = Path(out_dir) if out_dir is not None else None
    if workers > 1 and out_dir is not None:
        from concurrent.futures import ProcessPoolExecutor
        todo = list(dict.fromkeys([ref_cfg, *cfgs]))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_run_case_to_cache, [(c, out_dir, resume) for c in todo]))
        resume = True
    ref, _ = run_case(ref_cfg, out_dir, resume)
    if collect is not None:
        collect[ref_cfg.key()] = ref
    params = ref_cfg.fluid()
    rows = []
    for cfg in cfgs:
        res = ref if cfg == ref_cfg else run_case(cfg, out_dir, resume)[0]
        if collect is not None:
            collect[cfg.key()] = res
        e = dg.error_norms(res.final, ref.final, params, grad_transfer=grad_transfer)
        rows.append(ErrorRow(res.grid.h, cfg.eps, e.E_rho, e.E_u, e.E_gradu, e.RE))
    eoc_rows = eoc_table(rows)
    if out_dir is not None:
        header = {"study_hash": study_hash(plan, ref_cfg, grad_transfer),
                  "experiment": defn.id, "mode": plan.mode, "levels": list(plan.levels),
                  "m_ref": plan.m_ref, "eps_ref": ref_cfg.eps, "rule": plan.rule,
                  "grad_transfer": grad_transfer, "c_t": c_t, "side": SIDE,
                  "a": defn.a, "gamma": defn.gamma, "mu": defn.mu, "lambda": defn.lam,
                  "alpha": defn.alpha, "T": defn.T, "tol_nl": ref_cfg.tol_nl,
                  "linear_solver": ref_cfg.linear_solver}
        io.write_errors_csv(out_dir / "errors.csv", rows, header)
        io.write_eoc_csv(out_dir / "eoc.csv", eoc_rows, header)
    return rows, eoc_rows


def study_hash(plan: StudyPlan, ref_cfg: CaseConfig, grad_transfer: str) -> str:
    blob = json.dumps({"plan": asdict(plan), "ref": asdict(ref_cfg),
                       "grad_transfer": grad_transfer}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def eoc_table(rows: Sequence[ErrorRow]) -> list[dict]:
    out = []
    for a, b in zip(rows[:-1], rows[1:]):
        entry = {"h_coarse": a.h, "h_fine": b.h}
        for name in ("E_rho", "E_u", "E_gradu", "RE"):
            ea, eb = getattr(a, name), getattr(b, name)
            entry[name] = dg.eoc([ea, eb], [a.h, b.h])[0] if ea > 0 and eb > 0 else float("nan")
        out.append(entry)
    return out


def penalty_profile(experiment: str | ExperimentDef, m: int, eps_list: Sequence[float],
                    c_t: float = 0.25, out_dir: Path | None = None) -> list[dict]:
    """Solid-region velocity at ``T`` and accumulated penalty dissipation for each eps."""
    defn = get_experiment(experiment) if isinstance(experiment, str) else experiment
    grid = grid_for_level(m)
    solid = ~classify_cells(defn.shape, grid)
    init = initial_state(defn, grid)
    table = []
    for eps in eps_list:
        cfg = CaseConfig.for_experiment(defn, m, eps, c_t=c_t)
        res, _ = run_case(cfg, out_dir, resume=False, shape=defn.shape)
        u = res.final.u
        speed = np.sqrt((u ** 2).sum(axis=0))
        dt = c_t * grid.h
        table.append({"eps": eps,
                      "u_L2_solid": masked_norm(grid, u, solid, 2),
                      "u_Linf_solid": float(speed[solid].max()) if solid.any() else 0.0,
                      "penalty_integral": dt * math.fsum(r.pen_diss for r in res.records),
                      "E0": dg.total_energy(init, cfg.fluid())})
    return table
