"""Built-in invariant suites run by ``pennsfv verify``.

Each check returns ``(passed, detail)``.  A mutation mode injects a known
fault (a sign flip in the pressure stencil) to confirm that the weak-strong
equivalence check catches it.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import diagnostics as dg
from . import scheme, weakform
from .geometry import Ring, classify_cells
from .grid import GridSpec, State, build_grid, neighbor
from .ops import central_grad, check_ibp, div_h, grad_E, laplace_h, project, upwind_flux, flux_divergence

MUTATIONS = ("pressure-sign",)


def _rng(seed=1234):
    return np.random.default_rng(seed)


def _random_state(grid, rng, umax=0.5):
    rho = rng.uniform(0.5, 2.0, grid.ncells)
    u = rng.uniform(-umax, umax, (grid.d, grid.ncells))
    return State(grid, rho, u)


def _momentum_residual(mutate: str | None) -> Callable:
    if mutate is None:
        return scheme.momentum_residual
    if mutate != "pressure-sign":
        raise ValueError(f"unknown mutation {mutate!r}; choose from {MUTATIONS}")

    def flipped(new, old, mask, params, dt):
        R = scheme.momentum_residual(new, old, mask, params, dt)
        return R - 2 * central_grad(new.grid, params.pressure(new.rho))

    return flipped


def check_grid(mutate=None):
    g = build_grid(GridSpec(2, 6))
    ok = all(neighbor(g, neighbor(g, K, i, 1), i, -1) == K for K in range(g.ncells) for i in range(2))
    counts = np.bincount(g.faces[:, 1], minlength=g.ncells)
    ok &= bool(np.all(counts == g.d)) and g.nfaces == g.d * g.ncells
    return ok, "neighbour round trip and face partition"


def check_ops(mutate=None):
    rng = _rng()
    g = build_grid(GridSpec(2, 8))
    worst = 0.0
    for _ in range(5):
        f, v = rng.standard_normal(g.ncells), rng.standard_normal(g.ncells)
        for ax in range(2):
            worst = max(worst, check_ibp(g, f, v, ax))
        w = rng.standard_normal((2, g.ncells))
        worst = max(worst, abs(float(div_h(g, w).sum())) * g.cell_volume)
        F = upwind_flux(g, f, w, 0.6)
        worst = max(worst, abs(float(flux_divergence(g, F).sum())) * g.cell_volume)
    c = np.full(g.ncells, 3.0)
    worst = max(worst, float(np.abs(grad_E(g, c)).max()), float(np.abs(laplace_h(g, c)).max()))
    return worst <= 1e-12, f"max identity residual {worst:.2e}"


def check_scheme(mutate=None, states=5, tests=4):
    rng = _rng(7)
    g = build_grid(GridSpec(2, 8))
    mask = rng.uniform(size=g.ncells) < 0.7
    params = scheme.FluidParams(alpha=0.6, eps=0.01, lam=0.05)
    mom = _momentum_residual(mutate)
    worst = 0.0
    dt = 1e-2
    for _ in range(states):
        old, new = _random_state(g, rng), _random_state(g, rng)
        R1 = scheme.continuity_residual(new, old, params, dt)
        R2 = mom(new, old, mask, params, dt)
        scale = weakform.weak_scale(new, old, params, dt)
        for _ in range(tests):
            phi = rng.standard_normal(g.ncells)
            phiv = rng.standard_normal((2, g.ncells))
            w1 = weakform.continuity_weak(new, old, phi, params.alpha, dt)
            w2 = weakform.momentum_weak(new, old, mask, phiv, params, dt)
            s1 = g.cell_volume * math.fsum((R1 * phi).tolist())
            s2 = g.cell_volume * math.fsum((R2 * phiv).ravel().tolist())
            worst = max(worst, abs(w1 - s1) / scale, abs(w2 - s2) / scale)
    return worst <= 1e-12, f"max relative weak-strong mismatch {worst:.2e}"


def check_energy(mutate=None):
    rng = _rng(11)
    g = build_grid(GridSpec(2, 8))
    mask = np.ones(g.ncells, dtype=bool)
    mask[:8] = False
    params = scheme.FluidParams(alpha=0.6, eps=0.05)
    old = State(g, rng.uniform(0.8, 1.2, g.ncells), rng.uniform(-0.1, 0.1, (2, g.ncells)))
    solver = scheme.SolverParams(dt=1e-3, T=1e-3)
    new, _ = scheme.step_implicit(old, mask, params, solver)
    rec = dg.energy_audit(new, old, mask, params, solver.dt)
    E0 = dg.total_energy(old, params)
    tol = 10 * solver.tol_nl * E0
    comps = rec.dissipation()
    ok = rec.slack <= tol and abs(rec.kin_residual) <= tol and abs(rec.slack_exact) <= tol
    ok &= all(v >= -1e-14 * E0 for v in comps.values())
    return ok, f"slack {rec.slack:.2e}, kinetic residual {rec.kin_residual:.2e}, bound {tol:.1e}"


def check_bregman(mutate=None):
    rng = _rng(3)
    worst = 0.0
    for gamma in (1.4, 2.0, 3.0):
        p = scheme.FluidParams(gamma=gamma)
        r, s = rng.uniform(1e-3, 10, 10_000), rng.uniform(1e-3, 10, 10_000)
        worst = min(worst, float(dg.bregman(r, s, p).min()))
    return worst >= 0.0, f"min Bregman distance {worst:.2e}"


def check_geometry(mutate=None):
    rng = _rng(5)
    g = build_grid(GridSpec(2, 20))
    ring = Ring((0.0, 0.0), 0.2, 0.7)
    mask = classify_cells(ring, g)
    cells = np.flatnonzero(mask)
    pts = g.centers()[:, cells, None] + g.h * rng.uniform(-0.5, 0.5, (2, len(cells), 100))
    inside = ring.inside(pts.reshape(2, -1))
    return bool(inside.all()), f"{len(cells)} fluid cells, 100 random points each"


def check_exponents(mutate=None):
    cases = [(dg.beta_D(2, 1.4, 1.0), -3 / 7), (dg.beta_RE(0.6), 0.6), (dg.beta_M(3, 2.5, 0.6), -0.2),
             (dg.beta_RE(1.0), 1.0), (dg.beta_R(2, 1.1, 0.6), 0.0), (dg.beta_M(3, 3.0, 0.6), 0.0)]
    worst = max(abs(a - b) for a, b in cases)
    return worst <= 1e-12, f"max deviation {worst:.1e}"


SUITES = {
    "grid": check_grid,
    "ops": check_ops,
    "scheme": check_scheme,
    "energy": check_energy,
    "bregman": check_bregman,
    "geometry": check_geometry,
    "exponents": check_exponents,
}


def run_suites(names=None, mutate: str | None = None) -> dict[str, tuple[bool, str]]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    return {n: SUITES[n](mutate=mutate) for n in names}
