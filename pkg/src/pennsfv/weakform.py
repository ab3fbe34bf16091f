"""Face-by-face evaluation of the scheme's weak form.

Deliberately written with plain Python loops over the face table and no
shared code with the stencil kernels, so it can serve as an independent
oracle for the strong-form residuals: for every test field ``phi``,
``sum_K |K| R_K . phi_K`` must equal the weak-form value computed here.
"""
from __future__ import annotations

import math

import numpy as np

from .grid import Grid, State


def _faces(grid: Grid):
    for axis, K, L in grid.faces:
        yield int(axis), int(K), int(L)


def _div(grid: Grid, v: np.ndarray) -> np.ndarray:
    # (1/h) sum over the faces of K of <v>.n with outward n
    out = np.zeros(grid.ncells)
    for axis, K, L in _faces(grid):
        flux = 0.5 * (v[axis, K] + v[axis, L])
        out[K] += flux / grid.h
        out[L] -= flux / grid.h
    return out


def _upwind(r_in, r_out, vn, h_alpha):
    up = r_in if vn >= 0 else r_out
    return up * vn - h_alpha * (r_out - r_in)


def continuity_weak(new: State, old: State, phi: np.ndarray, alpha: float, dt: float) -> float:
    """``int D_t rho phi - sum_sigma |sigma| F(rho, u) [[phi]]``."""
    g = new.grid
    ha = g.h ** alpha
    terms = [g.cell_volume * (new.rho[K] - old.rho[K]) / dt * phi[K] for K in range(g.ncells)]
    for axis, K, L in _faces(g):
        vn = 0.5 * (new.u[axis, K] + new.u[axis, L])
        F = _upwind(new.rho[K], new.rho[L], vn, ha)
        terms.append(-g.face_area * F * (phi[L] - phi[K]))
    return math.fsum(terms)


def momentum_weak(new: State, old: State, mask: np.ndarray, phi: np.ndarray, params,
                  dt: float) -> float:
    """Weak momentum form tested with a vector field ``phi`` of shape ``(d, N)``."""
    g = new.grid
    d, N, hd = g.d, g.ncells, g.cell_volume
    ha = g.h ** params.alpha
    rho, u = new.rho, new.u
    terms = []
    for K in range(N):
        for j in range(d):
            dm = (rho[K] * u[j, K] - old.rho[K] * old.u[j, K]) / dt
            terms.append(hd * dm * phi[j, K])
            if not mask[K]:
                terms.append(hd * u[j, K] * phi[j, K] / params.eps)
    for axis, K, L in _faces(g):
        vn = 0.5 * (u[axis, K] + u[axis, L])
        for j in range(d):
            F = _upwind(rho[K] * u[j, K], rho[L] * u[j, L], vn, ha)
            jphi = phi[j, L] - phi[j, K]
            terms.append(-g.face_area * F * jphi)
            # mu int grad_E u : grad_E phi with |D_sigma| = h^d
            terms.append(params.mu * hd * (u[j, L] - u[j, K]) * jphi / g.h ** 2)
    p = params.a * rho ** params.gamma
    div_phi = _div(g, phi)
    terms += [-hd * p[K] * div_phi[K] for K in range(N)]
    if params.nu != 0.0:
        div_u = _div(g, u)
        terms += [params.nu * hd * div_u[K] * div_phi[K] for K in range(N)]
    return math.fsum(terms)


def weak_scale(new: State, old: State, params, dt: float) -> float:
    """Magnitude used to turn weak/strong differences into relative errors."""
    big = (np.abs(new.rho).max() + np.abs(old.rho).max()) / dt
    big += (np.abs(new.m).max() + np.abs(old.m).max()) / dt
    big += params.a * np.abs(new.rho).max() ** params.gamma / new.grid.h
    big += params.mu * np.abs(new.u).max() / new.grid.h ** 2 + np.abs(new.u).max() / params.eps
    return float(big * new.grid.volume)
