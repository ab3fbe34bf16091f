"""Discrete calculus on piecewise constants and the upwind numerical flux."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import _kernels
from .grid import Grid, cell_integral


def _as_stack(field: np.ndarray) -> tuple[np.ndarray, bool]:
    f = np.asarray(field, dtype=float)
    if f.ndim == 1:
        return f[None, :], True
    return f, False


def jump(grid: Grid, field: np.ndarray, face: tuple[int, int]):
    """``v(L) - v(K)`` across face ``(axis, K)`` (outer minus inner w.r.t. ``+e_axis``)."""
    axis, K = face
    L = grid.nbr[K, axis, 1]
    f = np.asarray(field)
    return f[..., L] - f[..., K]


def average(grid: Grid, field: np.ndarray, face: tuple[int, int]):
    axis, K = face
    L = grid.nbr[K, axis, 1]
    f = np.asarray(field)
    return 0.5 * (f[..., L] + f[..., K])


def jumps(grid: Grid, field: np.ndarray) -> np.ndarray:
    """Jumps on every face: scalar field -> ``(d, N)``, stacked ``(k, N)`` -> ``(k, d, N)``."""
    f, scalar = _as_stack(field)
    out = np.stack([f[:, grid.nbr[:, i, 1]] - f for i in range(grid.d)], axis=1)
    return out[0] if scalar else out


def averages(grid: Grid, field: np.ndarray) -> np.ndarray:
    f, scalar = _as_stack(field)
    out = np.stack([0.5 * (f[:, grid.nbr[:, i, 1]] + f) for i in range(grid.d)], axis=1)
    return out[0] if scalar else out


def grad_E(grid: Grid, field: np.ndarray) -> np.ndarray:
    """Normal face gradient ``[[r]]/h``; the tangential components vanish by definition."""
    return jumps(grid, field) / grid.h


def grad_E_norm2(grid: Grid, field: np.ndarray) -> float:
    """``||grad_E f||^2_{L^2}`` using ``|D_sigma| = h^d``."""
    g = grad_E(grid, field)
    return grid.cell_volume * math.fsum((g * g).ravel().tolist())


def div_h(grid: Grid, u: np.ndarray) -> np.ndarray:
    u = np.ascontiguousarray(u, dtype=float).reshape(grid.d, grid.ncells)
    return _kernels.K.div_h(u, grid.nbr, grid.h)


def laplace_h(grid: Grid, field: np.ndarray) -> np.ndarray:
    f, scalar = _as_stack(field)
    out = _kernels.K.laplace_h(np.ascontiguousarray(f), grid.nbr, grid.h)
    return out[0] if scalar else out


def central_grad(grid: Grid, field: np.ndarray) -> np.ndarray:
    """``(f(K+e_i) - f(K-e_i)) / 2h``, the adjoint of ``-div_h``."""
    return _kernels.K.central_grad(np.ascontiguousarray(field, dtype=float), grid.nbr, grid.h)


def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * x, 0.5 * w  # reference interval [-1/2, 1/2], weights sum to 1


def cell_quadrature(grid: Grid, order: int = 3, cells: np.ndarray | None = None,
                    subdivisions: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss points of the selected cells.

    Returns ``points`` of shape ``(d, ncell, q)`` and weights ``(q,)`` summing
    to one (multiply by ``|K|`` for integrals).
    """
    x1, w1 = _gauss(order)
    s = subdivisions
    offs = (np.arange(s) + 0.5) / s - 0.5
    x1 = (offs[:, None] + x1[None, :] / s).ravel()
    w1 = np.repeat(np.full(s, 1.0 / s), len(w1)) * np.tile(w1, s)
    mesh = np.meshgrid(*[x1] * grid.d, indexing="ij")
    wmesh = np.meshgrid(*[w1] * grid.d, indexing="ij")
    local = np.stack([m.ravel() for m in mesh])
    weights = np.prod(np.stack([w.ravel() for w in wmesh]), axis=0)
    c = grid.centers() if cells is None else grid.centers()[:, cells]
    pts = c[:, :, None] + grid.h * local[:, None, :]
    return pts, weights


def project(f: Callable[[np.ndarray], np.ndarray], grid: Grid, order: int = 3,
            crossed: np.ndarray | None = None, subdivisions: int = 8) -> np.ndarray:
    """Cell averages of ``f`` (the projection onto piecewise constants).

    ``f`` maps points of shape ``(d, M)`` to values ``(M,)`` or ``(k, M)``.
    Cells flagged in ``crossed`` (a discontinuity passes through them) are
    integrated on a ``subdivisions**d`` sub-grid with 2-point Gauss rules.
    """
    pts, w = cell_quadrature(grid, order)
    d, nc, q = pts.shape
    vals = np.asarray(f(pts.reshape(d, nc * q)), dtype=float)
    lead = vals.shape[:-1]
    out = (vals.reshape(lead + (nc, q)) * w).sum(axis=-1)
    if crossed is not None and np.any(crossed):
        cells = np.flatnonzero(crossed)
        sp, sw = cell_quadrature(grid, 2, cells, subdivisions)
        sv = np.asarray(f(sp.reshape(d, -1)), dtype=float)
        out[..., cells] = (sv.reshape(lead + (len(cells), len(sw))) * sw).sum(axis=-1)
    return out


def upwind_flux_value(r_in: float, r_out: float, vn: float, h: float, alpha: float) -> float:
    """Single-face ``F = r_up <u>.n - h^alpha [[r]]``; ties go to the inner value."""
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    up = r_in if vn >= 0 else r_out
    return up * vn - h ** alpha * (r_out - r_in)


def upwind_flux(grid: Grid, r: np.ndarray, u: np.ndarray, alpha: float) -> np.ndarray:
    """Fluxes on all faces; scalar ``r`` -> ``(d, N)``, stacked ``(k, N)`` -> ``(k, d, N)``."""
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    rr, scalar = _as_stack(r)
    v = _kernels.K.face_velocity(np.ascontiguousarray(u, dtype=float), grid.nbr)
    F = _kernels.K.upwind_flux(np.ascontiguousarray(rr), v, grid.nbr, grid.h ** alpha)
    return F[0] if scalar else F


def flux_divergence(grid: Grid, F: np.ndarray) -> np.ndarray:
    FF = F[None] if F.ndim == 2 else F
    out = _kernels.K.flux_divergence(np.ascontiguousarray(FF), grid.nbr, grid.h)
    return out[0] if F.ndim == 2 else out


def check_ibp(grid: Grid, fh: np.ndarray, vh: np.ndarray, axis: int) -> float:
    """Residual of the discrete integration-by-parts identity along ``axis``.

    ``vh[K]`` is the value on the dual cell of face ``(axis, K)``.  Returns
    ``|int d_E f v + int f d_T v|``.
    """
    fh = np.asarray(fh, dtype=float)
    vh = np.asarray(vh, dtype=float)
    plus = grid.nbr[:, axis, 1]
    minus = grid.nbr[:, axis, 0]
    lhs = cell_integral(grid, (fh[plus] - fh) / grid.h * vh)
    rhs = cell_integral(grid, fh * (vh - vh[minus]) / grid.h)
    return abs(lhs + rhs)
