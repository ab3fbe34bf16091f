"""Stencil kernels on flattened periodic grids.

Every kernel exists twice: a numba ``@njit`` loop version and a vectorised
numpy version.  Both take the neighbour table ``nbr[K, i, s]`` of
:class:`pennsfv.grid.Grid` so they work for any dimension.  The active
backend is chosen once at import time from ``PENNSFV_BACKEND``
(``numba`` or ``numpy``); numba is the default when it can be imported.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None
    HAVE_NUMBA = False

_njit_opts = {"cache": True, "nogil": True}


def _njit(func):
    if HAVE_NUMBA:
        return nb.njit(**_njit_opts)(func)
    return func


# ---------------------------------------------------------------------------
# numba loop kernels
# ---------------------------------------------------------------------------

@_njit
def _face_velocity_nb(u, nbr):
    d, N = u.shape
    v = np.empty((d, N))
    for i in range(d):
        for K in range(N):
            v[i, K] = 0.5 * (u[i, K] + u[i, nbr[K, i, 1]])
    return v


@_njit
def _upwind_flux_nb(r, v, nbr, h_alpha):
    # r: (k, N) stacked scalars, v: (d, N) face normal velocities
    k, N = r.shape
    d = v.shape[0]
    F = np.empty((k, d, N))
    for i in range(d):
        for K in range(N):
            L = nbr[K, i, 1]
            vf = v[i, K]
            for c in range(k):
                up = r[c, K] if vf >= 0.0 else r[c, L]
                F[c, i, K] = up * vf - h_alpha * (r[c, L] - r[c, K])
    return F


@_njit
def _flux_divergence_nb(F, nbr, h):
    k, d, N = F.shape
    out = np.zeros((k, N))
    for c in range(k):
        for K in range(N):
            s = 0.0
            for i in range(d):
                s += F[c, i, K] - F[c, i, nbr[K, i, 0]]
            out[c, K] = s / h
    return out


@_njit
def _div_h_nb(u, nbr, h):
    d, N = u.shape
    out = np.empty(N)
    for K in range(N):
        s = 0.0
        for i in range(d):
            s += u[i, nbr[K, i, 1]] - u[i, nbr[K, i, 0]]
        out[K] = s / (2.0 * h)
    return out


@_njit
def _laplace_h_nb(f, nbr, h):
    k, N = f.shape
    d = nbr.shape[1]
    out = np.empty((k, N))
    for c in range(k):
        for K in range(N):
            s = 0.0
            for i in range(d):
                s += f[c, nbr[K, i, 0]] + f[c, nbr[K, i, 1]] - 2.0 * f[c, K]
            out[c, K] = s / (h * h)
    return out


@_njit
def _central_grad_nb(f, nbr, h):
    N = f.shape[0]
    d = nbr.shape[1]
    out = np.empty((d, N))
    for i in range(d):
        for K in range(N):
            out[i, K] = (f[nbr[K, i, 1]] - f[nbr[K, i, 0]]) / (2.0 * h)
    return out


@_njit
def _continuity_residual_nb(rho, rho_old, u, nbr, h, h_alpha, dt):
    d, N = u.shape
    R = np.empty(N)
    for K in range(N):
        R[K] = (rho[K] - rho_old[K]) / dt
    for i in range(d):
        for K in range(N):
            L = nbr[K, i, 1]
            vf = 0.5 * (u[i, K] + u[i, L])
            up = rho[K] if vf >= 0.0 else rho[L]
            F = up * vf - h_alpha * (rho[L] - rho[K])
            R[K] += F / h
            R[L] -= F / h
    return R


@_njit
def _momentum_residual_nb(rho, u, m_old, pen, nbr, h, h_alpha, dt, a, gamma, mu, nu):
    d, N = u.shape
    R = np.empty((d, N))
    p = np.empty(N)
    for K in range(N):
        p[K] = a * rho[K] ** gamma
    for j in range(d):
        for K in range(N):
            R[j, K] = (rho[K] * u[j, K] - m_old[j, K]) / dt + pen[K] * u[j, K]
    # convective fluxes
    for i in range(d):
        for K in range(N):
            L = nbr[K, i, 1]
            vf = 0.5 * (u[i, K] + u[i, L])
            for j in range(d):
                mK = rho[K] * u[j, K]
                mL = rho[L] * u[j, L]
                up = mK if vf >= 0.0 else mL
                F = up * vf - h_alpha * (mL - mK)
                R[j, K] += F / h
                R[j, L] -= F / h
    # pressure, viscosity
    div = _div_h_nb(u, nbr, h)
    for j in range(d):
        for K in range(N):
            Km = nbr[K, j, 0]
            Kp = nbr[K, j, 1]
            lap = 0.0
            for i in range(d):
                lap += u[j, nbr[K, i, 0]] + u[j, nbr[K, i, 1]] - 2.0 * u[j, K]
            R[j, K] += (p[Kp] - p[Km]) / (2.0 * h)
            R[j, K] -= mu * lap / (h * h)
            R[j, K] -= nu * (div[Kp] - div[Km]) / (2.0 * h)
    return R


# ---------------------------------------------------------------------------
# numpy vectorised kernels
# ---------------------------------------------------------------------------

def _face_velocity_np(u, nbr):
    d = u.shape[0]
    return np.stack([0.5 * (u[i] + u[i][nbr[:, i, 1]]) for i in range(d)])


def _upwind_flux_np(r, v, nbr, h_alpha):
    d = v.shape[0]
    out = []
    for i in range(d):
        rL = r[:, nbr[:, i, 1]]
        up = np.where(v[i] >= 0.0, r, rL)
        out.append(up * v[i] - h_alpha * (rL - r))
    return np.stack(out, axis=1)


def _flux_divergence_np(F, nbr, h):
    d = F.shape[1]
    s = np.zeros((F.shape[0], F.shape[2]))
    for i in range(d):
        s += F[:, i, :] - F[:, i, nbr[:, i, 0]]
    return s / h


def _div_h_np(u, nbr, h):
    d = u.shape[0]
    s = np.zeros(u.shape[1])
    for i in range(d):
        s += u[i][nbr[:, i, 1]] - u[i][nbr[:, i, 0]]
    return s / (2.0 * h)


def _laplace_h_np(f, nbr, h):
    d = nbr.shape[1]
    s = np.zeros_like(f)
    for i in range(d):
        s += f[:, nbr[:, i, 0]] + f[:, nbr[:, i, 1]] - 2.0 * f
    return s / (h * h)


def _central_grad_np(f, nbr, h):
    d = nbr.shape[1]
    return np.stack([(f[nbr[:, i, 1]] - f[nbr[:, i, 0]]) / (2.0 * h) for i in range(d)])


def _continuity_residual_np(rho, rho_old, u, nbr, h, h_alpha, dt):
    v = _face_velocity_np(u, nbr)
    F = _upwind_flux_np(rho[None, :], v, nbr, h_alpha)
    return (rho - rho_old) / dt + _flux_divergence_np(F, nbr, h)[0]


def _momentum_residual_np(rho, u, m_old, pen, nbr, h, h_alpha, dt, a, gamma, mu, nu):
    v = _face_velocity_np(u, nbr)
    m = rho * u
    F = _upwind_flux_np(m, v, nbr, h_alpha)
    R = (m - m_old) / dt + pen * u + _flux_divergence_np(F, nbr, h)
    R += _central_grad_np(a * rho ** gamma, nbr, h)
    R -= mu * _laplace_h_np(u, nbr, h)
    if nu != 0.0:
        R -= nu * _central_grad_np(_div_h_np(u, nbr, h), nbr, h)
    return R


_NAMES = ("face_velocity", "upwind_flux", "flux_divergence", "div_h", "laplace_h",
          "central_grad", "continuity_residual", "momentum_residual")

numba_impl = SimpleNamespace(**{k: globals()[f"_{k}_nb"] for k in _NAMES})
numpy_impl = SimpleNamespace(**{k: globals()[f"_{k}_np"] for k in _NAMES})


def _select():
    want = os.environ.get("PENNSFV_BACKEND", "numba" if HAVE_NUMBA else "numpy").lower()
    if want not in ("numba", "numpy"):
        raise ValueError(f"PENNSFV_BACKEND must be 'numba' or 'numpy', got {want!r}")
    if want == "numba" and not HAVE_NUMBA:
        want = "numpy"
    return want


BACKEND = _select()
K = numba_impl if BACKEND == "numba" else numpy_impl
