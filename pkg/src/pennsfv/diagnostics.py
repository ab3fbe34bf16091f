"""Energy audit, relative energy, error norms, consistency errors and rate exponents."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .geometry import Shape
from .grid import Grid, State, cell_integral, inject, nesting_ratio
from .ops import _gauss, cell_quadrature, central_grad, div_h, jumps
from .scheme import FluidParams, continuity_residual, momentum_residual, penalty_weights


def _fsum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------

def mass(state: State) -> float:
    return cell_integral(state.grid, state.rho)


def kinetic_energy(state: State) -> float:
    return cell_integral(state.grid, 0.5 * state.rho * (state.u ** 2).sum(axis=0))


def internal_energy(state: State, params: FluidParams) -> float:
    return cell_integral(state.grid, params.potential(state.rho))


def total_energy(state: State, params: FluidParams) -> float:
    return kinetic_energy(state) + internal_energy(state, params)


def bregman(rho, rho_ref, params: FluidParams) -> np.ndarray:
    """Bregman distance of the pressure potential, ``P(r) - P'(s)(r - s) - P(s)``."""
    r = np.asarray(rho, dtype=float)
    s = np.asarray(rho_ref, dtype=float)
    if np.any(r <= 0) or np.any(s <= 0):
        raise ValueError("bregman requires positive densities")
    out = params.potential(r) - params.potential_d1(s) * (r - s) - params.potential(s)
    return np.maximum(out, 0.0) if out.ndim == 0 else out


def relative_energy(state: State, ref_rho, ref_u, params: FluidParams) -> float:
    """``sum_K |K| (rho |u - u~|^2 / 2 + E(rho | rho~))`` on the state's grid."""
    ref_rho = np.asarray(ref_rho, dtype=float)
    ref_u = np.asarray(ref_u, dtype=float)
    if ref_rho.shape != state.rho.shape or ref_u.shape != state.u.shape:
        raise ValueError("reference fields must live on the state's grid (inject first)")
    kin = 0.5 * state.rho * ((state.u - ref_u) ** 2).sum(axis=0)
    return cell_integral(state.grid, kin + bregman(state.rho, ref_rho, params))


# ---------------------------------------------------------------------------
# energy audit
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticsRecord:
    """Per-step energy balance of an implicit step.

    ``slack`` is ``D_t E + visc + pen + D_num`` with the lower bound for the
    density-jump term and must be below the solver tolerance.  ``slack_exact``
    uses the exact density-jump dissipation and vanishes up to solver
    residuals; ``kin_residual`` is the same for the kinetic-energy balance
    alone, which contains no mean-value terms.
    """

    t: float
    mass: float
    ekin: float
    eint: float
    visc_diss: float
    pen_diss: float
    dnum_ut: float
    dnum_uj: float
    dnum_ua: float
    dnum_rt: float
    dnum_rj: float
    slack: float
    pen_diss_outer: float = float("nan")
    dnum_rj_exact: float = float("nan")
    slack_exact: float = float("nan")
    kin_residual: float = float("nan")
    rho_min: float = float("nan")

    CSV_COLUMNS = ("t", "mass", "ekin", "eint", "visc_diss", "pen_diss", "dnum_ut", "dnum_uj",
                   "dnum_ua", "dnum_rt", "dnum_rj", "slack")

    def csv_row(self) -> list[float]:
        return [getattr(self, c) for c in self.CSV_COLUMNS]

    def as_dict(self) -> dict:
        return asdict(self)

    def dissipation(self) -> dict:
        return {k: getattr(self, k) for k in ("visc_diss", "pen_diss", "dnum_ut", "dnum_uj",
                                              "dnum_ua", "dnum_rt", "dnum_rj")}


def _face_pairs(grid: Grid, f):
    """``(f_K, f_L)`` over all faces, each of shape ``f.shape[:-1] + (d, N)``."""
    L = grid.nbr[:, :, 1].T  # (d, N)
    fK = np.broadcast_to(f[..., None, :], f.shape[:-1] + L.shape)
    return fK, f[..., L]


def energy_audit(new: State, old: State, mask: np.ndarray, params: FluidParams, dt: float,
                 shape: Shape | None = None) -> DiagnosticsRecord:
    """Discrete energy balance of the step ``old -> new``."""
    grid = new.grid
    grid.check_same(old.grid)
    hd, ha = grid.cell_volume, grid.h ** params.alpha
    area = grid.face_area
    rho, u = new.rho, new.u
    ek, ek_old = kinetic_energy(new), kinetic_energy(old)
    ei, ei_old = internal_energy(new, params), internal_energy(old, params)

    gu = jumps(grid, u) / grid.h  # (d comp, d axis, N)
    visc = params.mu * hd * _fsum(gu ** 2)
    if params.nu != 0.0:
        visc += params.nu * cell_integral(grid, div_h(grid, u) ** 2)
    pen = penalty_weights(mask, params)
    speed2 = (u ** 2).sum(axis=0)
    pen_diss = cell_integral(grid, pen * speed2)
    pen_outer = float("nan")
    if shape is not None:
        _, outside = shape.certify(grid)
        pen_outer = cell_integral(grid, np.where(outside, pen * speed2, 0.0))

    rK, rL = _face_pairs(grid, rho)
    v = 0.5 * (u + u[np.arange(grid.d)[:, None], grid.nbr[:, :, 1].T])  # (d, N) normal face velocity
    ju2 = (jumps(grid, u) ** 2).sum(axis=0)  # (d axis, N)
    up = np.where(v >= 0, rK, rL)
    down = np.where(v >= 0, rL, rK)

    dnum_ut = cell_integral(grid, old.rho * ((u - old.u) ** 2).sum(axis=0)) / (2 * dt)
    dnum_uj = ha * area * _fsum(0.5 * (rK + rL) * ju2)
    dnum_ua = 0.5 * area * _fsum(up * np.abs(v) * ju2)
    dnum_rt = cell_integral(grid, bregman(old.rho, rho, params)) / dt
    jr = rL - rK
    p2min = np.minimum(params.potential_d2(rK), params.potential_d2(rL))
    dnum_rj = area * _fsum((ha + 0.5 * np.abs(v)) * p2min * jr ** 2)
    dnum_rj_exact = area * _fsum(np.abs(v) * bregman(up, down, params)
                                 + ha * jr * (params.potential_d1(rL) - params.potential_d1(rK)))

    dEdt = (ek + ei - ek_old - ei_old) / dt
    base = dEdt + visc + pen_diss + dnum_ut + dnum_uj + dnum_ua + dnum_rt
    slack = base + dnum_rj
    slack_exact = base + dnum_rj_exact

    # kinetic balance: sum_K |K| (R_m . u - R_rho |u|^2/2) written out term by term
    p_div = cell_integral(grid, params.pressure(rho) * div_h(grid, u))
    kin = ((ek - ek_old) / dt + dnum_ut + dnum_uj + dnum_ua - p_div + visc + pen_diss)
    return DiagnosticsRecord(
        t=new.t, mass=mass(new), ekin=ek, eint=ei, visc_diss=visc, pen_diss=pen_diss,
        dnum_ut=dnum_ut, dnum_uj=dnum_uj, dnum_ua=dnum_ua, dnum_rt=dnum_rt, dnum_rj=dnum_rj,
        slack=slack, pen_diss_outer=pen_outer, dnum_rj_exact=dnum_rj_exact,
        slack_exact=slack_exact, kin_residual=kin, rho_min=float(rho.min()))


def residual_energy_pairing(new: State, old: State, mask: np.ndarray, params: FluidParams,
                            dt: float) -> tuple[float, float]:
    """Residual pairings that the kinetic and total energy balances reduce to.

    Returns ``(sum |K| (R_m.u - R_rho |u|^2/2), sum |K| (R_m.u + R_rho (P'(rho) - |u|^2/2)))``;
    both vanish for an exact solution of the scheme.
    """
    grid = new.grid
    R1 = continuity_residual(new, old, params, dt)
    R2 = momentum_residual(new, old, mask, params, dt)
    half = 0.5 * (new.u ** 2).sum(axis=0)
    kin = cell_integral(grid, (R2 * new.u).sum(axis=0) - R1 * half)
    tot = kin + cell_integral(grid, R1 * params.potential_d1(new.rho))
    return kin, tot


# ---------------------------------------------------------------------------
# errors against a nested reference
# ---------------------------------------------------------------------------

@dataclass
class ErrorEntry:
    E_rho: float
    E_u: float
    E_gradu: float
    RE: float


def _lp(grid: Grid, diff: np.ndarray, p: float) -> float:
    mag = np.sqrt((diff ** 2).sum(axis=0)) if diff.ndim == 2 else np.abs(diff)
    return (grid.cell_volume * _fsum(mag ** p)) ** (1.0 / p)


def _face_gradients(grid: Grid, u: np.ndarray) -> np.ndarray:
    """``[[u_j]]/h`` on faces, shape ``(d comp, d axis) + grid.shape``."""
    g = jumps(grid, u) / grid.h
    return g.reshape((grid.d, grid.d) + grid.shape)


def gradient_error(coarse: Grid, uc: np.ndarray, fine: Grid, uf: np.ndarray,
                   transfer: str = "exact") -> float:
    """``||grad_E u_c - grad_E u_f||_{L^2}`` for nested grids.

    ``transfer`` selects how the coarse face gradient is compared:

    ``exact``
        both dual-cell piecewise constants are compared as functions on the
        torus (common refinement in half-cells).
    ``fine``
        the coarse velocity is injected and differentiated on the fine faces.
    ``coarse-face``
        the coarse face gradient is placed on the coinciding fine faces and
        zero elsewhere.
    """
    r = nesting_ratio(coarse, fine)
    d = fine.d
    nf, nc = fine.n, coarse.n
    if transfer == "fine":
        g = _face_gradients(fine, inject(coarse, fine, uc)) - _face_gradients(fine, uf)
        return math.sqrt(fine.cell_volume * _fsum(g ** 2))
    if transfer == "coarse-face":
        gc = _face_gradients(coarse, uc)
        gi = gc
        for ax in range(d):
            gi = np.repeat(gi, r, axis=2 + ax)
        gf = _face_gradients(fine, uf)
        total = 0.0
        for i in range(d):
            # fine face (i, K) coincides with a coarse face iff (K_i + 1) % r == 0
            k = np.arange(nf)
            on = ((k + 1) % r == 0).astype(float)
            shape = [1] * d
            shape[i] = nf
            sel = on.reshape(shape)
            diff = gi[:, i] * sel - gf[:, i]
            total += _fsum(diff ** 2)
        return math.sqrt(fine.cell_volume * total)
    if transfer != "exact":
        raise ValueError(f"unknown gradient transfer {transfer!r}")
    gc = _face_gradients(coarse, uc)
    gf = _face_gradients(fine, uf)
    j = np.arange(2 * nf)
    kf = ((j - 1) // 2) % nf
    kc = (((j // r) - 1) // 2) % nc
    total = 0.0
    for i in range(d):
        a = np.take(gf[:, i], kf, axis=1 + i)
        b = np.take(gc[:, i], kc, axis=1 + i)
        for ax in range(d):
            if ax != i:
                b = np.repeat(b, r, axis=1 + ax)
        total += _fsum((a - b) ** 2)
    return math.sqrt(0.5 * fine.cell_volume * total)


def error_norms(coarse: State, fine: State, params: FluidParams,
                grad_transfer: str = "exact") -> ErrorEntry:
    """Errors of ``coarse`` against the nested reference ``fine``."""
    gc, gf = coarse.grid, fine.grid
    rho_c = inject(gc, gf, coarse.rho)
    u_c = inject(gc, gf, coarse.u)
    E_rho = _lp(gf, rho_c - fine.rho, params.gamma)
    E_u = _lp(gf, u_c - fine.u, 2.0)
    E_g = gradient_error(gc, coarse.u, gf, fine.u, grad_transfer)
    RE = relative_energy(State(gf, rho_c, u_c, coarse.t), fine.rho, fine.u, params)
    return ErrorEntry(E_rho, E_u, E_g, RE)


def eoc(errors: Sequence[float], hs: Sequence[float] | None = None) -> list[float]:
    """Rates ``log(e_m / e_{m+1}) / log(h_m / h_{m+1})`` (base-2 ratio if ``hs`` omitted)."""
    e = np.asarray(errors, dtype=float)
    if e.size < 2:
        raise ValueError("eoc needs at least two errors")
    if np.any(~(e > 0)):
        raise ValueError("errors must be positive")
    if hs is None:
        return [float(x) for x in np.log2(e[:-1] / e[1:])]
    h = np.asarray(hs, dtype=float)
    return [float(x) for x in np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])]


def fit_order(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log e`` against ``log h``."""
    x, y = np.log(np.asarray(hs, float)), np.log(np.abs(np.asarray(errors, float)))
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# consistency errors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Smooth space-time test function given by callables of ``(t, x)``.

    For scalar functions ``value``/``dt`` return ``(M,)`` and ``grad``
    ``(d, M)``; for vector functions ``(d, M)`` and ``(d, d, M)`` with
    ``grad[j, i] = d_i phi_j``.
    """

    value: Callable
    dt: Callable
    grad: Callable

    __test__ = False  # not a pytest class


def cosine_scalar(k: float = math.pi) -> TestFunction:
    """``cos(k x_1) cos(k x_2) exp(-t)`` (extra coordinates ignored)."""

    def val(t, x):
        return np.cos(k * x[0]) * np.cos(k * x[1]) * math.exp(-t)

    def grad(t, x):
        g = np.zeros_like(x)
        g[0] = -k * np.sin(k * x[0]) * np.cos(k * x[1]) * math.exp(-t)
        g[1] = -k * np.cos(k * x[0]) * np.sin(k * x[1]) * math.exp(-t)
        return g

    return TestFunction(val, lambda t, x: -val(t, x), grad)


def cosine_vector(k: float = math.pi) -> TestFunction:
    """``(cos k x_1 cos k x_2, sin k x_1 sin k x_2, 0) exp(-t)``."""

    def val(t, x):
        out = np.zeros_like(x)
        out[0] = np.cos(k * x[0]) * np.cos(k * x[1])
        out[1] = np.sin(k * x[0]) * np.sin(k * x[1])
        return out * math.exp(-t)

    def grad(t, x):
        d = x.shape[0]
        g = np.zeros((d, d) + x.shape[1:])
        s0, c0, s1, c1 = np.sin(k * x[0]), np.cos(k * x[0]), np.sin(k * x[1]), np.cos(k * x[1])
        g[0, 0], g[0, 1] = -k * s0 * c1, -k * c0 * s1
        g[1, 0], g[1, 1] = k * c0 * s1, k * s0 * c1
        return g * math.exp(-t)

    return TestFunction(val, lambda t, x: -val(t, x), grad)


def swirl_vector(k: float = math.pi) -> TestFunction:
    """``(sin k x_2, -sin k x_1, 0) exp(-t)``.

    Odd under ``x -> -x``, so it does not vanish against point-symmetric
    swirling flows the way :func:`cosine_vector` does.
    """

    def val(t, x):
        out = np.zeros_like(x)
        out[0] = np.sin(k * x[1])
        out[1] = -np.sin(k * x[0])
        return out * math.exp(-t)

    def grad(t, x):
        d = x.shape[0]
        g = np.zeros((d, d) + x.shape[1:])
        g[0, 1] = k * np.cos(k * x[1])
        g[1, 0] = -k * np.cos(k * x[0])
        return g * math.exp(-t)

    return TestFunction(val, lambda t, x: -val(t, x), grad)


class _CellMoments:
    """Gauss-3 cell averages of a test function and its derivatives."""

    def __init__(self, grid: Grid):
        self.grid = grid
        pts, self.w = cell_quadrature(grid, 3)
        self.shape = pts.shape
        self.pts = pts.reshape(grid.d, -1)

    def avg(self, f, t):
        v = np.asarray(f(t, self.pts))
        v = v.reshape(v.shape[:-1] + self.shape[1:])
        return (v * self.w).sum(axis=-1)


def _dual_points(grid: Grid, axis: int):
    """Gauss-3 points of every dual cell of ``axis`` (centred on face centres)."""
    pts, w = cell_quadrature(grid, 3)
    pts = pts.copy()
    pts[axis] += 0.5 * grid.h
    return pts.reshape(grid.d, -1), w, pts.shape


def _step_index(nsteps: int, dt: float, tau: float | None) -> int:
    T = nsteps * dt
    if tau is None:
        return nsteps
    if not -1e-12 * T <= tau <= T * (1 + 1e-12):
        raise ValueError(f"tau={tau} outside [0, {T}]")
    k = int(round(tau / dt))
    if abs(k * dt - tau) > 1e-9 * max(dt, 1.0):
        raise ValueError("tau must be a multiple of dt")
    return k


def _intervals(states: Sequence[State], dt: float, k_tau: int, convention: str):
    """Yield ``(t_a, t_b, state)`` for the piecewise-constant-in-time interpolant."""
    if convention not in ("left", "right"):
        raise ValueError("convention must be 'left' or 'right'")
    for k in range(k_tau):
        st = states[k] if convention == "left" else states[k + 1]
        yield k * dt, (k + 1) * dt, st


def consistency_rho(states: Sequence[State], dt: float, phi: TestFunction,
                    tau: float | None = None, convention: str = "left") -> float:
    """Continuity consistency error of a discrete trajectory ``states[k]`` at ``t_k``."""
    grid = states[0].grid
    k_tau = _step_index(len(states) - 1, dt, tau)
    cm = _CellMoments(grid)
    hd = grid.cell_volume
    end = states[k_tau] if convention == "left" or k_tau == 0 else states[k_tau]
    total = [hd * _fsum(end.rho * cm.avg(phi.value, k_tau * dt)),
             -hd * _fsum(states[0].rho * cm.avg(phi.value, 0.0))]
    tq, tw = _gauss(2)
    for ta, tb, st in _intervals(states, dt, k_tau, convention):
        m = st.m
        for s, w in zip(tq, tw):
            t = 0.5 * (ta + tb) + s * (tb - ta)
            integrand = st.rho * cm.avg(phi.dt, t) + (m * cm.avg(phi.grad, t)).sum(axis=0)
            total.append(-(tb - ta) * w * hd * _fsum(integrand))
    return math.fsum(total)


def solid_weights(grid: Grid, shape: Shape, subdivisions: int = 8) -> np.ndarray:
    """Sub-cell quadrature points and weights for ``int_{K cap Omega^s} f``.

    Returns ``(pts, w)`` with ``pts`` of shape ``(d, N, q)`` and ``w`` of shape
    ``(N, q)`` holding the cell-relative weights masked to the solid part.
    """
    pts, w = cell_quadrature(grid, 2, None, subdivisions)
    solid = ~shape.inside(pts.reshape(grid.d, -1)).reshape(pts.shape[1:])
    return pts, w[None, :] * solid


def consistency_mom(states: Sequence[State], dt: float, phi: TestFunction, params: FluidParams,
                    shape: Shape | None = None, tau: float | None = None,
                    convention: str = "left", subdivisions: int = 8) -> float:
    """Momentum consistency error; the penalty integrates over the continuous solid region."""
    grid = states[0].grid
    d, hd = grid.d, grid.cell_volume
    k_tau = _step_index(len(states) - 1, dt, tau)
    cm = _CellMoments(grid)
    duals = [_dual_points(grid, i) for i in range(d)]
    if shape is not None:
        spts, sw = solid_weights(grid, shape, subdivisions)
        spts_flat = spts.reshape(d, -1)
    end = states[k_tau]
    total = [hd * _fsum(end.m * cm.avg(phi.value, k_tau * dt)),
             -hd * _fsum(states[0].m * cm.avg(phi.value, 0.0))]
    tq, tw = _gauss(2)
    for ta, tb, st in _intervals(states, dt, k_tau, convention):
        m, u = st.m, st.u
        p = params.pressure(st.rho)
        gu = jumps(grid, u) / grid.h  # (j, i, N)
        divu = div_h(grid, u) if params.nu != 0 else None
        for s, w in zip(tq, tw):
            t = 0.5 * (ta + tb) + s * (tb - ta)
            G = cm.avg(phi.grad, t)  # (j, i, N)
            divphi = np.trace(G, axis1=0, axis2=1)
            conv = np.einsum("jK,iK,jiK->K", m, u, G)
            integrand = (m * cm.avg(phi.dt, t)).sum(axis=0) + conv + p * divphi
            visc = 0.0
            for i, (dp, dw, dshape) in enumerate(duals):
                Gi = np.asarray(phi.grad(t, dp))[:, i]  # d_i phi_j on dual cells of axis i
                Gi = (Gi.reshape((d,) + dshape[1:]) * dw).sum(axis=-1)
                visc += params.mu * _fsum(gu[:, i] * Gi)
            if divu is not None:
                visc += params.nu * _fsum(divu * divphi)
            pen = 0.0
            if shape is not None:
                vals = np.asarray(phi.value(t, spts_flat)).reshape((d,) + spts.shape[1:])
                pen = _fsum(u * (vals * sw).sum(axis=-1)) / params.eps
            total.append((tb - ta) * w * hd * (visc + pen - _fsum(integrand)))
    return math.fsum(total)


# ---------------------------------------------------------------------------
# rate exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateExponents:
    d: int
    gamma: float
    alpha: float
    beta_D: float
    beta_R_tilde: float
    beta_R: float
    beta_M: float
    beta_RE: float

    def as_dict(self) -> dict:
        return asdict(self)


def _check_domain(d, gamma, alpha):
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")


def beta_D(d: int, gamma: float, alpha: float) -> float:
    _check_domain(d, gamma, alpha)
    if gamma >= 2:
        return 0.0
    if d == 2:
        # inf over p of (p(alpha+1)+4)/(2p) is its p -> infinity limit
        return min((1 + alpha) / 2, 1.0) * (gamma - 2) / gamma
    return min((alpha + 2) / 3, 1.0) * 3 * (gamma - 2) / (2 * gamma)


def beta_R_tilde(d: int, gamma: float, alpha: float) -> float:
    _check_domain(d, gamma, alpha)
    if gamma >= 6 / 5:
        return 0.0
    if d == 2:
        # (1+alpha) p / (2(p-2)) decreases to (1+alpha)/2 as p -> infinity
        return min((1 + alpha) / 2, 1.0) * (5 * gamma - 6) / (3 * gamma)
    return min((1 + alpha) / 2, 1.0) * (5 * gamma - 6) / (2 * gamma)


def beta_R(d: int, gamma: float, alpha: float) -> float:
    return 0.0 if d == 2 else beta_R_tilde(d, gamma, alpha)


def beta_M(d: int, gamma: float, alpha: float) -> float:
    _check_domain(d, gamma, alpha)
    if d == 2:
        if gamma > 2:
            return 0.0
        # both candidates increase in p; the sup is the p -> infinity limit
        return max(-(alpha + 1) / (2 * gamma), (gamma - 2) / gamma)
    if gamma >= 3:
        return 0.0
    if gamma > 2:
        return (gamma - 3) / gamma
    return max(-(alpha + 2) / (2 * gamma), (gamma - 3) / gamma, -3 / (2 * gamma))


def beta_RE(alpha: float) -> float:
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    return min(1.0, (1 + alpha) / 2, alpha)


def exponents(d: int, gamma: float, alpha: float) -> RateExponents:
    return RateExponents(d, gamma, alpha, beta_D(d, gamma, alpha), beta_R_tilde(d, gamma, alpha),
                         beta_R(d, gamma, alpha), beta_M(d, gamma, alpha), beta_RE(alpha))


def exponents_large_alpha(d: int, gamma: float) -> dict:
    """Alpha-independent forms valid for ``alpha >= 1``."""
    bd = d * (gamma - 2) / (2 * gamma) if gamma < 2 else 0.0
    br = (5 * gamma - 6) / (2 * gamma) if d == 3 and gamma < 6 / 5 else 0.0
    if d == 2:
        bm = (gamma - 2) / gamma if gamma <= 2 else 0.0
    else:
        bm = max((gamma - 3) / gamma, -3 / (2 * gamma)) if gamma < 3 else 0.0
    return {"beta_D": bd, "beta_R": br, "beta_M": bm}


def momentum_bound_conditions(d: int, gamma: float, alpha: float) -> bool:
    """Sufficient conditions under which ``beta_M > -1`` (and ``beta_D > -1``)."""
    return d == 2 or gamma > 1.5 or alpha < 2 * (gamma - 1)


def regime_notes(d: int, gamma: float, alpha: float) -> list[str]:
    ex = exponents(d, gamma, alpha)
    notes = []
    if d == 3 and gamma <= 1.5:
        cond = alpha < 2 * (gamma - 1)
        notes.append(f"beta_M > -1 requires alpha < 2(gamma-1) = {2 * (gamma - 1):g} when d=3, "
                     f"gamma <= 3/2: {'satisfied' if cond else 'VIOLATED'}")
    if ex.beta_M <= -1:
        notes.append(f"warning: beta_M = {ex.beta_M:g} <= -1; the h^(1+beta_M) consistency "
                     "term does not vanish")
    if ex.beta_D <= -1:
        notes.append(f"warning: beta_D = {ex.beta_D:g} <= -1")
    if alpha >= 1:
        notes.append("alpha >= 1: beta_D, beta_R, beta_M are independent of alpha")
    return notes
