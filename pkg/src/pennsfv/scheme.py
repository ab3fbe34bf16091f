"""Penalized upwind finite volume scheme: residuals, implicit and explicit steps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .grid import Grid, State

log = logging.getLogger(__name__)


class SchemeError(RuntimeError):
    """Base class for step failures; ``step`` is filled in by :func:`run`."""

    step: int | None = None

    def __str__(self):
        msg = super().__str__()
        return f"step {self.step}: {msg}" if self.step is not None else msg


class PicardDiverged(SchemeError):
    def __init__(self, msg, best: State | None = None, residual: float = math.inf):
        super().__init__(msg)
        self.best = best
        self.residual = residual


class NegativeDensity(SchemeError):
    pass


class LinearSolveFailed(SchemeError):
    pass


class CFLViolation(SchemeError):
    pass


@dataclass(frozen=True)
class FluidParams:
    a: float = 1.0
    gamma: float = 1.4
    mu: float = 0.1
    lam: float = 0.0
    alpha: float = 0.6
    eps: float = 4.0 ** -4
    d: int = 2

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if not self.alpha > -1:
            raise ValueError("alpha must exceed -1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.d not in (2, 3):
            raise ValueError("d must be 2 or 3")

    @property
    def nu(self) -> float:
        return self.lam + (self.d - 2) / self.d * self.mu

    def pressure(self, rho):
        return self.a * np.asarray(rho) ** self.gamma

    def potential(self, rho):
        """Pressure potential ``P(rho) = a/(gamma-1) rho^gamma``."""
        return self.a / (self.gamma - 1) * np.asarray(rho) ** self.gamma

    def potential_d1(self, rho):
        return self.a * self.gamma / (self.gamma - 1) * np.asarray(rho) ** (self.gamma - 1)

    def potential_d2(self, rho):
        return self.a * self.gamma * np.asarray(rho) ** (self.gamma - 2)

    def sound_speed(self, rho):
        return np.sqrt(self.a * self.gamma * np.asarray(rho) ** (self.gamma - 1))


@dataclass(frozen=True)
class SolverParams:
    dt: float
    T: float
    mode: str = "implicit"
    tol_nl: float = 1e-10
    max_picard: int = 100
    tol_lin: float = 1e-12
    max_lin: int | None = None
    linear_solver: str = "direct"
    c_cfl: float = 0.4

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if self.mode not in ("implicit", "explicit"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.linear_solver not in ("direct", "bicgstab"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class StepStats:
    picard: int = 0
    residual: float = 0.0
    linear: int = 0
    min_rho: float = 0.0
    damped: int = 0


def penalty_weights(mask: np.ndarray, params: FluidParams) -> np.ndarray:
    """``1/eps`` on non-fluid cells, 0 on fluid cells."""
    return np.where(np.asarray(mask, dtype=bool), 0.0, 1.0 / params.eps)


def continuity_residual(new: State, old: State, params: FluidParams, dt: float) -> np.ndarray:
    grid = new.grid
    grid.check_same(old.grid)
    return _kernels.K.continuity_residual(new.rho, old.rho, new.u, grid.nbr, grid.h,
                                          grid.h ** params.alpha, dt)


def momentum_residual(new: State, old: State, mask: np.ndarray, params: FluidParams,
                      dt: float) -> np.ndarray:
    grid = new.grid
    grid.check_same(old.grid)
    if np.shape(mask) != (grid.ncells,):
        raise ValueError("mask does not match the grid")
    return _kernels.K.momentum_residual(new.rho, new.u, old.m, penalty_weights(mask, params),
                                        grid.nbr, grid.h, grid.h ** params.alpha, dt,
                                        params.a, params.gamma, params.mu, params.nu)


# ---------------------------------------------------------------------------
# linearised operators
# ---------------------------------------------------------------------------

def transport_matrix(grid: Grid, u: np.ndarray, h_alpha: float, dt: float) -> sp.csr_matrix:
    """Matrix of ``r -> r/dt + div_h F(r, u)`` for frozen velocity ``u``."""
    N, h = grid.ncells, grid.h
    rows, cols, vals = [np.arange(N)], [np.arange(N)], [np.full(N, 1.0 / dt)]
    K = np.arange(N)
    for i in range(grid.d):
        L = grid.nbr[:, i, 1]
        v = 0.5 * (u[i] + u[i][L])
        a_in = (np.where(v >= 0, v, 0.0) + h_alpha) / h
        a_out = (np.where(v < 0, v, 0.0) - h_alpha) / h
        rows += [K, K, L, L]
        cols += [K, L, K, L]
        vals += [a_in, a_out, -a_in, -a_out]
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(N, N))


def laplace_matrix(grid: Grid) -> sp.csr_matrix:
    N, h = grid.ncells, grid.h
    K = np.arange(N)
    rows, cols, vals = [K], [K], [np.full(N, -2.0 * grid.d / h ** 2)]
    for i in range(grid.d):
        for s in (0, 1):
            rows.append(K)
            cols.append(grid.nbr[:, i, s])
            vals.append(np.full(N, 1.0 / h ** 2))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(N, N))


def central_matrix(grid: Grid, axis: int) -> sp.csr_matrix:
    N, h = grid.ncells, grid.h
    K = np.arange(N)
    rows = np.concatenate([K, K])
    cols = np.concatenate([grid.nbr[:, axis, 1], grid.nbr[:, axis, 0]])
    vals = np.concatenate([np.full(N, 0.5 / h), np.full(N, -0.5 / h)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(N, N))


class _Operators:
    """Velocity-independent sparse pieces, built once per run."""

    def __init__(self, grid: Grid, mask: np.ndarray, params: FluidParams):
        self.grid = grid
        self.pen = penalty_weights(mask, params)
        self.visc = -params.mu * laplace_matrix(grid) + sp.diags(self.pen)
        self.graddiv = None
        if params.nu != 0.0:
            D = [central_matrix(grid, i) for i in range(grid.d)]
            self.graddiv = sp.bmat([[-params.nu * (D[j] @ D[i]) for i in range(grid.d)]
                                    for j in range(grid.d)], format="csr")


def _linear_solve(A: sp.spmatrix, b: np.ndarray, solver: SolverParams) -> tuple[np.ndarray, int]:
    """Solve ``A x = b`` for one or several right-hand sides (columns of ``b``)."""
    A = sp.csc_matrix(A)
    if solver.linear_solver == "direct":
        lu = spla.splu(A)
        x = lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise LinearSolveFailed("direct solve produced non-finite values")
        return x, 1
    maxiter = solver.max_lin or 10 * A.shape[0]
    ilu = spla.spilu(A, drop_tol=1e-6, fill_factor=10)
    M = spla.LinearOperator(A.shape, ilu.solve)
    cols = b.reshape(b.shape[0], -1)
    out = np.empty_like(cols)
    total = 0
    for c in range(cols.shape[1]):
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = spla.bicgstab(A, cols[:, c], rtol=solver.tol_lin, atol=0.0, maxiter=maxiter,
                                M=M, callback=cb)
        if info != 0:
            raise LinearSolveFailed(f"bicgstab did not converge (info={info})")
        out[:, c] = x
        total += count[0]
    return out.reshape(b.shape), total


def _momentum_solve(ops: _Operators, A: sp.csr_matrix, rho: np.ndarray, rhs: np.ndarray,
                    solver: SolverParams) -> tuple[np.ndarray, int]:
    d, N = rhs.shape
    B = A @ sp.diags(rho) + ops.visc
    if ops.graddiv is None:
        x, its = _linear_solve(B, rhs.T.copy(), solver)
        return x.T.copy(), its
    big = sp.block_diag([B] * d, format="csr") + ops.graddiv
    x, its = _linear_solve(big, rhs.ravel(), solver)
    return x.reshape(d, N), its


def step_implicit(old: State, mask: np.ndarray, params: FluidParams, solver: SolverParams,
                  ops: _Operators | None = None) -> tuple[State, StepStats]:
    """One backward-Euler step solved by segregated Picard iteration."""
    grid = old.grid
    if not np.all(old.rho > 0):
        raise NegativeDensity("old density is not positive")
    ops = ops or _Operators(grid, mask, params)
    dt = solver.dt
    h_alpha = grid.h ** params.alpha
    m_old = old.m
    rho_k, u_k = old.rho, old.u
    stats = StepStats()
    best, best_res = None, math.inf
    for it in range(1, solver.max_picard + 1):
        A = transport_matrix(grid, u_k, h_alpha, dt)
        rho_new, its = _linear_solve(A, old.rho / dt, solver)
        stats.linear += its
        if not np.all(rho_new > 0):
            cand = rho_new
            for _ in range(5):
                cand = rho_k + 0.5 * (cand - rho_k)
                stats.damped += 1
                if np.all(cand > 0):
                    break
            else:
                raise NegativeDensity(f"density iterate nonpositive after damping "
                                      f"(min {rho_new.min():.3e})")
            rho_new = cand
        rhs = m_old / dt - _kernels.K.central_grad(params.a * rho_new ** params.gamma, grid.nbr, grid.h)
        u_new, its = _momentum_solve(ops, A, rho_new, rhs, solver)
        stats.linear += its
        trial = State(grid, rho_new, u_new, old.t + dt)
        r1 = continuity_residual(trial, old, params, dt)
        r2 = momentum_residual(trial, old, mask, params, dt)
        res = max(np.abs(r1).max(), np.abs(r2).max())
        if res < best_res:
            best, best_res = trial, res
        if res <= solver.tol_nl:
            stats.picard = it
            stats.residual = float(res)
            stats.min_rho = float(rho_new.min())
            return trial, stats
        if not np.isfinite(res):
            break
        rho_k, u_k = rho_new, u_new
    raise PicardDiverged(f"Picard residual {best_res:.3e} above tol {solver.tol_nl:.1e} "
                         f"after {solver.max_picard} iterations", best, best_res)


def cfl_limit(state: State, params: FluidParams, c_cfl: float) -> float:
    h = state.grid.h
    umax = float(np.sqrt((state.u ** 2).sum(axis=0)).max())
    cmax = float(params.sound_speed(state.rho).max())
    return c_cfl * h / (umax + cmax + 2 * state.grid.d * h ** (params.alpha - 1))


def step_explicit(old: State, mask: np.ndarray, params: FluidParams, solver: SolverParams,
                  ops: _Operators | None = None) -> tuple[State, StepStats]:
    """Forward-Euler transport with implicit viscosity and exact penalty relaxation."""
    grid = old.grid
    dt = solver.dt
    limit = cfl_limit(old, params, solver.c_cfl)
    if dt > limit:
        raise CFLViolation(f"dt={dt:.3e} exceeds CFL limit {limit:.3e}")
    ops = ops or _Operators(grid, mask, params)
    h_alpha = grid.h ** params.alpha
    Kn = _kernels.K
    v = Kn.face_velocity(old.u, grid.nbr)
    F = Kn.upwind_flux(old.rho[None, :], v, grid.nbr, h_alpha)
    rho_new = old.rho - dt * Kn.flux_divergence(F, grid.nbr, grid.h)[0]
    if not np.all(rho_new > 0):
        raise NegativeDensity("explicit update produced nonpositive density")
    m = old.m
    Fm = Kn.upwind_flux(np.ascontiguousarray(m), v, grid.nbr, h_alpha)
    m_star = m - dt * (Kn.flux_divergence(Fm, grid.nbr, grid.h)
                       + Kn.central_grad(params.pressure(old.rho), grid.nbr, grid.h))
    # implicit viscous + penalty: (rho_new/dt + pen - mu Lap - nu grad div) u = m*/dt
    B = sp.diags(rho_new / dt) + ops.visc
    if ops.graddiv is None:
        x, its = _linear_solve(B, (m_star / dt).T.copy(), solver)
        u_new = x.T.copy()
    else:
        big = sp.block_diag([B] * grid.d, format="csr") + ops.graddiv
        x, its = _linear_solve(big, (m_star / dt).ravel(), solver)
        u_new = x.reshape(grid.d, grid.ncells)
    new = State(grid, rho_new, u_new, old.t + dt)
    return new, StepStats(picard=0, residual=0.0, linear=its, min_rho=float(rho_new.min()))


@dataclass
class Trajectory:
    states: list[State] = field(default_factory=list)
    stats: list[StepStats] = field(default_factory=list)
    snapshots: list[State] = field(default_factory=list)

    @property
    def final(self) -> State:
        return self.states[-1]


Hook = Callable[[int, State, State, StepStats], None]


def run(init: State, mask: np.ndarray, params: FluidParams, solver: SolverParams,
        hooks: Sequence[Hook] = (), snapshot_every: int = 0, keep_states: bool = True) -> Trajectory:
    """Advance ``N_T = round(T/dt)`` steps, calling ``hook(k, old, new, stats)`` after each."""
    nsteps = solver.nsteps
    if nsteps < 1:
        raise ValueError("T/dt must give at least one step")
    init.check_positive()
    ops = _Operators(init.grid, mask, params)
    stepper = step_implicit if solver.mode == "implicit" else step_explicit
    traj = Trajectory(states=[init] if keep_states else [], snapshots=[init] if snapshot_every else [])
    state = init
    for k in range(1, nsteps + 1):
        try:
            new, stats = stepper(state, mask, params, solver, ops)
        except SchemeError as exc:
            exc.step = k
            raise
        new.t = k * solver.dt
        if not np.all(new.rho > 0):
            err = NegativeDensity("accepted state has nonpositive density")
            err.step = k
            raise err
        for hook in hooks:
            hook(k, state, new, stats)
        traj.stats.append(stats)
        if keep_states:
            traj.states.append(new)
        if snapshot_every and (k % snapshot_every == 0 or k == nsteps):
            traj.snapshots.append(new)
        log.debug("step %d: picard=%d res=%.2e", k, stats.picard, stats.residual)
        state = new
    if not keep_states:
        traj.states.append(state)
    return traj


def stats_dict(stats: StepStats) -> dict:
    return asdict(stats)
