"""Uniform periodic structured mesh of the torus.

Cells are indexed lexicographically (C order over the multi-index
``(i_1, ..., i_d)``, last axis fastest).  A face is identified by the pair
``(axis, left_cell)``; its normal is ``+e_axis`` pointing from the left cell
``K`` to the right cell ``L = K + e_axis``.  Scalar cell fields are stored as
arrays of shape ``(N,)`` with ``N = n**d``; vector cell fields as ``(d, N)``
(component-major).  Scalar face fields have shape ``(d, N)`` with the first
index the face axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    d: int
    n: int
    side: float = 2.0
    origin: tuple[float, ...] | None = None

    def resolved_origin(self) -> tuple[float, ...]:
        if self.origin is None:
            return tuple([-0.5 * self.side] * self.d)
        return tuple(float(o) for o in self.origin)


@dataclass(frozen=True, eq=False)
class Grid:
    """Topology tables and geometry of a uniform periodic mesh.

    Attributes
    ----------
    nbr : ndarray, shape (N, d, 2)
        ``nbr[K, i, 0]`` is ``K - e_i`` and ``nbr[K, i, 1]`` is ``K + e_i``.
    faces : ndarray, shape (d*N, 3)
        Rows ``(axis, K, L)``; face id ``f = axis*N + K``.
    """

    spec: GridSpec
    h: float
    origin: np.ndarray
    nbr: np.ndarray
    faces: np.ndarray
    _centers: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def side(self) -> float:
        return self.spec.side

    @property
    def ncells(self) -> int:
        return self.n ** self.d

    @property
    def nfaces(self) -> int:
        return self.d * self.ncells

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def face_area(self) -> float:
        return self.h ** (self.d - 1)

    @property
    def volume(self) -> float:
        return self.side ** self.d

    def centers(self) -> np.ndarray:
        """Cell centers, shape ``(d, N)``."""
        return self._centers

    def index(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(m) % self.n for m in multi), self.shape))

    def multi_index(self, cell: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(int(cell), self.shape))

    def face_id(self, axis: int, left_cell: int) -> int:
        return axis * self.ncells + left_cell

    def same_as(self, other: "Grid") -> bool:
        return (self.d == other.d and self.n == other.n
                and self.side == other.side
                and np.array_equal(self.origin, other.origin))

    def check_same(self, other: "Grid") -> None:
        if not self.same_as(other):
            raise GridError("fields live on different grids")


def build_grid(spec: GridSpec) -> Grid:
    if spec.d not in (2, 3):
        raise GridError(f"d must be 2 or 3, got {spec.d}")
    if int(spec.n) != spec.n or spec.n < 2:
        raise GridError(f"n must be an integer >= 2, got {spec.n}")
    if not spec.side > 0:
        raise GridError(f"side must be positive, got {spec.side}")
    origin = np.asarray(spec.resolved_origin(), dtype=float)
    if origin.shape != (spec.d,):
        raise GridError("origin must have d coordinates")
    d, n = spec.d, int(spec.n)
    shape = (n,) * d
    N = n ** d
    ids = np.arange(N).reshape(shape)
    nbr = np.empty((N, d, 2), dtype=np.int64)
    for i in range(d):
        nbr[:, i, 0] = np.roll(ids, 1, axis=i).ravel()
        nbr[:, i, 1] = np.roll(ids, -1, axis=i).ravel()
    faces = np.empty((d * N, 3), dtype=np.int64)
    for i in range(d):
        faces[i * N:(i + 1) * N, 0] = i
        faces[i * N:(i + 1) * N, 1] = np.arange(N)
        faces[i * N:(i + 1) * N, 2] = nbr[:, i, 1]
    h = spec.side / n
    grids = np.meshgrid(*[np.arange(n) for _ in range(d)], indexing="ij")
    centers = np.stack([origin[i] + (g.ravel() + 0.5) * h for i, g in enumerate(grids)])
    for arr in (nbr, faces, centers):
        arr.setflags(write=False)
    return Grid(spec=GridSpec(d, n, float(spec.side), tuple(origin.tolist())),
                h=h, origin=origin, nbr=nbr, faces=faces, _centers=centers)


def neighbor(grid: Grid, cell: int, axis: int, direction: int) -> int:
    """Periodic neighbour of ``cell`` one step along ``axis`` (0-based)."""
    if direction not in (-1, 1):
        raise GridError("direction must be -1 or +1")
    return int(grid.nbr[cell, axis, (direction + 1) // 2])


def cell_integral(grid: Grid, values: np.ndarray) -> float:
    """``sum_K |K| v_K`` with correctly rounded (order independent) summation."""
    v = np.asarray(values, dtype=float).ravel()
    return grid.cell_volume * math.fsum(v.tolist())


def face_integral(grid: Grid, values: np.ndarray) -> float:
    """``sum_sigma |sigma| v_sigma`` over all stored faces."""
    v = np.asarray(values, dtype=float).ravel()
    return grid.face_area * math.fsum(v.tolist())


def dual_integral(grid: Grid, values: np.ndarray) -> float:
    """Integral of a dual-cell piecewise constant, ``sum_sigma |D_sigma| v``."""
    v = np.asarray(values, dtype=float).ravel()
    return grid.cell_volume * math.fsum(v.tolist())


@dataclass
class State:
    """Discrete density and velocity at time ``t``."""

    grid: Grid
    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.rho = np.ascontiguousarray(self.rho, dtype=float).reshape(self.grid.ncells)
        self.u = np.ascontiguousarray(self.u, dtype=float).reshape(self.grid.d, self.grid.ncells)

    @property
    def m(self) -> np.ndarray:
        return self.rho * self.u

    def copy(self) -> "State":
        return State(self.grid, self.rho.copy(), self.u.copy(), self.t)

    def check_positive(self) -> None:
        if not np.all(self.rho > 0):
            raise ValueError("density must be strictly positive")


def inject(coarse: Grid, fine: Grid, values: np.ndarray) -> np.ndarray:
    """Copy coarse piecewise constants onto a nested fine grid.

    Works for scalar ``(N_c,)`` or stacked ``(k, N_c)`` arrays.
    """
    r = nesting_ratio(coarse, fine)
    v = np.asarray(values, dtype=float)
    lead = v.shape[:-1]
    arr = v.reshape(lead + coarse.shape)
    for ax in range(coarse.d):
        arr = np.repeat(arr, r, axis=len(lead) + ax)
    return arr.reshape(lead + (fine.ncells,))


def nesting_ratio(coarse: Grid, fine: Grid) -> int:
    if coarse.d != fine.d or coarse.side != fine.side or not np.allclose(coarse.origin, fine.origin):
        raise GridError("grids do not cover the same torus")
    if fine.n % coarse.n != 0:
        raise GridError(f"grid n={fine.n} is not a refinement of n={coarse.n}")
    return fine.n // coarse.n
