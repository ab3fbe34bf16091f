"""Fluid-domain shapes, fluid/solid cell classification and boundary-layer splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid

FLUID, SOLID = 1, 0
INNER, COLLAR, OUTER = 0, 1, 2


class GeometryError(ValueError):
    pass


def _box_distance_range(grid: Grid, center: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact min/max Euclidean distance from ``center`` to each closed cell."""
    c = grid.centers()
    lo = c - 0.5 * grid.h
    hi = c + 0.5 * grid.h
    ctr = np.asarray(center, dtype=float)[:, None]
    near = np.maximum(np.maximum(lo - ctr, ctr - hi), 0.0)
    far = np.maximum(np.abs(lo - ctr), np.abs(hi - ctr))
    # snap offsets to a 1e-10 h lattice so mirror-image cells see identical
    # numbers and boundary contact is decided consistently
    near = np.round(near / grid.h, 10) * grid.h
    far = np.round(far / grid.h, 10) * grid.h
    return np.sqrt((near ** 2).sum(axis=0)), np.sqrt((far ** 2).sum(axis=0))


@dataclass(frozen=True)
class Shape:
    """Base class; subclasses define ``inside`` and a cell certifier."""

    center: tuple[float, ...] = (0.0, 0.0)

    kind = "shape"

    def inside(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def radius_bound(self) -> float:
        """Radius of a ball around ``center`` containing the shape's boundary."""
        raise NotImplementedError

    def certify(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(inside, outside)``: cells certainly contained in the open
        domain, and cells certainly disjoint from its closure."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Shape):
    r: float = 0.5
    kind = "ball"

    def inside(self, x):
        ctr = np.asarray(self.center, dtype=float)[:, None]
        return np.sqrt(((x - ctr) ** 2).sum(axis=0)) < self.r

    def radius_bound(self):
        return self.r

    def certify(self, grid):
        dmin, dmax = _box_distance_range(grid, np.asarray(self.center))
        return dmax < self.r, dmin > self.r

    def params(self):
        return {"kind": "ball", "r": self.r, "center": list(self.center)}


@dataclass(frozen=True)
class Ring(Shape):
    r_in: float = 0.2
    r_out: float = 0.7
    kind = "ring"

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise GeometryError("ring requires 0 < r_in < r_out")

    def inside(self, x):
        ctr = np.asarray(self.center, dtype=float)[:, None]
        r = np.sqrt(((x - ctr) ** 2).sum(axis=0))
        return (r > self.r_in) & (r < self.r_out)

    def radius_bound(self):
        return self.r_out

    def certify(self, grid):
        dmin, dmax = _box_distance_range(grid, np.asarray(self.center))
        return (dmin > self.r_in) & (dmax < self.r_out), (dmax < self.r_in) | (dmin > self.r_out)

    def params(self):
        return {"kind": "ring", "r_in": self.r_in, "r_out": self.r_out, "center": list(self.center)}


def polar_angle(x: np.ndarray, center) -> np.ndarray:
    """Full-quadrant angle used by the flower boundary, ``atan2(x_1, x_2)``."""
    ctr = np.asarray(center, dtype=float)
    return np.arctan2(x[0] - ctr[0], x[1] - ctr[1])


@dataclass(frozen=True)
class Flower(Shape):
    """``r_in < |x| < (base + delta) + delta cos(lobes * phi)`` in the first two coordinates."""

    r_in: float = 0.2
    base: float = 0.7
    delta: float = 0.05
    lobes: int = 8
    samples: int = 8
    kind = "flower"

    def __post_init__(self):
        if not 0 < self.r_in < self.base or self.delta < 0:
            raise GeometryError("flower requires 0 < r_in < base and delta >= 0")

    def outer_radius(self, phi):
        return (self.base + self.delta) + self.delta * np.cos(self.lobes * phi)

    def inside(self, x):
        ctr = np.asarray(self.center, dtype=float)[:, None]
        r = np.sqrt(((x - ctr) ** 2).sum(axis=0))
        return (r > self.r_in) & (r < self.outer_radius(polar_angle(x, self.center)))

    def in_petals(self, x):
        """Points inside the outer flower boundary (ignores the inner hole)."""
        ctr = np.asarray(self.center, dtype=float)[:, None]
        r = np.sqrt(((x - ctr) ** 2).sum(axis=0))
        return r < self.outer_radius(polar_angle(x, self.center))

    def radius_bound(self):
        return self.base + 2 * self.delta

    def certify(self, grid):
        ctr = np.asarray(self.center, dtype=float)
        dmin, dmax = _box_distance_range(grid, ctr)
        r_lo, r_hi = self.base, self.base + 2 * self.delta
        s = self.samples
        # sample lattice including corners; every point of K is within rad of a sample
        t = np.linspace(-0.5, 0.5, s)
        mesh = np.meshgrid(*[t] * grid.d, indexing="ij")
        local = np.stack([m.ravel() for m in mesh])
        rad = 0.5 * grid.h * math.sqrt(grid.d) / (s - 1)
        band = ~((dmax < r_lo) | (dmin > r_hi))
        cells = np.flatnonzero(band & (dmax >= self.r_in))
        pts = grid.centers()[:, cells, None] + grid.h * local[:, None, :]
        flat = pts.reshape(grid.d, -1)
        r = np.sqrt(((flat - ctr[:, None]) ** 2).sum(axis=0))
        g = self.outer_radius(polar_angle(flat, ctr)) - r
        # Lipschitz constant of R(phi) - |x| on |x| >= r_lo - rad
        lip = math.sqrt(1.0 + (self.lobes * self.delta / max(r_lo - rad, 1e-12)) ** 2)
        g = g.reshape(len(cells), -1)
        sure_in = np.all(g > lip * rad, axis=1)
        sure_out = np.all(g < -lip * rad, axis=1)
        inner_ok = dmin > self.r_in
        inside = inner_ok & (dmax < r_lo)
        inside[cells] = inner_ok[cells] & sure_in
        outside = (dmax < self.r_in) | (dmin > r_hi)
        outside[cells] |= sure_out
        return inside, outside

    def params(self):
        return {"kind": "flower", "r_in": self.r_in, "base": self.base, "delta": self.delta,
                "lobes": self.lobes, "center": list(self.center)}


@dataclass(frozen=True)
class Custom(Shape):
    """Domain given only by a pointwise indicator; classified by sampling."""

    indicator: Callable[[np.ndarray], np.ndarray] = field(default=lambda x: np.zeros(x.shape[1], bool))
    bound: float = 1.0
    samples: int = 8
    kind = "custom"

    def inside(self, x):
        return np.asarray(self.indicator(x), dtype=bool)

    def radius_bound(self):
        return self.bound

    def certify(self, grid):
        t = np.linspace(-0.5, 0.5, self.samples)
        mesh = np.meshgrid(*[t] * grid.d, indexing="ij")
        local = np.stack([m.ravel() for m in mesh])
        pts = grid.centers()[:, :, None] + grid.h * local[:, None, :]
        vals = self.inside(pts.reshape(grid.d, -1)).reshape(grid.ncells, -1)
        return np.all(vals, axis=1), np.zeros(grid.ncells, dtype=bool)

    def params(self):
        return {"kind": "custom", "bound": self.bound, "center": list(self.center)}


def shape_from_config(cfg: dict) -> Shape:
    kind = cfg.get("kind")
    center = tuple(float(c) for c in cfg.get("center", (0.0, 0.0)))
    if kind == "ball":
        return Ball(center=center, r=float(cfg["r"]))
    if kind == "ring":
        return Ring(center=center, r_in=float(cfg["r_in"]), r_out=float(cfg["r_out"]))
    if kind == "flower":
        return Flower(center=center, r_in=float(cfg.get("r_in", 0.2)), base=float(cfg.get("base", 0.7)),
                      delta=float(cfg["delta"]), lobes=int(cfg.get("lobes", 8)))
    raise GeometryError(f"unknown shape kind {kind!r}")


def _check_seam(shape: Shape, grid: Grid) -> None:
    ctr = np.asarray(shape.center, dtype=float)
    if ctr.shape != (grid.d,):
        raise GeometryError("shape center must have d coordinates")
    lo = grid.origin
    R = shape.radius_bound()
    # cells meeting the boundary lie within the cell-snapped bounding box; the
    # collar adds one cell on each side and must not wrap across the seam
    top = lo + np.ceil((ctr + R - lo) / grid.h - 1e-9) * grid.h + grid.h
    bot = lo + np.floor((ctr - R - lo) / grid.h + 1e-9) * grid.h - grid.h
    tol = 1e-9 * grid.side
    if np.any(top > lo + grid.side + tol) or np.any(bot < lo - tol):
        raise GeometryError("shape boundary (with its collar layer) reaches the torus seam")


def classify_cells(shape: Shape, grid: Grid) -> np.ndarray:
    """Boolean mask, True for cells ``K`` contained in the fluid domain."""
    _check_seam(shape, grid)
    inside, _ = shape.certify(grid)
    return inside


def boundary_cells(shape: Shape, grid: Grid) -> np.ndarray:
    """Cells whose closure may meet the fluid boundary (conservative)."""
    inside, outside = shape.certify(grid)
    return ~(inside | outside)


def one_ring_dilation(grid: Grid, mask: np.ndarray) -> np.ndarray:
    """All cells whose closure touches a flagged cell (face and corner neighbours)."""
    out = np.asarray(mask, dtype=bool).reshape(grid.shape).copy()
    for ax in range(grid.d):
        out = out | np.roll(out, 1, axis=ax) | np.roll(out, -1, axis=ax)
    return out.ravel()


def split_layers(mask: np.ndarray, shape: Shape, grid: Grid) -> np.ndarray:
    """Label cells INNER / COLLAR / OUTER."""
    collar = one_ring_dilation(grid, boundary_cells(shape, grid))
    labels = np.where(mask, INNER, OUTER)
    labels[collar] = COLLAR
    return labels


def masked_norm(grid: Grid, field: np.ndarray, region: np.ndarray, p: float) -> float:
    """``(sum_{K in region} h^d |v_K|^p)^(1/p)``; vector fields use the Euclidean norm per cell."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    v = np.asarray(field, dtype=float)
    mag = np.sqrt((v ** 2).sum(axis=0)) if v.ndim == 2 else np.abs(v)
    sel = mag[np.asarray(region, dtype=bool)]
    if sel.size == 0:
        return 0.0
    return (grid.cell_volume * math.fsum((sel ** p).tolist())) ** (1.0 / p)
