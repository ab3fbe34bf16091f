import math

import numpy as np
import pytest

from pennsfv.geometry import (COLLAR, INNER, OUTER, Ball, Custom, Flower, GeometryError, Ring,
                              boundary_cells, classify_cells, masked_norm, one_ring_dilation,
                              polar_angle, shape_from_config, split_layers)
from pennsfv.grid import GridSpec, build_grid

RING = Ring((0.0, 0.0), 0.2, 0.7)
FLOWER = Flower((0.0, 0.0), r_in=0.2, base=0.7, delta=0.05)


def grid(n, d=2):
    return build_grid(GridSpec(d, n, 2.0))


def cell_at(g, x):
    c = g.centers()
    return int(np.argmin(((c - np.asarray(x)[:, None]) ** 2).sum(axis=0)))


def test_ring_examples():
    g = grid(10)
    mask = classify_cells(RING, g)
    assert mask[cell_at(g, (0.5, 0.1))]
    assert not mask[cell_at(g, (0.1, 0.1))]


def test_ring_rejects_bad_radii():
    with pytest.raises(GeometryError):
        Ring((0.0, 0.0), 0.7, 0.2)
    with pytest.raises(GeometryError):
        Ring((0.0, 0.0), 0.0, 0.2)


@pytest.mark.parametrize("shape", [RING, Ball((0.1, -0.05), 0.6), FLOWER])
@pytest.mark.parametrize("n", [10, 20, 40])
def test_fluid_cells_are_inside(shape, n, rng):
    g = grid(n)
    mask = classify_cells(shape, g)
    cells = np.flatnonzero(mask)
    # corners included: closed cells must lie in the open domain
    pts = g.centers()[:, cells, None] + g.h * rng.uniform(-0.5, 0.5, (2, len(cells), 100))
    corners = g.centers()[:, cells, None] + 0.5 * g.h * np.array([[-1, -1, 1, 1], [-1, 1, -1, 1]])[:, None, :]
    assert shape.inside(pts.reshape(2, -1)).all()
    assert shape.inside(corners.reshape(2, -1)).all()


@pytest.mark.parametrize("shape", [RING, FLOWER])
def test_certified_outside_cells_miss_domain(shape, rng):
    g = grid(40)
    _, outside = shape.certify(g)
    cells = np.flatnonzero(outside)
    pts = g.centers()[:, cells, None] + g.h * rng.uniform(-0.5, 0.5, (2, len(cells), 50))
    assert not shape.inside(pts.reshape(2, -1)).any()


def test_ring_exact_classification_matches_brute_force():
    g = grid(20)
    mask = classify_cells(RING, g)
    # brute force: dense sampling including the boundary of each cell
    t = np.linspace(-0.5, 0.5, 41)
    X, Y = np.meshgrid(t, t, indexing="ij")
    local = np.stack([X.ravel(), Y.ravel()])
    pts = g.centers()[:, :, None] + g.h * local[:, None, :]
    brute = RING.inside(pts.reshape(2, -1)).reshape(g.ncells, -1).all(axis=1)
    # sampling can only miss a violation, never invent one
    assert np.all(mask <= brute)
    assert np.sum(brute & ~mask) == 0


def test_missing_area_vanishes_linearly():
    exact = math.pi * (0.7 ** 2 - 0.2 ** 2)
    hs, gaps = [], []
    for m in range(5):
        g = grid(10 * 2 ** m)
        mask = classify_cells(RING, g)
        hs.append(g.h)
        gaps.append(exact - mask.sum() * g.cell_volume)
    assert all(x > 0 for x in gaps)
    slope = np.polyfit(np.log(hs), np.log(gaps), 1)[0]
    assert abs(slope - 1) <= 0.3


def test_fluid_area_monotone_under_refinement():
    for shape in (RING, Ball((0.0, 0.0), 0.55)):
        areas = [classify_cells(shape, grid(10 * 2 ** m)).sum() * (0.2 * 2.0 ** -m) ** 2 for m in range(5)]
        assert all(b >= a - 1e-12 for a, b in zip(areas, areas[1:]))


def test_collar_layer_measure():
    # three cells wide across a curve; a unit cell projects to mean width 4/pi
    perimeter = 2 * math.pi * (0.2 + 0.7)
    c_geom = 3 * (4 / math.pi) * perimeter
    hs, meas = [], []
    for m in range(5):
        g = grid(10 * 2 ** m)
        labels = split_layers(classify_cells(RING, g), RING, g)
        area = np.sum(labels == COLLAR) * g.cell_volume
        assert area <= 1.05 * c_geom * g.h
        hs.append(g.h)
        meas.append(area)
    assert meas[-1] / hs[-1] == pytest.approx(c_geom, rel=0.05)
    assert abs(np.polyfit(np.log(hs), np.log(meas), 1)[0] - 1) <= 0.3


@pytest.mark.parametrize("shape", [RING, FLOWER])
def test_split_partition_properties(shape):
    g = grid(40)
    mask = classify_cells(shape, g)
    labels = split_layers(mask, shape, g)
    assert set(np.unique(labels)) <= {INNER, COLLAR, OUTER}
    assert not np.any(mask & (labels == OUTER))
    assert not np.any(~mask & (labels == INNER))
    # fluid cells next to a solid cell belong to the collar
    sol = ~mask
    for i in range(2):
        for s in (0, 1):
            touching = mask & sol[g.nbr[:, i, s]]
            assert np.all(labels[touching] == COLLAR)


def test_tiny_ball_collar_is_one_ring():
    g = grid(10)
    c = g.centers()[:, cell_at(g, (0.3, 0.3))]
    ball = Ball(tuple(c), 0.01)
    b = boundary_cells(ball, g)
    assert b.sum() == 1
    labels = split_layers(classify_cells(ball, g), ball, g)
    assert np.sum(labels == COLLAR) == 9
    assert np.array_equal(one_ring_dilation(g, b), labels == COLLAR)


def test_seam_rejected():
    g = grid(10)
    with pytest.raises(GeometryError):
        classify_cells(Ring((0.0, 0.0), 0.2, 0.95), g)
    with pytest.raises(GeometryError):
        classify_cells(Ring((0.5, 0.0), 0.2, 0.7), g)
    # a bigger torus accommodates the same ring
    classify_cells(Ring((0.0, 0.0), 0.2, 0.95), build_grid(GridSpec(2, 30, 3.0)))


def test_flower_radius_law():
    x = np.array([[0.0, 0.3], [0.79, 0.0]])
    phi = polar_angle(x, (0.0, 0.0))
    assert np.allclose(phi, [0.0, math.pi / 2])
    r = FLOWER.outer_radius(phi)
    assert np.allclose(r, [0.8, 0.8])
    assert FLOWER.inside(np.array([[0.0], [0.79]]))[0]
    # between petals (phi = pi/8) the radius dips to the base
    p = np.array([[math.sin(math.pi / 8) * 0.72], [math.cos(math.pi / 8) * 0.72]])
    assert not FLOWER.inside(p)[0]


def test_custom_shape_and_config():
    g = grid(10)
    box = Custom(indicator=lambda x: (np.abs(x) < 0.5).all(axis=0), bound=0.71)
    mask = classify_cells(box, g)
    assert mask.sum() == 16
    s = shape_from_config({"kind": "ring", "r_in": 0.2, "r_out": 0.7, "center": [0, 0]})
    assert s == RING
    assert shape_from_config({"kind": "flower", "delta": 0.05}).outer_radius(0.0) == pytest.approx(0.8)
    with pytest.raises(GeometryError):
        shape_from_config({"kind": "torus"})


def test_masked_norm():
    g = grid(10)
    region = np.zeros(g.ncells, bool)
    region[:7] = True
    assert masked_norm(g, np.zeros(g.ncells), region, 2) == 0.0
    for p in (1, 2, 1.4):
        assert masked_norm(g, np.ones(g.ncells), region, p) == pytest.approx((7 * g.cell_volume) ** (1 / p))
    assert masked_norm(g, np.ones(g.ncells), np.zeros(g.ncells, bool), 2) == 0.0
    v = np.vstack([np.full(g.ncells, 3.0), np.full(g.ncells, 4.0)])
    everywhere = np.ones(g.ncells, bool)
    assert masked_norm(g, v, everywhere, 2) == pytest.approx(math.sqrt(25 * 4.0))
    with pytest.raises(ValueError):
        masked_norm(g, v, everywhere, 0.5)


def test_three_dimensional_ball():
    g = grid(10, d=3)
    ball = Ball((0.0, 0.0, 0.0), 0.55)
    mask = classify_cells(ball, g)
    c = g.centers()[:, mask]
    assert np.all(np.sqrt(((np.abs(c) + 0.5 * g.h) ** 2).sum(axis=0)) < 0.55)


@pytest.mark.parametrize("shape", [RING, FLOWER, Ball((0.0, 0.0), 0.6)])
@pytest.mark.parametrize("n", [10, 20, 40, 80])
def test_classification_is_point_symmetric(shape, n):
    # corners landing exactly on r = 0.2 must be decided the same way on both sides
    g = grid(n)
    flip = np.arange(g.ncells).reshape(n, n)[::-1, ::-1].ravel()
    mask = classify_cells(shape, g)
    assert np.array_equal(mask, mask[flip])
    b = boundary_cells(shape, g)
    assert np.array_equal(b, b[flip])
