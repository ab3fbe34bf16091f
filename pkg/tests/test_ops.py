import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pennsfv.grid import GridSpec, build_grid, cell_integral
from pennsfv.ops import (average, averages, central_grad, check_ibp, div_h, flux_divergence, grad_E,
                         grad_E_norm2, jump, jumps, laplace_h, project, upwind_flux, upwind_flux_value)


def grid(n, d=2):
    return build_grid(GridSpec(d, n, 2.0))


def sin_cell_average(g, k=math.pi):
    # exact average of sin(k x_1) over each cell
    a = g.centers()[0] - 0.5 * g.h
    b = a + g.h
    return (np.cos(k * a) - np.cos(k * b)) / (k * g.h)


def test_jump_and_average_example():
    g = grid(4)
    K = 5
    L = g.nbr[K, 0, 1]
    f = np.zeros(g.ncells)
    f[K], f[L] = 2.0, 1.0
    assert jump(g, f, (0, K)) == -1.0
    assert average(g, f, (0, K)) == 1.5
    J = jumps(g, f)
    assert J[0, K] == -1.0
    assert averages(g, f)[0, K] == 1.5


def test_jump_antisymmetry(rng):
    g = grid(6)
    f = rng.standard_normal(g.ncells)
    J = jumps(g, f)
    for i in range(2):
        L = g.nbr[:, i, 1]
        # seen from L with the reversed normal the jump flips sign
        assert np.array_equal(f[np.arange(g.ncells)] - f[L], -J[i])


def test_constants_annihilated():
    for d in (2, 3):
        g = grid(6, d)
        c = np.full(g.ncells, 3.7)
        assert not np.any(jumps(g, c))
        assert not np.any(grad_E(g, c))
        assert not np.any(laplace_h(g, c))
        assert not np.any(div_h(g, np.full((d, g.ncells), -1.25)))


def test_vector_jumps_stack():
    g = grid(4)
    v = np.arange(2 * g.ncells, dtype=float).reshape(2, g.ncells)
    J = jumps(g, v)
    assert J.shape == (2, 2, g.ncells)
    assert np.array_equal(J[1], jumps(g, v[1]))


def _eoc(errs):
    return [math.log2(a / b) for a, b in zip(errs, errs[1:])]


def test_grad_E_second_order_at_face_centres():
    errs = []
    for n in (16, 32, 64):
        g = grid(n)
        r = sin_cell_average(g)
        xf = g.centers()[0] + 0.5 * g.h
        errs.append(np.abs(grad_E(g, r)[0] - math.pi * np.cos(math.pi * xf)).max())
    assert all(abs(e - 2) < 0.1 for e in _eoc(errs))


def test_grad_E_norm_uses_dual_volumes(rng):
    g = grid(5)
    f = rng.standard_normal(g.ncells)
    brute = sum(g.h ** 2 * ((f[g.nbr[K, i, 1]] - f[K]) / g.h) ** 2 for K in range(g.ncells) for i in range(2))
    assert grad_E_norm2(g, f) == pytest.approx(brute, rel=1e-13)


def test_div_h_matches_definition_and_converges(rng):
    g = grid(6, 3)
    v = rng.standard_normal((3, g.ncells))
    brute = np.zeros(g.ncells)
    for K in range(g.ncells):
        # (1/h) sum of <v>.n over the 2d faces
        for i in range(3):
            Lp, Lm = g.nbr[K, i, 1], g.nbr[K, i, 0]
            brute[K] += 0.5 * (v[i, K] + v[i, Lp]) - 0.5 * (v[i, K] + v[i, Lm])
    assert np.allclose(div_h(g, v), brute / g.h, atol=1e-12)
    errs = []
    for n in (16, 32, 64):
        g = grid(n)
        w = np.vstack([sin_cell_average(g), np.zeros(g.ncells)])
        errs.append(np.abs(div_h(g, w) - math.pi * np.cos(math.pi * g.centers()[0])).max())
    assert all(abs(e - 2) < 0.1 for e in _eoc(errs))


def test_laplace_converges():
    errs = []
    for n in (16, 32, 64):
        g = grid(n)
        r = project(lambda x: np.sin(math.pi * x[0]), g)
        errs.append(np.abs(laplace_h(g, r) + math.pi ** 2 * np.sin(math.pi * g.centers()[0])).max())
    assert all(abs(e - 2) < 0.1 for e in _eoc(errs))


def test_laplace_sawtooth_seam():
    g = build_grid(GridSpec(2, 4, 4.0))
    idx = np.arange(g.ncells).reshape(4, 4)
    saw = (idx // 4).astype(float).ravel()  # 0,1,2,3 along the first axis
    lap = laplace_h(g, saw).reshape(4, 4)
    # interior rows see a linear profile; the seam rows see the wrap jump of 3
    assert np.all(lap[1:3] == 0.0)
    assert np.all(lap[0] == (1.0 + 3.0 - 0.0) / 1.0)
    assert np.all(lap[3] == (2.0 + 0.0 - 6.0) / 1.0)


def test_central_grad_is_minus_adjoint_of_div(rng):
    for d in (2, 3):
        g = grid(5, d)
        v = rng.standard_normal((d, g.ncells))
        q = rng.standard_normal(g.ncells)
        lhs = cell_integral(g, div_h(g, v) * q)
        rhs = -cell_integral(g, (v * central_grad(g, q)).sum(axis=0))
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_div_telescopes(rng):
    g = grid(8)
    for _ in range(10):
        v = rng.standard_normal((2, g.ncells))
        assert abs(cell_integral(g, div_h(g, v))) <= 1e-12


@pytest.mark.parametrize("f, grad", [
    (lambda x: np.sin(math.pi * x[0]), math.pi),
    (lambda x: np.cos(math.pi * x[0]) * np.sin(math.pi * x[1]), math.pi * math.sqrt(2)),
    (lambda x: np.exp(np.sin(math.pi * (x[0] + x[1]))), math.e * math.pi * math.sqrt(2)),
])
@pytest.mark.parametrize("n", [8, 16, 32])
def test_projection_bounds(f, grad, n):
    g = grid(n)
    P = project(f, g)
    # dense sampling of f within each cell
    t = np.linspace(-0.5, 0.5, 9)
    X, Y = np.meshgrid(t, t, indexing="ij")
    pts = g.centers()[:, :, None] + g.h * np.stack([X.ravel(), Y.ravel()])[:, None, :]
    vals = f(pts.reshape(2, -1)).reshape(g.ncells, -1)
    assert np.abs(vals - P[:, None]).max() <= g.h * grad
    assert np.abs(jumps(g, P)).max() <= g.h * grad


def test_projection_exact_for_sine():
    g = grid(10)
    assert np.allclose(project(lambda x: np.sin(math.pi * x[0]), g), sin_cell_average(g), atol=1e-12)


def test_projection_constant_and_indicator():
    g = grid(7)
    assert np.all(project(lambda x: np.full(x.shape[1], 2.5), g) == pytest.approx(2.5, abs=1e-14))
    half = lambda x: (x[0] > 0.0).astype(float)
    crossed = np.abs(g.centers()[0]) < g.h
    P = project(half, g, crossed=crossed)
    assert np.all((P >= -1e-15) & (P <= 1 + 1e-15))
    straddle = np.abs(g.centers()[0]) < 0.5 * g.h
    assert straddle.any()
    assert np.allclose(P[straddle], 0.5)


def test_projection_idempotent(rng):
    g = grid(6)
    vals = rng.standard_normal(g.ncells)

    def pc(x):
        # evaluate the piecewise constant field at x
        i = np.floor((x - g.origin[:, None]) / g.h).astype(int) % g.n
        return vals[np.ravel_multi_index(tuple(i), g.shape)]

    P = project(pc, g)
    assert np.allclose(P, vals, atol=1e-13)
    assert np.allclose(project(pc, g, crossed=np.ones(g.ncells, bool)), vals, atol=1e-13)


def test_upwind_examples():
    assert upwind_flux_value(2.0, 1.0, 3.0, 0.1, 1.0) == pytest.approx(6.1)
    assert upwind_flux_value(2.0, 1.0, -3.0, 0.1, 1.0) == pytest.approx(-2.9)
    # the tie goes to the inner value
    assert upwind_flux_value(2.0, 1.0, 0.0, 0.1, 1.0) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        upwind_flux_value(1.0, 1.0, 1.0, 0.1, -1.0)


def test_upwind_constant_state():
    g = grid(5)
    F = upwind_flux(g, np.full(g.ncells, 1.5), np.vstack([np.full(g.ncells, 0.4), np.full(g.ncells, -2.0)]), 0.6)
    assert np.allclose(F[0], 0.6)
    assert np.allclose(F[1], -3.0)


def test_upwind_matches_scalar_reference(rng):
    g = grid(5)
    r = rng.uniform(0.5, 2, g.ncells)
    u = rng.standard_normal((2, g.ncells))
    F = upwind_flux(g, r, u, 0.6)
    for K in range(g.ncells):
        for i in range(2):
            L = g.nbr[K, i, 1]
            vn = 0.5 * (u[i, K] + u[i, L])
            assert F[i, K] == pytest.approx(upwind_flux_value(r[K], r[L], vn, g.h, 0.6), abs=1e-14)
    M = np.vstack([r * u[0], r * u[1]])
    FM = upwind_flux(g, M, u, 0.6)
    assert np.allclose(FM[1], upwind_flux(g, M[1], u, 0.6))


def test_flux_divergence_is_conservative(rng):
    for d in (2, 3):
        g = grid(6, d)
        F = upwind_flux(g, rng.uniform(0.1, 3, g.ncells), rng.standard_normal((d, g.ncells)), 0.3)
        assert abs(cell_integral(g, flux_divergence(g, F))) <= 1e-12


def test_ibp(rng):
    g = grid(8)
    for _ in range(10):
        f, v = rng.standard_normal(g.ncells), rng.standard_normal(g.ncells)
        for ax in range(2):
            assert check_ibp(g, f, v, ax) <= 1e-12
    ones = np.ones(g.ncells)
    assert check_ibp(g, ones, rng.standard_normal(g.ncells), 0) <= 1e-15
    assert check_ibp(g, rng.standard_normal(g.ncells), ones, 1) <= 1e-15


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 2 ** 16))
def test_operators_linear(a, b, seed):
    r = np.random.default_rng(seed)
    g = grid(5)
    f1, f2 = r.standard_normal(g.ncells), r.standard_normal(g.ncells)
    v1, v2 = r.standard_normal((2, g.ncells)), r.standard_normal((2, g.ncells))
    tol = 1e-11 * (1 + abs(a) + abs(b))
    for op in (lambda x: grad_E(g, x), lambda x: laplace_h(g, x), lambda x: central_grad(g, x)):
        assert np.allclose(op(a * f1 + b * f2), a * op(f1) + b * op(f2), atol=tol * 100)
    assert np.allclose(div_h(g, a * v1 + b * v2), a * div_h(g, v1) + b * div_h(g, v2), atol=tol * 100)
