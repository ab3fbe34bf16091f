import itertools

import numpy as np
import pytest

from pennsfv import diagnostics as dg

# p on a geometric lattice reaching far enough that 1/p terms drop below 1e-14
P_LATTICE = np.geomspace(1.0, 1e16, 4000)

DS = (2, 3)
GAMMAS = (1.1, 1.25, 1.6, 2.5, 3.5)
ALPHAS = (-0.5, 0.0, 0.6, 1.0, 2.0, 3.0)
GRID = list(itertools.product(DS, GAMMAS, ALPHAS))


def brute_beta_D(d, g, a):
    if g >= 2:
        return 0.0
    if d == 2:
        p = P_LATTICE
        return float(np.min(np.minimum((p * (a + 1) + 4) / (2 * p), 1.0))) * (g - 2) / g
    return min((a + 2) / 3, 1.0) * 3 * (g - 2) / (2 * g)


def brute_beta_R_tilde(d, g, a):
    if g >= 6 / 5:
        return 0.0
    if d == 2:
        p = P_LATTICE[P_LATTICE >= 12 / (5 * g)]
        return float(np.min(np.minimum((1 + a) * p / (2 * (p - 2)), 1.0))) * (5 * g - 6) / (3 * g)
    return min((1 + a) / 2, 1.0) * (5 * g - 6) / (2 * g)


def brute_beta_M(d, g, a):
    if d == 2:
        if g > 2:
            return 0.0
        p = P_LATTICE[P_LATTICE >= 2 * g / (g - 1)]
        c1 = -(p * (a + 1) + 4) / (2 * p * g)
        c2 = (p * (g - 2) - 2 * g) / (p * g)
        return float(np.max(np.maximum(c1, c2)))
    if g <= 2:
        return max(-(a + 2) / (2 * g), (g - 3) / g, -3 / (2 * g))
    return (g - 3) / g if g < 3 else 0.0


def test_grid_has_sixty_points():
    assert len(GRID) == 60


@pytest.mark.parametrize("d, g, a", GRID)
def test_exponents_match_brute_force(d, g, a):
    ex = dg.exponents(d, g, a)
    assert ex.beta_D == pytest.approx(brute_beta_D(d, g, a), abs=1e-12)
    assert ex.beta_R_tilde == pytest.approx(brute_beta_R_tilde(d, g, a), abs=1e-12)
    assert ex.beta_R == pytest.approx(0.0 if d == 2 else brute_beta_R_tilde(d, g, a), abs=1e-12)
    assert ex.beta_M == pytest.approx(brute_beta_M(d, g, a), abs=1e-12)
    assert ex.beta_RE == pytest.approx(min(1.0, (1 + a) / 2, a), abs=1e-12)


@pytest.mark.parametrize("d, g, a", GRID)
def test_orderings(d, g, a):
    ex = dg.exponents(d, g, a)
    assert 0 >= ex.beta_R >= ex.beta_D >= ex.beta_M


@pytest.mark.parametrize("d, g, a", [p for p in GRID if dg.momentum_bound_conditions(*p)])
def test_lower_bounds_under_conditions(d, g, a):
    ex = dg.exponents(d, g, a)
    assert ex.beta_D > -1 and ex.beta_M > -1


def test_beta_D_bound_fails_without_conditions():
    # d=3, gamma <= 6/5, alpha >= 1: the unconditional claim beta_D > -1 does not hold
    ex = dg.exponents(3, 1.1, 1.0)
    assert ex.beta_D == pytest.approx(1.5 * (1.1 - 2) / 1.1)
    assert ex.beta_D < -1
    assert not dg.momentum_bound_conditions(3, 1.1, 1.0)
    notes = dg.regime_notes(3, 1.1, 1.0)
    assert any("VIOLATED" in n for n in notes)
    assert any(n.startswith("warning: beta_D") for n in notes)


@pytest.mark.parametrize("d", DS)
@pytest.mark.parametrize("g", np.linspace(1.05, 4.0, 12))
@pytest.mark.parametrize("a", [1.0, 1.5, 4.0])
def test_large_alpha_forms(d, g, a):
    ex = dg.exponents(d, g, a)
    simple = dg.exponents_large_alpha(d, g)
    assert ex.beta_D == pytest.approx(simple["beta_D"], abs=1e-12)
    assert ex.beta_R == pytest.approx(simple["beta_R"], abs=1e-12)
    assert ex.beta_M == pytest.approx(simple["beta_M"], abs=1e-12)


def test_documented_values():
    assert dg.beta_D(2, 2.0, 0.6) == 0.0 and dg.beta_D(3, 2.7, -0.5) == 0.0
    assert dg.beta_M(3, 3.0, 0.6) == 0.0 and dg.beta_M(3, 4.0, 0.6) == 0.0
    assert dg.beta_R(2, 1.1, 0.6) == 0.0
    assert dg.beta_RE(1.0) == 1.0
    assert dg.beta_RE(0.6) == pytest.approx(0.6)
    assert dg.beta_M(3, 2.5, 0.6) == pytest.approx(-0.2)
    assert dg.beta_D(2, 1.4, 1.0) == pytest.approx(-3 / 7)
    assert dg.beta_RE(-0.5) == pytest.approx(-0.5)


def test_domain_errors():
    for args in ((1, 1.4, 0.6), (2, 1.0, 0.6), (3, 1.4, -1.0)):
        with pytest.raises(ValueError):
            dg.exponents(*args)
    with pytest.raises(ValueError):
        dg.beta_RE(-2.0)


def test_alpha_one_note():
    assert "independent of alpha" in dg.regime_notes(2, 1.4, 1.0)[-1]
    assert dg.regime_notes(2, 1.4, 0.6) == []
