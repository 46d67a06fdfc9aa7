"""Radius laws: interval masses, moments, moment-condition reports, quantile
sampling, and the Poisson-Boolean volume (pvol) of cones over cube unions.

Derived expectations come from the quadrature/inversion oracles defined first.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from boolperc import (
    ConeBase,
    MomentConditionError,
    RadiusLaw,
    cone_pvol,
    cone_pvol_constant,
    cube_ball_minkowski_volume,
    validate_conditions,
)

# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def pareto_mass_quadrature(alpha: float, rmin: float, lo: float, hi: float) -> float:
    """Quadrature oracle for Pareto interval mass using the density
    alpha * rmin^alpha * r^(-alpha-1) on [max(lo, rmin), hi]."""
    a = max(lo, rmin)
    if hi <= a:
        return 0.0
    val, _ = integrate.quad(lambda r: alpha * rmin**alpha * r ** (-alpha - 1), a, hi)
    return val


def pareto_moment_quadrature(alpha: float, rmin: float, p: float) -> float:
    val, _ = integrate.quad(
        lambda r: r**p * alpha * rmin**alpha * r ** (-alpha - 1),
        rmin,
        math.inf,
        limit=200,
    )
    return val


def pareto_quantile_numeric(alpha: float, rmin: float, u: float) -> float:
    """Invert the Pareto CDF F(r) = 1 - (rmin/r)^alpha by bisection."""
    f = lambda r: 1.0 - (rmin / r) ** alpha - u
    return optimize.brentq(f, rmin, 1e9, xtol=1e-12)


# ---------------------------------------------------------------------------
# interval_mass
# ---------------------------------------------------------------------------


def test_interval_mass_dirac_closed():
    assert RadiusLaw.dirac(1.0).interval_mass(0.0, 1.0) == 1.0


def test_interval_mass_uniform():
    assert RadiusLaw.uniform(0.5, 1.5).interval_mass(1.0, 2.0) == pytest.approx(0.5)


def test_interval_mass_pareto_tail():
    # Oracle first: quadrature of the density on [2, 1e6].
    oracle = pareto_mass_quadrature(3.0, 1.0, 2.0, math.inf)
    assert oracle == pytest.approx(0.125, abs=1e-9)
    assert RadiusLaw.pareto(3.0, 1.0).interval_mass(2.0, math.inf) == pytest.approx(
        0.125, abs=1e-12
    )


def test_interval_mass_total():
    for mu in (RadiusLaw.dirac(2.0), RadiusLaw.uniform(0.0, 1.0), RadiusLaw.pareto(4.0, 0.5)):
        assert mu.interval_mass(0.0, math.inf) == pytest.approx(1.0, abs=1e-12)


@given(
    st.sampled_from(["dirac", "uniform", "pareto"]),
    st.floats(0.0, 4.0),
    st.floats(0.01, 3.0),
    st.floats(0.01, 3.0),
)
def test_interval_mass_additive(kind, lo, w1, w2):
    mu = {
        "dirac": RadiusLaw.dirac(1.3),
        "uniform": RadiusLaw.uniform(0.4, 2.1),
        "pareto": RadiusLaw.pareto(3.5, 0.7),
    }[kind]
    mid, hi = lo + w1, lo + w1 + w2
    both = mu.interval_mass(lo, hi)
    # half-open pieces tile the closed interval without double counting
    split = mu.interval_mass_halfopen(lo, mid) + mu.interval_mass_halfopen(mid, hi)
    atom_hi = mu.interval_mass(hi, hi)
    assert both == pytest.approx(split + atom_hi, abs=1e-12)


def test_halfopen_band_convention_dirac():
    # the atom at an integer boundary belongs to the band starting there
    mu = RadiusLaw.dirac(1.0)
    assert mu.interval_mass_halfopen(0.0, 1.0) == 0.0
    assert mu.interval_mass_halfopen(1.0, 2.0) == 1.0


# ---------------------------------------------------------------------------
# moment
# ---------------------------------------------------------------------------


def test_moment_dirac():
    assert RadiusLaw.dirac(2.0).moment(3.0) == pytest.approx(8.0)


def test_moment_pareto_finite():
    oracle = pareto_moment_quadrature(3.0, 1.0, 1.0)
    assert oracle == pytest.approx(1.5, abs=1e-8)
    assert RadiusLaw.pareto(3.0, 1.0).moment(1.0) == pytest.approx(1.5, abs=1e-8)


def test_moment_pareto_divergent():
    assert RadiusLaw.pareto(3.0, 1.0).moment(3.0) == math.inf
    assert RadiusLaw.pareto(3.0, 1.0).moment(4.0) == math.inf


def test_moment_uniform_quadrature():
    mu = RadiusLaw.uniform(0.5, 1.5)
    oracle, _ = integrate.quad(lambda r: r**2.5, 0.5, 1.5)
    assert mu.moment(2.5) == pytest.approx(oracle, rel=1e-9)


# ---------------------------------------------------------------------------
# validate_conditions
# ---------------------------------------------------------------------------


def test_conditions_dirac():
    rep = validate_conditions(RadiusLaw.dirac(1.0), 2)
    assert rep.weak and rep.strong
    assert rep.weak_order == 2.0 and rep.strong_order == 7.0


def test_conditions_pareto_borderline():
    # alpha = 2.5 > d = 2, so the order-d moment is finite (weak holds) while
    # the order-(5d-3) = 7 moment diverges (strong fails).
    rep = validate_conditions(RadiusLaw.pareto(2.5, 1.0), 2)
    assert rep.weak is True
    assert rep.strong is False


def test_conditions_pareto_strong():
    rep = validate_conditions(RadiusLaw.pareto(8.0, 1.0), 2)
    assert rep.weak and rep.strong


def test_conditions_pareto_weak_fails():
    rep = validate_conditions(RadiusLaw.pareto(1.5, 1.0), 2)
    assert not rep.weak and not rep.strong


# ---------------------------------------------------------------------------
# quantile / sampling
# ---------------------------------------------------------------------------


def test_quantile_dirac():
    assert RadiusLaw.dirac(2.0).quantile(0.77) == 2.0


def test_quantile_uniform_midpoint():
    assert RadiusLaw.uniform(1.0, 3.0).quantile(0.5) == pytest.approx(2.0)


def test_quantile_pareto():
    oracle = pareto_quantile_numeric(3.0, 1.0, 0.875)
    assert oracle == pytest.approx(2.0, abs=1e-10)
    assert RadiusLaw.pareto(3.0, 1.0).quantile(0.875) == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize(
    "mu",
    [RadiusLaw.dirac(1.5), RadiusLaw.uniform(0.5, 2.5), RadiusLaw.pareto(4.0, 1.0)],
    ids=["dirac", "uniform", "pareto"],
)
def test_quantile_pushforward_reproduces_mass(mu):
    # stratified u values pushed through the quantile reproduce interval masses
    n = 100_000
    u = (np.arange(n) + 0.5) / n
    r = mu.quantile(u)
    for lo, hi in [(0.0, 1.0), (1.0, 2.0), (0.8, 1.6)]:
        frac = float(((r >= lo) & (r <= hi)).mean())
        mass = mu.interval_mass(lo, hi)
        se = math.sqrt(max(mass * (1 - mass), 1e-12) / n)
        assert abs(frac - mass) <= 3 * se + 2.0 / n


def test_quantile_monotone():
    mu = RadiusLaw.pareto(3.0, 1.0)
    u = np.linspace(0.01, 0.99, 50)
    q = mu.quantile(u)
    assert np.all(np.diff(q) >= 0)


# ---------------------------------------------------------------------------
# cone_pvol
# ---------------------------------------------------------------------------


def test_cone_pvol_single_cube_dirac():
    base = ConeBase(2, frozenset({(0, 0)}))
    assert cone_pvol(RadiusLaw.dirac(1.0), base, 2) == pytest.approx(
        1 + 4 + math.pi, abs=1e-7
    )


def test_cone_pvol_single_cube_zero_radius():
    base = ConeBase(2, frozenset({(0, 0)}))
    assert cone_pvol(RadiusLaw.dirac(0.0), base, 2) == pytest.approx(1.0, abs=1e-12)


def test_cone_pvol_two_adjacent_intervals():
    base = ConeBase(1, frozenset({(0,), (1,)}))
    assert cone_pvol(RadiusLaw.dirac(1.0), base, 1) == pytest.approx(4.0, abs=1e-9)


def test_cone_pvol_divergence_signaled():
    base = ConeBase(2, frozenset({(0, 0)}))
    with pytest.raises(MomentConditionError):
        cone_pvol(RadiusLaw.pareto(1.5, 1.0), base, 2)


def test_cone_pvol_single_cube_equals_constant():
    for mu in (RadiusLaw.uniform(0.5, 1.5), RadiusLaw.pareto(8.0, 1.0)):
        base = ConeBase(2, frozenset({(3, -2)}))
        assert cone_pvol(mu, base, 2) == pytest.approx(
            cone_pvol_constant(mu, 2), rel=1e-7
        )


def _random_animal(rng, d: int, n_cubes: int) -> frozenset:
    cubes = {(0,) * d}
    while len(cubes) < n_cubes:
        s = list(cubes)[rng.integers(len(cubes))]
        k = int(rng.integers(d))
        step = int(rng.choice([-1, 1]))
        nxt = list(s)
        nxt[k] += step
        cubes.add(tuple(nxt))
    return frozenset(cubes)


@pytest.mark.parametrize(
    "mu",
    [RadiusLaw.dirac(1.0), RadiusLaw.uniform(0.5, 1.5), RadiusLaw.pareto(8.0, 1.0)],
    ids=["dirac", "uniform", "pareto"],
)
def test_cone_pvol_sandwich_random_animals(mu):
    # |S| <= pvol(cone(S)) <= c_mu * |S| for random cube animals
    rng = np.random.default_rng(42)
    for d in (1, 2):
        c_mu = cone_pvol_constant(mu, d)
        for _ in range(6):
            n_cubes = int(rng.integers(1, 13))
            cubes = _random_animal(rng, d, n_cubes)
            pv = cone_pvol(mu, ConeBase(d, frozenset(cubes)), d)
            assert len(cubes) <= pv + 1e-6
            assert pv <= c_mu * len(cubes) + 1e-6


def test_cone_pvol_origin_base():
    # degenerate base {origin point}: slice at height r is the r-ball
    base = ConeBase(2, frozenset(), include_origin=True)
    got = cone_pvol(RadiusLaw.uniform(0.5, 1.5), base, 2)
    oracle, _ = integrate.quad(lambda r: math.pi * r * r, 0.5, 1.5)
    assert got == pytest.approx(oracle, rel=1e-8)


# ---------------------------------------------------------------------------
# parameter validation and config round trip
# ---------------------------------------------------------------------------


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        RadiusLaw.dirac(-0.1)
    with pytest.raises(ValueError):
        RadiusLaw.uniform(1.0, 1.0)
    with pytest.raises(ValueError):
        RadiusLaw.uniform(-0.5, 1.0)
    with pytest.raises(ValueError):
        RadiusLaw.pareto(0.0, 1.0)
    with pytest.raises(ValueError):
        RadiusLaw.pareto(2.0, -1.0)


def test_spec_round_trip():
    for mu in (RadiusLaw.dirac(0.5), RadiusLaw.uniform(0.5, 1.5), RadiusLaw.pareto(8.0, 1.0)):
        assert RadiusLaw.from_spec(mu.to_spec()) == mu


def test_minkowski_consistency_with_cone_constant():
    # c_mu for a Dirac law is just the single-cube Steiner volume at r0
    for r0 in (0.25, 1.0, 2.0):
        assert cone_pvol_constant(RadiusLaw.dirac(r0), 2) == pytest.approx(
            cube_ball_minkowski_volume(2, r0), rel=1e-9
        )
