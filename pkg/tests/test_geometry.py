"""Geometry layer: ball/cube intersection predicates, Steiner volumes,
cone membership, and the sup-norm ordering helpers.

Derived expectations are frozen from the independent oracles defined at the
top of this file (fine-grid point sampling and hit-or-miss Monte Carlo).
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boolperc import (
    Ball,
    ConeBase,
    HypercubeIndex,
    balls_intersect,
    cube_ball_minkowski_volume,
    cubes_intersecting_ball,
    dilated_union_volume,
    enumerate_hypercubes,
    hypercube_intersects_cone,
    supnorm,
)

# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def grid_cubes_in_ball(center: tuple[float, ...], radius: float, pitch: float) -> set:
    """Independent oracle for cubes_intersecting_ball: lay a fine grid over the
    ball's bounding box, keep grid points inside the closed ball, and floor
    them to integer cubes.  Misses only cubes whose overlap with the ball is
    thinner than the grid pitch, so it under-approximates: oracle ⊆ truth."""
    d = len(center)
    axes = [
        np.arange(c - radius, c + radius + pitch / 2, pitch, dtype=float)
        for c in center
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    keep = ((pts - np.asarray(center)) ** 2).sum(axis=1) <= radius**2 + 1e-12
    pts = pts[keep]
    return {tuple(int(v) for v in np.floor(p)) for p in pts}


def hit_or_miss_dilated_cube(d: int, r: float, n: int, rng) -> tuple[float, float]:
    """Monte Carlo oracle for the volume of [0,1]^d dilated by a radius-r ball:
    sample the bounding box, count points within r of the cube (clamp to the
    cube to get the distance).  Returns (estimate, standard error)."""
    lo, hi = -r, 1.0 + r
    pts = rng.uniform(lo, hi, size=(n, d))
    gap = np.maximum(np.abs(pts - 0.5) - 0.5, 0.0)
    p = float(((gap**2).sum(axis=1) <= r * r).mean())
    box = (hi - lo) ** d
    return p * box, box * math.sqrt(p * (1 - p) / n)


def grid_box_distance_to_cubes(
    spatial: tuple[int, ...], base_cubes: list[tuple[int, ...]], pitch: float
) -> float:
    """Dense-sampling oracle for cone membership: minimum Euclidean distance
    from any grid point of the box spatial+[0,1]^d to the base cube union."""
    d = len(spatial)
    axes = [np.arange(s, s + 1 + pitch / 2, pitch, dtype=float) for s in spatial]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    best = np.full(pts.shape[0], np.inf)
    for cube in base_cubes:
        gap = np.maximum(np.abs(pts - (np.asarray(cube) + 0.5)) - 0.5, 0.0)
        best = np.minimum(best, np.sqrt((gap**2).sum(axis=1)))
    return float(best.min())


# ---------------------------------------------------------------------------
# balls_intersect
# ---------------------------------------------------------------------------


def test_balls_intersect_tangent_counts():
    assert balls_intersect(Ball((0.0, 0.0), 1.0), Ball((3.0, 0.0), 2.0))


def test_balls_intersect_separated():
    assert not balls_intersect(Ball((0.0, 0.0), 1.0), Ball((3.01, 0.0), 2.0))


def test_balls_intersect_nested():
    assert balls_intersect(Ball((0.0,), 0.5), Ball((0.0,), 0.1))


@given(
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(0.01, 3),
    st.floats(0.01, 3),
)
def test_balls_intersect_symmetric_and_matches_distance(cx, cy, ra, rb):
    a, b = Ball((cx, 0.0), ra), Ball((cy, 0.0), rb)
    expected = abs(cx - cy) <= ra + rb
    assert balls_intersect(a, b) == expected
    assert balls_intersect(b, a) == expected


# ---------------------------------------------------------------------------
# cubes_intersecting_ball
# ---------------------------------------------------------------------------


def test_cubes_small_interval():
    assert cubes_intersecting_ball(Ball((0.5,), 0.2)) == {(0,)}


def test_cubes_interval_spans_neighbours():
    assert cubes_intersecting_ball(Ball((0.5,), 0.6)) == {(-1,), (0,), (1,)}


def test_cubes_unit_ball_centered_in_cube():
    # Oracle first: fine-grid sampling of the ball floored to integer cubes.
    oracle = grid_cubes_in_ball((0.5, 0.5), 1.0, pitch=0.005)
    expected = {(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)}
    assert oracle == expected
    assert cubes_intersecting_ball(Ball((0.5, 0.5), 1.0)) == expected


@pytest.mark.parametrize("seed", range(8))
def test_cubes_match_grid_oracle_random(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    center = tuple(float(v) for v in rng.uniform(-2, 2, size=d))
    radius = float(rng.uniform(0.1, 1.8))
    got = cubes_intersecting_ball(Ball(center, radius))

    pitch = 0.02
    margin = pitch * math.sqrt(d) / 2
    c = np.asarray(center)
    for cube in got:
        # every reported cube must contain a grid point within radius+margin
        axes = [np.arange(s, s + 1 + pitch / 2, pitch) for s in cube]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        dmin = float(np.sqrt(((pts - c) ** 2).sum(axis=1)).min())
        assert dmin <= radius + margin, (cube, dmin, radius)
    # no excluded neighbour of a reported cube may contain a grid point
    # within radius (grid points lie inside the cube, so this is exact)
    neighbours = set()
    for cube in got:
        for k in range(d):
            for step in (-1, 1):
                nb = list(cube)
                nb[k] += step
                neighbours.add(tuple(nb))
    for cube in neighbours - got:
        axes = [np.arange(s, s + 1 + pitch / 2, pitch) for s in cube]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        dmin = float(np.sqrt(((pts - c) ** 2).sum(axis=1)).min())
        assert dmin > radius, (cube, dmin, radius)


# ---------------------------------------------------------------------------
# cube_ball_minkowski_volume
# ---------------------------------------------------------------------------


def test_minkowski_volume_interval():
    assert cube_ball_minkowski_volume(1, 0.5) == pytest.approx(2.0, abs=1e-12)


def test_minkowski_volume_no_dilation():
    assert cube_ball_minkowski_volume(3, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_minkowski_volume_unit_square_unit_radius():
    # Closed Steiner value 1 + 4 + pi, cross-checked by hit-or-miss MC.
    exact = 1.0 + 4.0 + math.pi
    assert cube_ball_minkowski_volume(2, 1.0) == pytest.approx(exact, rel=1e-12)
    est, se = hit_or_miss_dilated_cube(2, 1.0, n=1_000_000, rng=np.random.default_rng(7))
    assert abs(est - exact) <= 3 * se


@pytest.mark.parametrize("d", [1, 2, 3])
def test_minkowski_volume_strictly_increasing(d):
    grid = np.linspace(0.0, 3.0, 13)
    vals = [cube_ball_minkowski_volume(d, float(r)) for r in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# dilated_union_volume
# ---------------------------------------------------------------------------


def test_dilated_union_two_adjacent_intervals():
    assert dilated_union_volume([(0,), (1,)], 1.0, 1) == pytest.approx(4.0, abs=1e-9)


def test_dilated_union_single_cube_matches_steiner():
    for r in (0.0, 0.3, 1.0, 2.5):
        assert dilated_union_volume([(0, 0)], r, 2) == pytest.approx(
            cube_ball_minkowski_volume(2, r), abs=1e-7
        )


def test_dilated_union_random_animal_vs_mc():
    rng = np.random.default_rng(5)
    cubes = {(0, 0)}
    while len(cubes) < 7:
        s = list(cubes)[rng.integers(len(cubes))]
        dx, dy = [(1, 0), (-1, 0), (0, 1), (0, -1)][rng.integers(4)]
        cubes.add((s[0] + dx, s[1] + dy))
    cubes = sorted(cubes)
    r = 0.8
    got = dilated_union_volume(cubes, r, 2)

    lo = np.array([min(c[0] for c in cubes) - r, min(c[1] for c in cubes) - r])
    hi = np.array([max(c[0] for c in cubes) + 1 + r, max(c[1] for c in cubes) + 1 + r])
    n = 1_000_000
    pts = rng.uniform(lo, hi, size=(n, 2))
    inside = np.zeros(n, dtype=bool)
    for c in cubes:
        gap = np.maximum(np.abs(pts - (np.asarray(c) + 0.5)) - 0.5, 0.0)
        inside |= (gap**2).sum(axis=1) <= r * r
    p = float(inside.mean())
    box = float(np.prod(hi - lo))
    se = box * math.sqrt(p * (1 - p) / n)
    assert abs(got - p * box) <= 3 * se


# ---------------------------------------------------------------------------
# hypercube_intersects_cone
# ---------------------------------------------------------------------------


def test_cone_contains_own_base():
    base = ConeBase(1, frozenset({(0,)}))
    assert hypercube_intersects_cone(HypercubeIndex((0,), 0), base)


def test_cone_excludes_far_hypercube():
    # Oracle: dense sampling of the box gives min distance 4 > height+1 = 3.
    assert grid_box_distance_to_cubes((5,), [(0,)], 0.01) == pytest.approx(4.0, abs=0.02)
    base = ConeBase(1, frozenset({(0,)}))
    assert not hypercube_intersects_cone(HypercubeIndex((5,), 2), base)


def test_cone_includes_reachable_hypercube():
    assert grid_box_distance_to_cubes((3,), [(0,)], 0.01) == pytest.approx(2.0, abs=0.02)
    base = ConeBase(1, frozenset({(0,)}))
    assert hypercube_intersects_cone(HypercubeIndex((3,), 2), base)


@pytest.mark.parametrize("seed", range(6))
def test_cone_membership_matches_sampled_distance(seed):
    rng = np.random.default_rng(100 + seed)
    d = int(rng.integers(1, 3))
    base_cubes = [tuple(int(v) for v in rng.integers(-3, 4, size=d)) for _ in range(3)]
    base = ConeBase(d, frozenset(base_cubes))
    spatial = tuple(int(v) for v in rng.integers(-8, 9, size=d))
    height = int(rng.integers(0, 5))
    sampled = grid_box_distance_to_cubes(spatial, base_cubes, 0.05)
    got = hypercube_intersects_cone(HypercubeIndex(spatial, height), base)
    if sampled <= height + 1 - 0.1:
        assert got
    elif sampled > height + 1 + 0.1:
        assert not got
    # near-boundary cases are decided by the exact integer arithmetic


def test_cone_membership_monotone_in_base_and_height():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(1, 3))
        cubes = [tuple(int(v) for v in rng.integers(-3, 4, size=d)) for _ in range(2)]
        extra = tuple(int(v) for v in rng.integers(-3, 4, size=d))
        spatial = tuple(int(v) for v in rng.integers(-7, 8, size=d))
        h = int(rng.integers(0, 4))
        small = ConeBase(d, frozenset(cubes))
        large = ConeBase(d, frozenset(cubes + [extra]))
        hc = HypercubeIndex(spatial, h)
        if hypercube_intersects_cone(hc, small):
            assert hypercube_intersects_cone(hc, large)
            assert hypercube_intersects_cone(HypercubeIndex(spatial, h + 1), small)


# ---------------------------------------------------------------------------
# supnorm and enumeration
# ---------------------------------------------------------------------------


def test_supnorm_examples():
    assert supnorm(HypercubeIndex((-3, 1), 2)) == 3
    assert supnorm(HypercubeIndex((0, 0), 0)) == 0
    assert supnorm(HypercubeIndex((2,), 7)) == 7


@pytest.mark.parametrize("d,n", [(1, 3), (2, 2), (3, 1)])
def test_enumerate_hypercubes_count(d, n):
    got = enumerate_hypercubes(d, n)
    assert len(got) == (2 * n + 1) ** d * (n + 1)
    assert len(set(got)) == len(got)
    assert all(supnorm(hc) <= n for hc in got)
