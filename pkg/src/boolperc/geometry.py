"""Euclidean/lattice geometry for the Boolean-model laboratory.

Conventions used throughout the package:

* balls are closed: tangent balls intersect;
* the lattice cube with index i is ``i + [0,1]^d``; a point on a shared
  face belongs to the cube of its floored coordinates;
* a "hypercube" is a spatial cube crossed with a unit radius band,
  ``spatial + [0,1]^d x [height, height+1]``;
* the cone above a base region D is ``{(x, y) : dist(x, D) <= y}``, the set
  of (center, radius) pairs whose ball reaches D;
* all lattice-vs-lattice distance comparisons are done in exact squared
  integer arithmetic, so cone membership tests never suffer float rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

CubeIndex = tuple[int, ...]


@dataclass(frozen=True)
class Ball:
    """A closed Euclidean ball given by center coordinates and radius."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        if len(self.center) < 1:
            raise ValueError("ball center needs at least one coordinate")
        if not (self.radius >= 0.0):
            raise ValueError(f"ball radius must be >= 0, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)


class HypercubeIndex(NamedTuple):
    """Index of a spatial-cube x radius-band cell of the point process space."""

    spatial: tuple[int, ...]
    height: int


@dataclass(frozen=True)
class ConeBase:
    """Base region for a cone: a finite set of unit cubes, optionally with the
    origin point adjoined (the degenerate base used to bootstrap exploration)."""

    dim: int
    cubes: frozenset[CubeIndex] = field(default_factory=frozenset)
    include_origin: bool = False

    def __post_init__(self) -> None:
        if not self.cubes and not self.include_origin:
            raise ValueError("cone base must contain at least one cube or the origin")
        for c in self.cubes:
            if len(c) != self.dim:
                raise ValueError(f"cube index {c} does not match dim={self.dim}")


def unit_ball_volume(j: int) -> float:
    """Volume of the unit j-ball, pi^(j/2) / Gamma(j/2 + 1)."""
    if j < 0:
        raise ValueError("dimension must be >= 0")
    return math.pi ** (j / 2.0) / math.gamma(j / 2.0 + 1.0)


def balls_intersect(a: Ball, b: Ball) -> bool:
    """Whether two closed balls intersect (tangency counts)."""
    if a.dim != b.dim:
        raise ValueError("balls live in different dimensions")
    d2 = sum((x - y) ** 2 for x, y in zip(a.center, b.center))
    rs = a.radius + b.radius
    return d2 <= rs * rs


def cube_gap_sq_point(spatial: Sequence[int], point: Sequence[float]) -> float:
    """Squared distance from the cube ``spatial + [0,1]^d`` to a point."""
    g2 = 0.0
    for s, p in zip(spatial, point):
        g = max(0.0, s - p, p - (s + 1))
        g2 += g * g
    return g2


def cubes_intersecting_ball(ball: Ball) -> set[CubeIndex]:
    """All lattice cubes the closed ball intersects (touching counts)."""
    d = ball.dim
    lo = [math.floor(c - ball.radius) for c in ball.center]
    hi = [math.floor(c + ball.radius) for c in ball.center]
    out: set[CubeIndex] = set()
    r2 = ball.radius * ball.radius

    def rec(k: int, prefix: list[int]) -> None:
        if k == d:
            idx = tuple(prefix)
            if cube_gap_sq_point(idx, ball.center) <= r2:
                out.add(idx)
            return
        for v in range(lo[k], hi[k] + 1):
            prefix.append(v)
            rec(k + 1, prefix)
            prefix.pop()

    rec(0, [])
    return out


def cube_ball_minkowski_volume(d: int, r: float) -> float:
    """Volume of ``[0,1]^d`` dilated by a ball of radius r (Steiner formula):
    sum_j C(d,j) * kappa_j * r^j with kappa_j the unit j-ball volume."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if r < 0:
        raise ValueError("radius must be >= 0")
    return sum(math.comb(d, j) * unit_ball_volume(j) * r**j for j in range(d + 1))


def cube_gap_sq(a: CubeIndex, b: CubeIndex) -> int:
    """Exact squared distance between the cubes at indices a and b."""
    g2 = 0
    for x, y in zip(a, b):
        g = abs(x - y) - 1
        if g > 0:
            g2 += g * g
    return g2


def origin_gap_sq(spatial: CubeIndex) -> int:
    """Exact squared distance from the cube at ``spatial`` to the origin point."""
    g2 = 0
    for s in spatial:
        g = max(0, s, -s - 1)
        g2 += g * g
    return g2


def cone_gap_sq(spatial: CubeIndex, base: ConeBase) -> int:
    """Exact squared distance from the cube at ``spatial`` to the base region."""
    best: int | None = None
    if base.include_origin:
        best = origin_gap_sq(spatial)
        if best == 0:
            return 0
    for c in base.cubes:
        g2 = cube_gap_sq(spatial, c)
        if best is None or g2 < best:
            best = g2
            if best == 0:
                return 0
    assert best is not None
    return best


def hypercube_intersects_cone(hc: HypercubeIndex, base: ConeBase) -> bool:
    """Whether the hypercube meets the cone above the base.

    The hypercube ``spatial + [0,1]^d x [h, h+1]`` meets
    ``{(x, y) : dist(x, base) <= y}`` iff the spatial box comes within
    distance h+1 of the base; compared in exact integer arithmetic.
    """
    if len(hc.spatial) != base.dim:
        raise ValueError("hypercube and cone base dimensions differ")
    if hc.height < 0:
        raise ValueError("hypercube height must be >= 0")
    m = hc.height + 1
    return cone_gap_sq(hc.spatial, base) <= m * m


def supnorm(hc: HypercubeIndex) -> int:
    """Sup-norm of a hypercube index: max(|spatial|_inf, height)."""
    s = max((abs(v) for v in hc.spatial), default=0)
    return max(s, hc.height)


def min_height_in_cone(gap_sq: int) -> int:
    """Smallest height h >= 0 with (h+1)^2 >= gap_sq (lowest cone member of a column)."""
    if gap_sq <= 1:
        return 0
    m = math.isqrt(gap_sq - 1) + 1  # smallest integer with m^2 >= gap_sq
    return m - 1


def enumerate_hypercubes(d: int, max_supnorm: int) -> list[HypercubeIndex]:
    """All hypercubes with sup-norm <= max_supnorm, in the canonical reveal
    order (sup-norm, then height, then lexicographic spatial)."""
    out: list[HypercubeIndex] = []
    rng = range(-max_supnorm, max_supnorm + 1)

    def spatials(k: int, prefix: list[int]) -> Iterable[tuple[int, ...]]:
        if k == d:
            yield tuple(prefix)
            return
        for v in rng:
            prefix.append(v)
            yield from spatials(k + 1, prefix)
            prefix.pop()

    for sp in spatials(0, []):
        for h in range(0, max_supnorm + 1):
            out.append(HypercubeIndex(sp, h))
    out.sort(key=lambda hc: (supnorm(hc), hc.height, hc.spatial))
    return out


# ---------------------------------------------------------------------------
# Dilated-union volumes.


def _union_length(lefts: np.ndarray, rights: np.ndarray) -> float:
    """Total length of a union of 1-d intervals."""
    if lefts.size == 0:
        return 0.0
    order = np.argsort(lefts, kind="stable")
    lefts = lefts[order]
    rights = rights[order]
    total = 0.0
    cur_end = -math.inf
    for l, r in zip(lefts, rights):
        if r <= cur_end:
            continue
        total += r - max(l, cur_end)
        cur_end = r
    return total


def _slice_lengths(j1: np.ndarray, j2: np.ndarray, r: float, x2: np.ndarray) -> np.ndarray:
    """For a union of unit squares at integer offsets (j1, j2) dilated by r,
    the length of the horizontal slice at each ordinate in x2 (vectorized)."""
    g = np.maximum(np.maximum(j2[None, :] - x2[:, None], x2[:, None] - (j2[None, :] + 1.0)), 0.0)
    w2 = r * r - g * g
    active = w2 >= 0.0
    w = np.sqrt(np.maximum(w2, 0.0))
    lefts = np.where(active, j1[None, :] - w, np.inf)
    rights = np.where(active, j1[None, :] + 1.0 + w, -np.inf)
    order = np.argsort(lefts, axis=1, kind="stable")
    lefts = np.take_along_axis(lefts, order, axis=1)
    rights = np.take_along_axis(rights, order, axis=1)
    total = np.zeros(x2.shape[0])
    cur = np.full(x2.shape[0], -np.inf)
    for k in range(lefts.shape[1]):
        l = lefts[:, k]
        rr = rights[:, k]
        gain = rr - np.maximum(l, cur)
        np.clip(gain, 0.0, None, out=gain)
        gain[~np.isfinite(gain)] = 0.0
        total += gain
        cur = np.maximum(cur, rr)
    return total


def adaptive_simpson_batched(f, breakpoints: Sequence[float], tol: float, max_rounds: int = 40) -> float:
    """Adaptive composite Simpson for a batched integrand f(x_array)->values.

    Panels start between consecutive breakpoints and are bisected until the
    per-panel Richardson error estimate sums below tol.
    """
    pts = np.asarray(sorted(set(float(b) for b in breakpoints)))
    if pts.size < 2:
        return 0.0
    a = pts[:-1].copy()
    b = pts[1:].copy()
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0
    fa = f(a)
    fb = f(b)
    fm = f(0.5 * (a + b))
    total = 0.0
    for _ in range(max_rounds):
        h = b - a
        s1 = h / 6.0 * (fa + 4.0 * fm + fb)
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        s_left = h / 12.0 * (fa + 4.0 * flm + fm)
        s_right = h / 12.0 * (fm + 4.0 * frm + fb)
        s2 = s_left + s_right
        err = np.abs(s2 - s1) / 15.0
        span = (b[-1] - a[0]) if a.size and b[-1] > a[0] else 1.0
        budget = tol * np.maximum(h / span, 1e-300)
        done = err <= np.maximum(budget, tol / max(a.size, 1) * 0.5)
        total += float(np.sum((s2 + (s2 - s1) / 15.0)[done]))
        if np.all(done):
            return total
        nd = ~done
        # split the unfinished panels in two
        a = np.concatenate([a[nd], m[nd]])
        b = np.concatenate([m[nd], b[nd]])
        fa = np.concatenate([fa[nd], fm[nd]])
        fb = np.concatenate([fm[nd], fb[nd]])
        fm = np.concatenate([flm[nd], frm[nd]])
    # ran out of rounds: add best estimates for the remaining panels
    h = b - a
    total += float(np.sum(h / 6.0 * (fa + 4.0 * fm + fb)))
    return total


def dilated_union_volume(cubes: Iterable[CubeIndex], r: float, d: int, tol: float = 1e-9) -> float:
    """Volume of the union of unit lattice cubes dilated by a ball of radius r.

    Exact interval merging in d=1; in d=2 the area is integrated over
    horizontal slices (each slice is an exact union of intervals) with
    adaptive quadrature to absolute tolerance ``tol``.
    """
    cube_list = sorted(set(tuple(int(v) for v in c) for c in cubes))
    if not cube_list:
        return 0.0
    if any(len(c) != d for c in cube_list):
        raise ValueError("cube index dimension mismatch")
    if r < 0:
        raise ValueError("radius must be >= 0")
    if d == 1:
        lefts = np.array([c[0] - r for c in cube_list])
        rights = np.array([c[0] + 1.0 + r for c in cube_list])
        return _union_length(lefts, rights)
    if d == 2:
        j1 = np.array([c[0] for c in cube_list], dtype=float)
        j2 = np.array([c[1] for c in cube_list], dtype=float)
        breaks: set[float] = set()
        for v in sorted(set(j2)):
            breaks.update((v - r, v, v + 0.5, v + 1.0, v + 1.0 + r))
        f = lambda x2: _slice_lengths(j1, j2, r, x2)
        return adaptive_simpson_batched(f, sorted(breaks), tol)
    raise ValueError("dilated_union_volume supports d in {1, 2}")
