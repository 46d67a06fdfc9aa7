"""Direct cluster exploration of sampled ball configurations.

Given a window sample, the connected component of the origin in the union of
closed balls is grown breadth-first.  Neighbor candidates come from a spatial
hash grid over ball bounding boxes, and every candidate is verified with the
exact closed-ball intersection test, so the resulting component is exactly
the graph component and independent of traversal order.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .field import WindowSample
from .geometry import Ball, CubeIndex, cubes_intersecting_ball, unit_ball_volume


# -- stop rules --------------------------------------------------------------


@dataclass(frozen=True)
class StopNone:
    pass


@dataclass(frozen=True)
class StopArm:
    """Stop once the cluster certifiably reaches the sphere of radius R."""

    R: float


@dataclass(frozen=True)
class StopVolume:
    """Stop once the cluster volume is certified >= y (lower confidence bound)."""

    y: float


@dataclass(frozen=True)
class StopBallCap:
    """Stop after the cluster holds m balls; flags truncation."""

    m: int


StopRule = StopNone | StopArm | StopVolume | StopBallCap


@dataclass
class Cluster:
    """The explored component of the origin.

    ``reached_radius`` is the largest window-sphere radius the component is
    known to touch (None when not probed); ``truncated`` marks exploration
    stopped by a ball cap rather than exhaustion.
    """

    dimension: int
    centers: np.ndarray
    radii: np.ndarray
    contains_origin: bool
    reached_radius: float | None = None
    truncated: bool = False
    member_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def ball_count(self) -> int:
        return int(self.radii.shape[0])

    @cached_property
    def cube_set(self) -> set[CubeIndex]:
        """Lattice cubes intersected by the cluster region."""
        out: set[CubeIndex] = set()
        for c, r in zip(self.centers, self.radii):
            out |= cubes_intersecting_ball(Ball(tuple(c), float(r)))
        return out

    def balls(self) -> list[Ball]:
        return [Ball(tuple(c), float(r)) for c, r in zip(self.centers, self.radii)]

    def max_reach(self) -> float:
        """sup over cluster balls of |center| + radius (0 for empty)."""
        if self.ball_count == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.centers, axis=1) + self.radii))


class BallGrid:
    """Spatial hash grid over ball bounding boxes for neighbor candidates."""

    def __init__(self, dimension: int, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell size must be positive")
        self.dimension = dimension
        self.cell = float(cell_size)
        self._table: dict[tuple[int, ...], list[int]] = {}
        self.centers: list[np.ndarray] = []
        self.radii: list[float] = []

    def _cells_of(self, center: np.ndarray, radius: float):
        lo = np.floor((center - radius) / self.cell).astype(int)
        hi = np.floor((center + radius) / self.cell).astype(int)
        ranges = [range(l, h + 1) for l, h in zip(lo, hi)]
        idx = [0] * self.dimension

        def rec(k: int):
            if k == self.dimension:
                yield tuple(idx)
                return
            for v in ranges[k]:
                idx[k] = v
                yield from rec(k + 1)

        yield from rec(0)

    def add(self, center: np.ndarray, radius: float) -> int:
        i = len(self.radii)
        self.centers.append(np.asarray(center, dtype=float))
        self.radii.append(float(radius))
        for cell in self._cells_of(self.centers[i], radius):
            self._table.setdefault(cell, []).append(i)
        return i

    def candidates(self, center: np.ndarray, radius: float) -> list[int]:
        seen: set[int] = set()
        for cell in self._cells_of(np.asarray(center, dtype=float), radius):
            seen.update(self._table.get(cell, ()))
        return sorted(seen)

    def candidates_point(self, point: np.ndarray) -> list[int]:
        cell = tuple(np.floor(np.asarray(point, dtype=float) / self.cell).astype(int))
        return self._table.get(cell, [])


def grid_cell_size(radii: np.ndarray, fallback: float = 1.0) -> float:
    """Grid pitch heuristic: max(1, twice the median radius)."""
    if radii.size == 0:
        return fallback
    return max(1.0, 2.0 * float(np.median(radii)))


def build_grid(centers: np.ndarray, radii: np.ndarray, dimension: int, cell_size: float | None = None) -> BallGrid:
    grid = BallGrid(dimension, cell_size or grid_cell_size(radii))
    for c, r in zip(centers, radii):
        grid.add(c, float(r))
    return grid


def explore_cluster(
    window: WindowSample,
    stop: StopRule = StopNone(),
    *,
    ball_cap: int | None = None,
    vol_rng: np.random.Generator | None = None,
    vol_n: int = 16384,
) -> Cluster:
    """Grow the origin's component of the window's ball union breadth-first.

    ``stop`` can end exploration early: StopArm(R) on certified one-arm
    contact with the sphere of radius R, StopVolume(y) on a 3-sigma-certified
    volume lower bound (exact in d=1), StopBallCap(m) on a size cap.  An
    independent ``ball_cap`` may cap any of the stop modes; a cap hit flags
    the cluster as truncated.
    """
    d = window.dimension
    centers = window.centers
    radii = window.radii
    n = window.count
    cap = ball_cap
    if isinstance(stop, StopBallCap):
        cap = stop.m if cap is None else min(cap, stop.m)

    if n == 0:
        return Cluster(d, np.empty((0, d)), np.empty(0), contains_origin=False)

    norms = np.linalg.norm(centers, axis=1)
    seeds = np.nonzero(norms <= radii)[0]
    if seeds.size == 0:
        return Cluster(d, np.empty((0, d)), np.empty(0), contains_origin=False)

    grid = build_grid(centers, radii, d)
    in_cluster = np.zeros(n, dtype=bool)
    queue: deque[int] = deque()
    members: list[int] = []
    for i in seeds:
        in_cluster[i] = True
        queue.append(int(i))
        members.append(int(i))

    reached: float | None = None
    truncated = False

    def arm_hit(i: int) -> bool:
        return isinstance(stop, StopArm) and norms[i] + radii[i] >= stop.R

    done = any(arm_hit(i) for i in members)
    if done:
        reached = stop.R  # type: ignore[union-attr]

    def volume_certified() -> bool:
        assert isinstance(stop, StopVolume)
        idx = np.asarray(members, dtype=np.int64)
        quick_upper = float(np.sum(unit_ball_volume(d) * radii[idx] ** d))
        if quick_upper < stop.y:
            return False
        est = union_volume(centers[idx], radii[idx], d, rng=vol_rng, n=vol_n)
        return est.value - 3.0 * est.standard_error >= stop.y

    next_vol_check = 1
    while queue and not done:
        if cap is not None and len(members) >= cap:
            truncated = True
            break
        i = queue.popleft()
        for j in grid.candidates(centers[i], radii[i]):
            if in_cluster[j]:
                continue
            gap = centers[i] - centers[j]
            if float(gap @ gap) <= (radii[i] + radii[j]) ** 2:
                in_cluster[j] = True
                queue.append(j)
                members.append(j)
                if arm_hit(j):
                    reached = stop.R  # type: ignore[union-attr]
                    done = True
                    break
        if done:
            break
        if isinstance(stop, StopVolume) and len(members) >= next_vol_check:
            next_vol_check = max(next_vol_check * 2, len(members) + 1)
            if volume_certified():
                done = True

    if isinstance(stop, StopVolume) and not done and not truncated:
        done = volume_certified()

    idx = np.asarray(sorted(members), dtype=np.int64)
    cluster = Cluster(
        d,
        centers[idx],
        radii[idx],
        contains_origin=True,
        reached_radius=reached,
        truncated=truncated,
        member_indices=idx,
    )
    return cluster


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    standard_error: float
    method: str


def points_in_union(points: np.ndarray, centers: np.ndarray, radii: np.ndarray, grid: BallGrid | None = None) -> np.ndarray:
    """Boolean mask of points covered by the union of closed balls."""
    m = points.shape[0]
    out = np.zeros(m, dtype=bool)
    if centers.shape[0] == 0 or m == 0:
        return out
    if grid is None and centers.shape[0] >= 32:
        grid = build_grid(centers, radii, centers.shape[1])
    if grid is None:
        for c, r in zip(centers, radii):
            miss = ~out
            gap = points[miss] - c[None, :]
            out[miss] = np.einsum("ij,ij->i", gap, gap) <= r * r
        return out
    # group the points by grid cell and test each group against its
    # candidate balls in one vectorized block
    cells = np.floor(points / grid.cell).astype(np.int64)
    order = np.lexsort(cells.T)
    sorted_cells = cells[order]
    changed = np.any(np.diff(sorted_cells, axis=0) != 0, axis=1)
    starts = np.concatenate([[0], np.flatnonzero(changed) + 1])
    ends = np.concatenate([starts[1:], [m]])
    call = np.asarray(centers, dtype=float)
    rall = np.asarray(radii, dtype=float)
    for s, e in zip(starts, ends):
        cand = grid._table.get(tuple(int(v) for v in sorted_cells[s]))
        if not cand:
            continue
        idx = order[s:e]
        gap = points[idx][:, None, :] - call[cand][None, :, :]
        d2 = np.einsum("ijk,ijk->ij", gap, gap)
        out[idx] = (d2 <= (rall[cand] ** 2)[None, :]).any(axis=1)
    return out


def union_volume(
    centers: np.ndarray,
    radii: np.ndarray,
    dimension: int,
    method: str = "auto",
    *,
    n: int = 65536,
    rng: np.random.Generator | None = None,
) -> VolumeEstimate:
    """Volume of a union of closed balls.

    method "exact_1d" merges intervals (d=1 only); "monte_carlo" is
    hit-or-miss Monte Carlo over the bounding box with a binomial standard
    error; "auto" picks exact_1d in d=1 and monte_carlo otherwise.
    """
    if centers.shape[0] == 0:
        return VolumeEstimate(0.0, 0.0, "empty")
    if method == "auto":
        method = "exact_1d" if dimension == 1 else "monte_carlo"
    if method == "exact_1d":
        if dimension != 1:
            raise ValueError("exact union volume is only available in d=1")
        lefts = centers[:, 0] - radii
        rights = centers[:, 0] + radii
        order = np.argsort(lefts, kind="stable")
        total = 0.0
        cur = -math.inf
        for l, r in zip(lefts[order], rights[order]):
            if r <= cur:
                continue
            total += r - max(l, cur)
            cur = r
        return VolumeEstimate(float(total), 0.0, "exact_1d")
    if method != "monte_carlo":
        raise ValueError(f"unknown union volume method {method!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    lo = np.min(centers - radii[:, None], axis=0)
    hi = np.max(centers + radii[:, None], axis=0)
    box = float(np.prod(hi - lo))
    pts = lo[None, :] + rng.random((n, dimension)) * (hi - lo)[None, :]
    hits = points_in_union(pts, centers, radii)
    p = float(np.mean(hits))
    se = box * math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return VolumeEstimate(box * p, se, f"monte_carlo({n})")


def good_cube_event(window: WindowSample, cube: CubeIndex, eps: float) -> bool:
    """Whether no window ball of radius <= eps intersects the cube (closed
    comparisons on both the radius and the contact)."""
    if len(cube) != window.dimension:
        raise ValueError("cube index dimension mismatch")
    small = window.radii <= eps
    if not np.any(small):
        return True
    c = window.centers[small]
    r = window.radii[small]
    lo = np.asarray(cube, dtype=float)
    gaps = np.maximum(np.maximum(lo[None, :] - c, c - (lo + 1.0)[None, :]), 0.0)
    d2 = np.einsum("ij,ij->i", gaps, gaps)
    return not bool(np.any(d2 <= r * r))


@dataclass(frozen=True)
class VolumeComparisonReport:
    """Extremes of cluster volume / cube count over a batch of clusters."""

    min_ratio: float
    max_ratio: float
    count: int


def volume_comparison_diagnostic(pairs: list[tuple[Cluster, float]]) -> VolumeComparisonReport:
    """Ratios Vol(C)/|S_C| over (cluster, volume) pairs with nonempty clusters."""
    ratios = [vol / len(cl.cube_set) for cl, vol in pairs if cl.ball_count > 0]
    if not ratios:
        return VolumeComparisonReport(math.nan, math.nan, 0)
    return VolumeComparisonReport(min(ratios), max(ratios), len(ratios))
