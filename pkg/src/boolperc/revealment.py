"""Cone-guided adaptive revealment of the lazy Poisson ball field.

The algorithm decides an increasing local event of the origin's cluster while
revealing as little of the field as possible.  It maintains the cone above
the revealed cluster's cube footprint (with the origin point always kept in
the base so the search can bootstrap), and repeatedly reveals the unrevealed
hypercube of smallest sup-norm intersecting that cone, ties broken by
(height, lexicographic spatial).  Every ball that could ever join the
cluster lives in that cone, so the procedure certifies the event as soon as
it holds on the revealed portion.

Termination:

* ``occurred`` - the event was certified on the revealed balls;
* ``truncated`` with reason ``max_steps`` - the step budget ran out;
* ``truncated`` with reason ``cluster_complete`` - for bounded radius laws,
  every positive-mass hypercube that could contain a ball touching the
  current cluster (or covering the origin) has been revealed, so the cluster
  is final and the event is decided false.

The revealed product-measure volume (sum of band masses over revealed
hypercubes) is tracked exactly; zero-mass hypercubes are revealed trivially
empty without consuming randomness and contribute zero.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field as dc_field

import numpy as np

from .explorer import BallGrid
from .field import (
    FieldConfig,
    GhostField,
    RevealedHypercube,
    band_mass,
    reveal,
    substream,
)
from .geometry import (
    Ball,
    ConeBase,
    HypercubeIndex,
    cube_gap_sq,
    cubes_intersecting_ball,
    hypercube_intersects_cone,
    min_height_in_cone,
    origin_gap_sq,
    supnorm,
    unit_ball_volume,
)


# -- events -------------------------------------------------------------------


@dataclass(frozen=True)
class OneArm:
    """The origin's cluster touches the sphere of radius R."""

    R: float


@dataclass(frozen=True)
class VolumeAtLeast:
    """The origin's cluster has volume >= y (MC-certified above d=1)."""

    y: float


@dataclass(frozen=True)
class GhostConnection:
    """The origin's cluster covers a point of a pre-revealed ghost process."""

    ghost: GhostField


EventSpec = OneArm | VolumeAtLeast | GhostConnection


def cluster_of_balls(centers: np.ndarray, radii: np.ndarray, dimension: int) -> np.ndarray:
    """Indices of the origin's component among the given closed balls."""
    n = centers.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    norms = np.linalg.norm(centers, axis=1)
    seeds = np.nonzero(norms <= radii)[0]
    if seeds.size == 0:
        return np.empty(0, dtype=np.int64)
    grid = BallGrid(dimension, max(1.0, 2.0 * float(np.median(radii))))
    for c, r in zip(centers, radii):
        grid.add(c, float(r))
    in_cluster = np.zeros(n, dtype=bool)
    in_cluster[seeds] = True
    queue = deque(int(i) for i in seeds)
    while queue:
        i = queue.popleft()
        for j in grid.candidates(centers[i], radii[i]):
            if in_cluster[j]:
                continue
            gap = centers[i] - centers[j]
            if float(gap @ gap) <= (radii[i] + radii[j]) ** 2:
                in_cluster[j] = True
                queue.append(j)
    return np.nonzero(in_cluster)[0].astype(np.int64)


def event_holds(
    centers: np.ndarray,
    radii: np.ndarray,
    dimension: int,
    event: EventSpec,
    *,
    rng: np.random.Generator | None = None,
    vol_n: int = 65536,
) -> bool:
    """Whether the event holds for the origin's cluster of the given balls.

    Volume events use the exact interval union in d=1 and a 3-sigma Monte
    Carlo lower confidence bound otherwise (a certification, not a truth
    oracle, at the boundary).
    """
    idx = cluster_of_balls(centers, radii, dimension)
    if idx.size == 0:
        return False
    c = centers[idx]
    r = radii[idx]
    if isinstance(event, OneArm):
        return bool(np.max(np.linalg.norm(c, axis=1) + r) >= event.R)
    if isinstance(event, VolumeAtLeast):
        from .explorer import union_volume

        if dimension == 1:
            est = union_volume(c, r, 1, method="exact_1d")
            return est.value >= event.y
        if rng is None:
            rng = substream(0, "event-holds")
        est = union_volume(c, r, dimension, method="monte_carlo", n=vol_n, rng=rng)
        return est.value - 3.0 * est.standard_error >= event.y
    if isinstance(event, GhostConnection):
        pts = event.ghost.points
        if pts.shape[0] == 0:
            return False
        from .explorer import points_in_union

        return bool(np.any(points_in_union(pts, c, r)))
    raise TypeError(f"unknown event {event!r}")


# -- trace --------------------------------------------------------------------


@dataclass
class RevealmentTrace:
    """Outcome of one cone-guided revealment run."""

    dimension: int
    max_steps: int
    revealed: list[HypercubeIndex]
    steps: int
    pvol_revealed: float
    verdict: str  # "occurred" | "truncated"
    reason: str   # "event_certified" | "max_steps" | "cluster_complete"
    centers: np.ndarray
    radii: np.ndarray
    cluster_indices: np.ndarray
    step_records: list[dict] | None = None

    @property
    def occurred(self) -> bool:
        return self.verdict == "occurred"


@dataclass(frozen=True)
class DeterminationCheck:
    consistent: bool
    censored: bool


def local_determination_check(trace: RevealmentTrace, oracle_verdict: bool) -> DeterminationCheck:
    """Consistency of a trace against a direct-exploration verdict: an
    ``occurred`` trace must have a true oracle; a truncated trace with a true
    oracle is consistent but censored (the budget, not the field, decided)."""
    if trace.occurred:
        return DeterminationCheck(consistent=bool(oracle_verdict), censored=False)
    return DeterminationCheck(consistent=True, censored=bool(oracle_verdict))


# -- the algorithm ------------------------------------------------------------


class _ActiveSet:
    """Lazy sup-norm-ordered queue over the hypercubes intersecting the cone
    above a growing base (cubes plus the origin point).

    Columns (spatial indices) are materialized in sup-norm shells on demand;
    each column keeps its next un-popped height, starting at the lowest
    height whose hypercube meets the cone and decreasing as the base grows.
    """

    def __init__(self, dimension: int):
        self.d = dimension
        self.heap: list[tuple[int, int, tuple[int, ...]]] = []
        self.cols: dict[tuple[int, ...], list[int]] = {}  # spatial -> [gap_sq, next_height]
        self.base_cubes: list[tuple[int, ...]] = []
        self.horizon = -1

    def _push(self, spatial: tuple[int, ...], h: int) -> None:
        key = max(max((abs(v) for v in spatial), default=0), h)
        heapq.heappush(self.heap, (key, h, spatial))

    def _shell(self, m: int):
        if self.d == 1:
            return [(-m,), (m,)] if m > 0 else [(0,)]
        out = []
        rng = range(-m, m + 1)

        def rec(k: int, prefix: list[int], on_boundary: bool):
            if k == self.d:
                if on_boundary:
                    out.append(tuple(prefix))
                return
            for v in rng:
                prefix.append(v)
                rec(k + 1, prefix, on_boundary or abs(v) == m)
                prefix.pop()

        rec(0, [], False)
        return out

    def _gap_sq(self, spatial: tuple[int, ...]) -> int:
        g = origin_gap_sq(spatial)
        for c in self.base_cubes:
            if g == 0:
                break
            g = min(g, cube_gap_sq(spatial, c))
        return g

    def _materialize(self, m: int) -> None:
        for s in self._shell(m):
            g = self._gap_sq(s)
            h0 = min_height_in_cone(g)
            self.cols[s] = [g, h0]
            self._push(s, h0)
        self.horizon = m

    def add_base_cubes(self, new_cubes) -> None:
        """Grow the cone base; re-activate columns whose lowest cone height drops."""
        fresh = [c for c in new_cubes if c not in set(self.base_cubes)]
        if not fresh:
            return
        self.base_cubes.extend(fresh)
        for s, state in self.cols.items():
            g = state[0]
            if g == 0:
                continue
            for c in fresh:
                g2 = cube_gap_sq(s, c)
                if g2 < g:
                    g = g2
                    if g == 0:
                        break
            if g < state[0]:
                state[0] = g
                h0 = min_height_in_cone(g)
                if h0 < state[1]:
                    state[1] = h0
                    self._push(s, h0)

    def pop(self, revealed: set[HypercubeIndex]) -> HypercubeIndex:
        """Next active hypercube in (sup-norm, height, spatial) order."""
        while True:
            while self.heap:
                key, h, s = self.heap[0]
                if self.cols[s][1] == h:
                    break
                heapq.heappop(self.heap)  # stale
            top_key = self.heap[0][0] if self.heap else self.horizon + 1
            if self.horizon < top_key:
                self._materialize(self.horizon + 1)
                continue
            key, h, s = heapq.heappop(self.heap)
            self.cols[s][1] = h + 1
            self._push(s, h + 1)
            idx = HypercubeIndex(s, h)
            if idx in revealed:
                continue
            return idx


def _ball_reach_candidates(
    center: np.ndarray,
    radius: float,
    positive_heights: list[tuple[int, float]],
    d: int,
) -> list[HypercubeIndex]:
    """Positive-mass hypercubes that could contain a ball touching the given
    ball: spatial box within radius + band-supremum of the center."""
    out: list[HypercubeIndex] = []
    for h, band_sup in positive_heights:
        reach = radius + band_sup
        lo = np.floor(center - reach).astype(int)
        hi = np.floor(center + reach).astype(int)
        idx = [0] * d

        def rec(k: int):
            if k == d:
                g2 = 0.0
                for j in range(d):
                    g = max(0.0, idx[j] - center[j], center[j] - (idx[j] + 1))
                    g2 += g * g
                if g2 <= reach * reach:
                    out.append(HypercubeIndex(tuple(idx), h))
                return
            for v in range(lo[k], hi[k] + 1):
                idx[k] = v
                rec(k + 1)

        rec(0)
    return out


def run_template(
    cfg: FieldConfig,
    event: EventSpec,
    max_steps: int,
    *,
    thin_lam: float | None = None,
    record_steps: bool = False,
    check_invariants: bool = False,
    vol_n: int = 4096,
) -> RevealmentTrace:
    """Run the cone-guided revealment until the event certifies, the cluster
    completes (bounded radius laws), or the step budget runs out.

    Deterministic given (cfg, event, max_steps): hypercube reveals use the
    field's per-cell substreams and volume certification uses a dedicated
    substream keyed by the step counter.  ``thin_lam`` runs the algorithm on
    the monotone thinning of cfg's field down to that intensity (same base
    field, coupled across thinning levels via the per-point coins).
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    keep_frac = None
    if thin_lam is not None:
        if not 0.0 < thin_lam <= cfg.lam:
            raise ValueError("thin_lam must lie in (0, cfg.lam]")
        keep_frac = thin_lam / cfg.lam
    d = cfg.dimension
    mu = cfg.mu
    ess_sup = mu.ess_sup()
    completion_enabled = math.isfinite(ess_sup)
    positive_heights: list[tuple[int, float]] = []
    if completion_enabled:
        for h in range(0, int(math.ceil(ess_sup)) + 1):
            if band_mass(mu, h) > 0.0:
                positive_heights.append((h, min(ess_sup, h + 1.0)))

    active = _ActiveSet(d)
    revealed_set: set[HypercubeIndex] = set()
    revealed_list: list[HypercubeIndex] = []
    needed: set[HypercubeIndex] = set()
    records: list[dict] | None = [] if record_steps else None

    all_centers: list[np.ndarray] = []
    all_radii: list[float] = []
    in_cluster: list[bool] = []
    grid = BallGrid(d, max(1.0, 2.0 * mu.median()))
    cluster_members: list[int] = []
    cluster_cubes: set[tuple[int, ...]] = set()
    max_reach = 0.0
    sum_ball_vols = 0.0
    kd = unit_ball_volume(d)

    ghost_pts = event.ghost.points if isinstance(event, GhostConnection) else None
    ghost_hit = False

    if completion_enabled:
        needed.update(_ball_reach_candidates(np.zeros(d), 0.0, positive_heights, d))

    def covers_origin(i: int) -> bool:
        c = all_centers[i]
        return float(c @ c) <= all_radii[i] ** 2

    def attach_new_balls(new_ids: list[int]) -> list[int]:
        queue: deque[int] = deque()
        joined: list[int] = []

        def join(i: int) -> None:
            in_cluster[i] = True
            cluster_members.append(i)
            joined.append(i)
            queue.append(i)

        for i in new_ids:
            if in_cluster[i]:
                continue
            if covers_origin(i):
                join(i)
                continue
            for j in grid.candidates(all_centers[i], all_radii[i]):
                if j != i and in_cluster[j]:
                    gap = all_centers[i] - all_centers[j]
                    if float(gap @ gap) <= (all_radii[i] + all_radii[j]) ** 2:
                        join(i)
                        break
        while queue:
            i = queue.popleft()
            for j in grid.candidates(all_centers[i], all_radii[i]):
                if in_cluster[j]:
                    continue
                gap = all_centers[i] - all_centers[j]
                if float(gap @ gap) <= (all_radii[i] + all_radii[j]) ** 2:
                    join(j)
        return joined

    def certify(final: bool, step: int) -> bool:
        nonlocal ghost_hit
        if not cluster_members:
            return False
        if isinstance(event, OneArm):
            return max_reach >= event.R
        if isinstance(event, VolumeAtLeast):
            if sum_ball_vols < event.y:
                return False
            c = np.asarray([all_centers[i] for i in cluster_members])
            r = np.asarray([all_radii[i] for i in cluster_members])
            from .explorer import union_volume

            if d == 1:
                return union_volume(c, r, 1, method="exact_1d").value >= event.y
            n = vol_n * 4 if final else vol_n
            rng = substream(cfg.seed, "volcert", step)
            est = union_volume(c, r, d, method="monte_carlo", n=n, rng=rng)
            return est.value - 3.0 * est.standard_error >= event.y
        if isinstance(event, GhostConnection):
            return ghost_hit
        raise TypeError(f"unknown event {event!r}")

    pvol = 0.0
    steps = 0
    verdict = "truncated"
    reason = "max_steps"

    while steps < max_steps:
        if completion_enabled and not needed:
            if certify(final=True, step=steps):
                verdict, reason = "occurred", "event_certified"
            else:
                verdict, reason = "truncated", "cluster_complete"
            break
        idx = active.pop(revealed_set)
        steps += 1
        revealed_set.add(idx)
        revealed_list.append(idx)
        if check_invariants:
            assert supnorm(idx) <= 2 * steps, (idx, steps)
            base = ConeBase(d, frozenset(cluster_cubes), include_origin=True)
            assert hypercube_intersects_cone(idx, base), (idx, base)
        mass = band_mass(mu, idx.height)
        pvol += mass
        grew: list[int] = []
        n_points = 0
        if mass > 0.0:
            needed.discard(idx)
            rv = reveal(cfg, idx.spatial, idx.height)
            if keep_frac is not None and rv.count:
                keep = rv.coins < keep_frac
                rv = RevealedHypercube(
                    rv.spatial, rv.height, rv.centers[keep], rv.radii[keep], rv.coins[keep]
                )
            n_points = rv.count
            if rv.count:
                new_ids = []
                for c, r in zip(rv.centers, rv.radii):
                    i = len(all_radii)
                    all_centers.append(np.asarray(c, dtype=float))
                    all_radii.append(float(r))
                    in_cluster.append(False)
                    grid.add(c, float(r))
                    new_ids.append(i)
                grew = attach_new_balls(new_ids)
        if grew:
            new_cubes: set[tuple[int, ...]] = set()
            for i in grew:
                ball = Ball(tuple(all_centers[i]), all_radii[i])
                new_cubes |= cubes_intersecting_ball(ball)
                reach = float(np.linalg.norm(all_centers[i])) + all_radii[i]
                max_reach = max(max_reach, reach)
                sum_ball_vols += kd * all_radii[i] ** d
                if completion_enabled:
                    for cand in _ball_reach_candidates(all_centers[i], all_radii[i], positive_heights, d):
                        if cand not in revealed_set:
                            needed.add(cand)
            fresh = new_cubes - cluster_cubes
            if fresh:
                cluster_cubes |= fresh
                active.add_base_cubes(sorted(fresh))
            if ghost_pts is not None and not ghost_hit and ghost_pts.shape[0]:
                for i in grew:
                    gap = ghost_pts - all_centers[i][None, :]
                    if bool(np.any(np.einsum("ij,ij->i", gap, gap) <= all_radii[i] ** 2)):
                        ghost_hit = True
                        break
            if certify(final=False, step=steps):
                verdict, reason = "occurred", "event_certified"
        if records is not None:
            records.append(
                {
                    "step": steps,
                    "spatial": list(idx.spatial),
                    "height": idx.height,
                    "points": int(n_points),
                    "cum_pvol": pvol,
                    "cluster_balls": len(cluster_members),
                    "event": verdict == "occurred",
                }
            )
        if verdict == "occurred":
            break

    if all_radii:
        centers_arr = np.vstack(all_centers)
        radii_arr = np.asarray(all_radii)
    else:
        centers_arr = np.empty((0, d))
        radii_arr = np.empty(0)
    return RevealmentTrace(
        dimension=d,
        max_steps=max_steps,
        revealed=revealed_list,
        steps=steps,
        pvol_revealed=pvol,
        verdict=verdict,
        reason=reason,
        centers=centers_arr,
        radii=radii_arr,
        cluster_indices=np.asarray(sorted(cluster_members), dtype=np.int64),
        step_records=records,
    )
