"""Lazy, deterministic sampling of the Poisson ball process.

The point process on (center, radius) space with intensity
``lambda * dx (x) d mu`` is revealed per hypercube cell
``spatial + [0,1]^d x [height, height+1)``: each cell owns a counter-based
random substream keyed by (seed, cell index), so reveals are pure functions
of (config, index) and the outcome never depends on the order in which cells
are queried.  Radius bands use the half-open convention [h, h+1), so an atom
at an integer height belongs to the band starting there.

Each sampled point also carries a uniform "coin"; thinning to a lower
intensity keeps the points whose coin is below the intensity ratio, giving a
monotone coupling across intensities.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import RadiusLaw, require_weak_condition
from .geometry import unit_ball_volume

_WINDOW_MIN_BAND_RATIO = 2.0 ** 24  # stop halving bands once top/bottom exceeds this


def substream(seed: int, *tags) -> np.random.Generator:
    """Counter-based generator keyed by (seed, tags) via a stable hash.

    Philox is keyed with 128 bits of blake2b digest, so distinct tags give
    independent streams and the same tags always reproduce the same stream.
    """
    h = hashlib.blake2b(repr((int(seed),) + tuple(tags)).encode(), digest_size=16)
    key = np.frombuffer(h.digest(), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *tags) -> int:
    """A stable derived integer seed for nested components."""
    h = hashlib.blake2b(repr((int(seed),) + tuple(tags)).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class FieldConfig:
    """Immutable description of a Poisson ball field."""

    dimension: int
    lam: float
    mu: RadiusLaw
    seed: int

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not (self.lam >= 0.0):
            # lam == 0 gives the empty field, used by estimators' exact zero paths
            raise ValueError("intensity must be >= 0")
        require_weak_condition(self.mu, self.dimension)

    def with_lam(self, lam: float) -> "FieldConfig":
        return replace(self, lam=float(lam))


@dataclass(frozen=True)
class RevealedHypercube:
    """Points of one hypercube cell: centers (n, d), radii (n,), coins (n,)."""

    spatial: tuple[int, ...]
    height: int
    centers: np.ndarray
    radii: np.ndarray
    coins: np.ndarray

    @property
    def count(self) -> int:
        return int(self.radii.shape[0])


def band_mass(mu: RadiusLaw, height: int) -> float:
    """mu-mass of the radius band [height, height+1)."""
    return mu.interval_mass_halfopen(float(height), float(height) + 1.0)


def reveal(cfg: FieldConfig, spatial: tuple[int, ...], height: int) -> RevealedHypercube:
    """Reveal one hypercube cell.  Pure function of (cfg.seed, cell index).

    Zero-mass cells return no points without consuming any randomness.
    """
    if len(spatial) != cfg.dimension:
        raise ValueError("spatial index dimension mismatch")
    if height < 0:
        raise ValueError("height must be >= 0")
    d = cfg.dimension
    mass = band_mass(cfg.mu, height)
    mean = cfg.lam * mass
    if mean == 0.0:
        empty = np.empty((0, d))
        return RevealedHypercube(tuple(spatial), height, empty, np.empty(0), np.empty(0))
    rng = substream(cfg.seed, "hc", height, tuple(int(v) for v in spatial))
    n = int(rng.poisson(mean))
    centers = np.asarray(spatial, dtype=float)[None, :] + rng.random((n, d))
    u = rng.random(n)
    radii = cfg.mu.quantile_in_band(float(height), float(height) + 1.0, u)
    coins = rng.random(n)
    return RevealedHypercube(tuple(spatial), height, centers, radii, coins)


def reveal_box(cfg: FieldConfig, spatial_radius: int, max_height: int):
    """Concatenated points of all cells with |spatial|_inf <= spatial_radius
    and height <= max_height (direct-oracle helper; order independent)."""
    d = cfg.dimension
    centers = []
    radii = []
    coins = []
    rng_axis = range(-spatial_radius, spatial_radius + 1)

    def rec(k: int, prefix: list[int]):
        if k == d:
            for h in range(max_height + 1):
                rv = reveal(cfg, tuple(prefix), h)
                if rv.count:
                    centers.append(rv.centers)
                    radii.append(rv.radii)
                    coins.append(rv.coins)
            return
        for v in rng_axis:
            prefix.append(v)
            rec(k + 1, prefix)
            prefix.pop()

    rec(0, [])
    if not centers:
        return np.empty((0, d)), np.empty(0), np.empty(0)
    return np.concatenate(centers), np.concatenate(radii), np.concatenate(coins)


@dataclass(frozen=True)
class WindowSample:
    """All balls of the field that intersect the closed ball of radius R,
    up to a radius truncation with an explicit error bound."""

    dimension: int
    R: float
    centers: np.ndarray
    radii: np.ndarray
    coins: np.ndarray
    truncation_radius: float
    truncation_error_bound: float

    @property
    def count(self) -> int:
        return int(self.radii.shape[0])


def window_tail_bound(mu: RadiusLaw, lam: float, R: float, rmax: float, d: int) -> float:
    """Upper bound on the expected number of window balls lost by truncating
    radii above rmax: lambda * integral_{r > rmax} Vol(B_{R+r}) d mu."""
    kd = unit_ball_volume(d)
    if math.isfinite(mu.ess_sup()):
        if rmax >= mu.ess_sup():
            return 0.0
        from .distributions import expectation

        return lam * kd * expectation(mu, lambda r: np.where(r > rmax, np.power(R + r, d), 0.0))
    # Pareto tail: integrate the density term-by-term via binomial expansion.
    alpha, rmin = mu.params
    lo = max(rmax, rmin)
    if alpha <= d:
        return math.inf
    total = 0.0
    for j in range(d + 1):
        # integral of r^j * alpha rmin^alpha r^(-alpha-1) over (lo, inf)
        total += math.comb(d, j) * R ** (d - j) * alpha * rmin**alpha * lo ** (j - alpha) / (alpha - j)
    return lam * kd * total


def expected_window_count(mu: RadiusLaw, lam: float, R: float, d: int) -> float:
    """lambda * E[Vol(B_{R+r})], the exact mean number of window balls."""
    from .distributions import expectation

    kd = unit_ball_volume(d)
    return lam * expectation(mu, lambda r: kd * np.power(R + r, d))


def _radius_bands(mu: RadiusLaw, rmax: float) -> list[tuple[float, float, bool]]:
    """Geometric bands (lo, hi, closed_hi) covering the support up to rmax,
    halving downward from rmax toward the essential infimum."""
    e0 = mu.ess_inf()
    bands: list[tuple[float, float, bool]] = []
    hi = rmax
    closed = True  # the topmost band includes rmax itself
    while hi / 2.0 > e0 and rmax / hi < _WINDOW_MIN_BAND_RATIO:
        bands.append((hi / 2.0, hi, closed))
        hi = hi / 2.0
        closed = False
    bands.append((min(e0, hi), hi, closed))
    return bands


def sample_window(cfg: FieldConfig, R: float, eps_trunc: float = 1e-9) -> WindowSample:
    """Sample every ball intersecting the closed ball of radius R.

    Radii are drawn band-by-band (geometric bands with ratio 2); within a
    band the centers are proposed uniformly in the ball of radius R + band
    top and rejected unless the ball actually reaches B_R.  Radii above the
    truncation radius are dropped; the truncation error bound is reported.
    Deterministic given (cfg.seed, R): the draw order is fixed.
    """
    if R < 0:
        raise ValueError("window radius must be >= 0")
    d = cfg.dimension
    require_weak_condition(cfg.mu, d)

    ess_sup = cfg.mu.ess_sup()
    if math.isfinite(ess_sup):
        rmax = ess_sup
        bound = 0.0
    else:
        rmax = max(cfg.mu.ess_inf(), 1.0)
        while window_tail_bound(cfg.mu, cfg.lam, R, rmax, d) > eps_trunc:
            rmax *= 2.0
        bound = window_tail_bound(cfg.mu, cfg.lam, R, rmax, d)

    rng = substream(cfg.seed, "window", repr(float(R)))
    kd = unit_ball_volume(d)
    centers_parts: list[np.ndarray] = []
    radii_parts: list[np.ndarray] = []
    coins_parts: list[np.ndarray] = []
    if cfg.lam > 0.0:
        for lo, hi, closed_hi in _radius_bands(cfg.mu, rmax):
            mass = cfg.mu.interval_mass(lo, hi) if closed_hi else cfg.mu.interval_mass_halfopen(lo, hi)
            if mass <= 0.0:
                continue
            prop_radius = R + hi
            mean = cfg.lam * mass * kd * prop_radius**d
            n = int(rng.poisson(mean))
            if n == 0:
                continue
            # uniform centers in B_{R+hi}: direction from normals, radial via u^(1/d)
            gauss = rng.standard_normal((n, d))
            norms = np.linalg.norm(gauss, axis=1)
            norms[norms == 0.0] = 1.0
            radial = prop_radius * rng.random(n) ** (1.0 / d)
            centers = gauss / norms[:, None] * radial[:, None]
            r = cfg.mu.quantile_in_band(lo, hi, rng.random(n), closed_hi=closed_hi)
            coins = rng.random(n)
            keep = np.linalg.norm(centers, axis=1) <= R + r
            centers_parts.append(centers[keep])
            radii_parts.append(r[keep])
            coins_parts.append(coins[keep])
    if centers_parts:
        centers = np.concatenate(centers_parts)
        radii = np.concatenate(radii_parts)
        coins = np.concatenate(coins_parts)
    else:
        centers, radii, coins = np.empty((0, d)), np.empty(0), np.empty(0)
    return WindowSample(d, float(R), centers, radii, coins, rmax, bound)


def thin(sample: WindowSample, lambda_lo: float, cfg: FieldConfig) -> WindowSample:
    """Monotone thinning of a window sample down to intensity lambda_lo:
    keeps the points whose coin is below lambda_lo / cfg.lam."""
    if not (0.0 <= lambda_lo <= cfg.lam):
        raise ValueError("thinning needs 0 <= lambda_lo <= sampling intensity")
    if cfg.lam == 0.0:
        return sample
    keep = sample.coins < lambda_lo / cfg.lam
    return WindowSample(
        sample.dimension,
        sample.R,
        sample.centers[keep],
        sample.radii[keep],
        sample.coins[keep],
        sample.truncation_radius,
        sample.truncation_error_bound,
    )


@dataclass(frozen=True)
class GhostField:
    """A homogeneous auxiliary point process of rate rho on a box region."""

    rho: float
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    points: np.ndarray

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


def sample_ghost(rho: float, lo, hi, seed: int, *tags) -> GhostField:
    """Sample the rate-rho ghost process on the box [lo, hi]."""
    if rho < 0:
        raise ValueError("ghost rate must be >= 0")
    lo = tuple(float(v) for v in lo)
    hi = tuple(float(v) for v in hi)
    if len(lo) != len(hi) or any(h < l for l, h in zip(lo, hi)):
        raise ValueError("ghost region must be a nonempty box")
    vol = math.prod(h - l for l, h in zip(lo, hi))
    rng = substream(seed, "ghost", *tags)
    n = int(rng.poisson(rho * vol)) if rho * vol > 0 else 0
    pts = np.asarray(lo)[None, :] + rng.random((n, len(lo))) * (np.asarray(hi) - np.asarray(lo))[None, :]
    return GhostField(float(rho), lo, hi, pts)
