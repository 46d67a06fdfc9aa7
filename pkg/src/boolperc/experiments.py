"""Replica-parallel estimators and finite-size inequality checkers.

Estimators: one-arm probability, susceptibility (mean cluster volume),
cluster-volume tails, magnetization (direct Laplace-functional form and its
ghost-process dual), a finite-size critical-intensity locator, and log-log
exponent fits.  Checkers evaluate the package's target inequalities on
simulation output: implied constants are estimated, never assumed, and the
assertions are positivity/stability after 3-sigma widening.

Determinism: every estimator derives one substream per replica from
(seed, purpose, replica index), and aggregation is a fixed-order reduction
over replica indices, so results are bit-identical across worker counts.

Censoring: cluster exploration is capped by a ball budget and by the sampling
window; censored replicas contribute certified volume lower bounds (the
conservative direction for the >=-inequalities checked here) and are counted
in ``censored_fraction``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np
from scipy import stats as sstats
from scipy.optimize import isotonic_regression

from .distributions import require_weak_condition
from .entropy import entropic_rhs_gap, entropic_rhs_log
from .explorer import StopArm, explore_cluster, points_in_union, union_volume
from .field import FieldConfig, derive_seed, sample_ghost, sample_window, substream, thin
from .geometry import unit_ball_volume
from .revealment import EventSpec, GhostConnection, OneArm, VolumeAtLeast, run_template


# -- replica plumbing ---------------------------------------------------------


def resolve_workers(workers: int | None) -> int:
    """Worker count: explicit argument, else BOOLPERC_WORKERS, else 1."""
    if workers is None:
        workers = int(os.environ.get("BOOLPERC_WORKERS", "1"))
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


def run_replicas(task, n: int, workers: int | None = None) -> list:
    """Map a picklable task over replica indices 0..n-1.

    Results come back indexed by replica, so any reduction over them is
    independent of the worker count.
    """
    w = resolve_workers(workers)
    if w == 1 or n < 2 * w:
        return [task(i) for i in range(n)]
    chunk = max(1, math.ceil(n / (4 * w)))
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(task, range(n), chunksize=chunk))


@dataclass(frozen=True)
class Estimate:
    """A replica-averaged scalar with its uncertainty and data-quality flags."""

    value: float
    standard_error: float
    replicas: int
    censored_fraction: float
    seed: int
    truncation_error: float = 0.0


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = int(x.size)
    if n == 0:
        return 0.0, 0.0
    m = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return m, se


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else 0.0


# -- one-arm probability ------------------------------------------------------


def _theta_replica(cfg: FieldConfig, R: float, eps_trunc: float, rep: int):
    rcfg = replace(cfg, seed=derive_seed(cfg.seed, "theta", rep))
    w = sample_window(rcfg, R, eps_trunc)
    cl = explore_cluster(w, StopArm(R))
    return cl.reached_radius is not None, w.truncation_error_bound


def estimate_theta(
    cfg: FieldConfig,
    R: float,
    replicas: int,
    *,
    eps_trunc: float = 1e-9,
    workers: int | None = None,
) -> Estimate:
    """Probability that the origin's cluster touches the sphere of radius R."""
    require_weak_condition(cfg.mu, cfg.dimension)
    if R < 1:
        raise ValueError("R must be >= 1")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if cfg.lam == 0.0:
        return Estimate(0.0, 0.0, replicas, 0.0, cfg.seed)
    out = run_replicas(partial(_theta_replica, cfg, R, eps_trunc), replicas, workers)
    hits = np.array([h for h, _ in out], dtype=float)
    trunc = max(t for _, t in out)
    p = float(np.mean(hits))
    return Estimate(p, _binomial_se(p, replicas), replicas, 0.0, cfg.seed, trunc)


# -- cluster-volume sampling (shared by chi / tails / magnetization) ----------


def _volume_replica(cfg: FieldConfig, R: float, ball_cap: int, vol_n: int, eps_trunc: float, rep: int):
    rcfg = replace(cfg, seed=derive_seed(cfg.seed, "vol", rep))
    w = sample_window(rcfg, R, eps_trunc)
    cl = explore_cluster(w, ball_cap=ball_cap)
    if cl.ball_count == 0:
        return 0.0, 0.0, 0.0, False, w.truncation_error_bound
    est = union_volume(
        cl.centers, cl.radii, cfg.dimension, n=vol_n, rng=substream(rcfg.seed, "volmc")
    )
    reach = cl.max_reach()
    censored = bool(cl.truncated or reach >= R)
    return est.value, est.standard_error, reach, censored, w.truncation_error_bound


@dataclass
class VolumeSamples:
    """Per-replica certified cluster volumes at one intensity.

    Censored replicas (ball cap hit, or the cluster reached the sampling
    window's edge) carry volume lower bounds.  All derived estimates reuse
    the same draw, so e.g. the empirical Markov inequality
    tail(y) <= chi / y holds pathwise.
    """

    dimension: int
    lam: float
    volumes: np.ndarray
    volume_ses: np.ndarray
    reaches: np.ndarray
    censored: np.ndarray
    seed: int
    R: float
    truncation_error: float

    @property
    def replicas(self) -> int:
        return int(self.volumes.size)

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.censored)) if self.replicas else 0.0

    def chi(self) -> Estimate:
        m, se = _mean_se(self.volumes)
        return Estimate(m, se, self.replicas, self.censored_fraction, self.seed, self.truncation_error)

    def tail_at(self, y: float) -> Estimate:
        hits = self.volumes > 0.0 if y <= 0.0 else self.volumes >= y
        p = float(np.mean(hits))
        return Estimate(
            p, _binomial_se(p, self.replicas), self.replicas,
            self.censored_fraction, self.seed, self.truncation_error,
        )

    def tail_integral(self, y: float) -> Estimate:
        """integral_0^y P[Vol >= u] du as the empirical mean of min(Vol, y)."""
        m, se = _mean_se(np.minimum(self.volumes, y))
        return Estimate(m, se, self.replicas, self.censored_fraction, self.seed, self.truncation_error)

    def magnetization(self, rho: float) -> Estimate:
        m, se = _mean_se(-np.expm1(-rho * self.volumes))
        return Estimate(m, se, self.replicas, self.censored_fraction, self.seed, self.truncation_error)


def sample_cluster_volumes(
    cfg: FieldConfig,
    replicas: int,
    *,
    R: float = 16.0,
    ball_cap: int = 4000,
    vol_n: int = 16384,
    eps_trunc: float = 1e-9,
    workers: int | None = None,
) -> VolumeSamples:
    """Simulate ``replicas`` independent clusters and certify their volumes."""
    require_weak_condition(cfg.mu, cfg.dimension)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    out = run_replicas(
        partial(_volume_replica, cfg, R, ball_cap, vol_n, eps_trunc), replicas, workers
    )
    vols = np.array([o[0] for o in out])
    ses = np.array([o[1] for o in out])
    reaches = np.array([o[2] for o in out])
    cens = np.array([o[3] for o in out], dtype=bool)
    trunc = max(o[4] for o in out)
    return VolumeSamples(cfg.dimension, cfg.lam, vols, ses, reaches, cens, cfg.seed, R, trunc)


def estimate_chi(
    cfg: FieldConfig,
    replicas: int,
    *,
    ball_cap: int = 4000,
    R: float = 16.0,
    vol_n: int = 16384,
    workers: int | None = None,
) -> Estimate:
    """Mean cluster volume (susceptibility); meaningful below criticality."""
    return sample_cluster_volumes(
        cfg, replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
    ).chi()


@dataclass
class TailReport:
    """Survival-function estimates of the cluster volume on a y grid."""

    y_grid: np.ndarray
    raw: list[Estimate]
    corrected: np.ndarray
    chi: Estimate
    samples: VolumeSamples


def estimate_tail(
    cfg: FieldConfig,
    y_grid,
    replicas: int,
    *,
    ball_cap: int = 4000,
    R: float = 16.0,
    vol_n: int = 16384,
    workers: int | None = None,
    samples: VolumeSamples | None = None,
) -> TailReport:
    """P[Vol(C) >= y] across y_grid, raw and isotonic-corrected, plus the
    susceptibility from the same volume draws."""
    y = np.asarray(y_grid, dtype=float)
    if y.size == 0 or np.any(np.diff(y) < 0):
        raise ValueError("y_grid must be nonempty and sorted ascending")
    s = samples or sample_cluster_volumes(
        cfg, replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
    )
    raw = [s.tail_at(float(v)) for v in y]
    vals = np.array([e.value for e in raw])
    corrected = isotonic_regression(vals, increasing=False).x
    return TailReport(y, raw, corrected, s.chi(), s)


# -- magnetization ------------------------------------------------------------


def _ghost_replica(cfg: FieldConfig, rho: float, R: float, ball_cap: int, eps_trunc: float, rep: int):
    rcfg = replace(cfg, seed=derive_seed(cfg.seed, "vol", rep))
    w = sample_window(rcfg, R, eps_trunc)
    cl = explore_cluster(w, ball_cap=ball_cap)
    if cl.ball_count == 0:
        return False, False
    lo = np.min(cl.centers - cl.radii[:, None], axis=0)
    hi = np.max(cl.centers + cl.radii[:, None], axis=0)
    ghost = sample_ghost(rho, lo, hi, rcfg.seed, "ghost")
    hit = bool(np.any(points_in_union(ghost.points, cl.centers, cl.radii))) if ghost.points.size else False
    censored = bool(cl.truncated or cl.max_reach() >= R)
    return hit, censored


def estimate_magnetization(
    cfg: FieldConfig,
    rho: float,
    replicas: int,
    method: str = "direct",
    *,
    ball_cap: int = 4000,
    R: float = 16.0,
    vol_n: int = 32768,
    workers: int | None = None,
    samples: VolumeSamples | None = None,
) -> Estimate:
    """E[1 - exp(-rho Vol(C))].

    ``direct`` averages the integrand over certified cluster volumes;
    ``ghost`` samples an independent rate-rho point process on each cluster's
    bounding box and reports the hit frequency.  The two agree in law: a
    box-confined ghost field hits the cluster with conditional probability
    exactly 1 - exp(-rho Vol(C)).
    """
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if method not in ("direct", "ghost"):
        raise ValueError("method must be 'direct' or 'ghost'")
    if rho == 0.0:
        return Estimate(0.0, 0.0, replicas, 0.0, cfg.seed)
    if method == "direct":
        s = samples or sample_cluster_volumes(
            cfg, replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
        )
        return s.magnetization(rho)
    require_weak_condition(cfg.mu, cfg.dimension)
    out = run_replicas(partial(_ghost_replica, cfg, rho, R, ball_cap, 1e-9), replicas, workers)
    hits = np.array([h for h, _ in out], dtype=float)
    cens = float(np.mean([c for _, c in out]))
    p = float(np.mean(hits))
    return Estimate(p, _binomial_se(p, replicas), replicas, cens, cfg.seed)


# -- coupled thinning sweeps --------------------------------------------------


def _coupled_replica(cfg_hi: FieldConfig, lambdas: tuple, R: float, arm_R: float, vol_n: int, rep: int):
    rcfg = replace(cfg_hi, seed=derive_seed(cfg_hi.seed, "sweep", rep))
    w = sample_window(rcfg, R)
    cl_hi = explore_cluster(w)
    d = cfg_hi.dimension
    box_vol = 0.0
    pts = None
    if cl_hi.ball_count:
        lo = np.min(cl_hi.centers - cl_hi.radii[:, None], axis=0)
        hi = np.max(cl_hi.centers + cl_hi.radii[:, None], axis=0)
        box_vol = float(np.prod(hi - lo))
        pts = lo + substream(rcfg.seed, "sweeppts").random((vol_n, d)) * (hi - lo)
    arms, vols, reaches = [], [], []
    for lam in lambdas:
        wl = thin(w, lam, rcfg)
        cl = explore_cluster(wl)
        reach = cl.max_reach()
        arms.append(reach >= arm_R)
        reaches.append(reach)
        if cl.ball_count == 0 or pts is None:
            vols.append(0.0)
        else:
            vols.append(box_vol * float(np.mean(points_in_union(pts, cl.centers, cl.radii))))
    return arms, vols, reaches


@dataclass
class CoupledSweep:
    """Pathwise-coupled per-intensity observables from a single base field.

    For each replica, the field is sampled once at the largest intensity and
    thinned monotonically to every smaller one; cluster volumes use one
    shared set of comparison points, so arm indicators, volumes and
    magnetization integrands are nondecreasing in the intensity replica by
    replica, exactly.
    """

    lambdas: np.ndarray
    arm: np.ndarray       # (n_lambda, replicas) bool
    volumes: np.ndarray   # (n_lambda, replicas)
    reaches: np.ndarray
    seed: int
    R: float
    arm_R: float

    def theta(self, k: int) -> Estimate:
        p = float(np.mean(self.arm[k]))
        n = self.arm.shape[1]
        return Estimate(p, _binomial_se(p, n), n, 0.0, self.seed)

    def chi(self, k: int) -> Estimate:
        m, se = _mean_se(self.volumes[k])
        return Estimate(m, se, self.volumes.shape[1], 0.0, self.seed)


def coupled_sweep(
    cfg: FieldConfig,
    lambdas,
    replicas: int,
    *,
    R: float = 12.0,
    arm_R: float | None = None,
    vol_n: int = 4096,
    workers: int | None = None,
) -> CoupledSweep:
    """Estimate arm/volume observables on a grid of intensities with exact
    pathwise monotone coupling (single field, monotone thinning)."""
    lams = tuple(float(v) for v in lambdas)
    if not lams or any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] <= 0:
        raise ValueError("lambdas must be positive and strictly increasing")
    cfg_hi = cfg.with_lam(lams[-1])
    require_weak_condition(cfg.mu, cfg.dimension)
    if arm_R is None:
        arm_R = R / 2.0
    out = run_replicas(
        partial(_coupled_replica, cfg_hi, lams, R, arm_R, vol_n), replicas, workers
    )
    arm = np.array([o[0] for o in out], dtype=bool).T
    vols = np.array([o[1] for o in out]).T
    reaches = np.array([o[2] for o in out]).T
    return CoupledSweep(np.asarray(lams), arm, vols, reaches, cfg.seed, R, arm_R)


# -- critical-intensity locator -----------------------------------------------


class NonBracketingError(RuntimeError):
    """The initial intensity interval does not straddle the crossing target."""

    def __init__(self, message: str, evaluations: list):
        super().__init__(message)
        self.evaluations = evaluations


@dataclass
class LambdaCResult:
    estimate: float
    bracket: tuple[float, float]
    R: float
    crossing_target: float
    tolerance: float
    replicas_per_eval: int
    evaluations: list[tuple[float, float, float, float]]  # (R, lam, theta, se)
    per_R: dict[float, float]
    seed: int


def find_lambda_c(
    cfg: FieldConfig,
    R_ladder=(8.0, 16.0),
    crossing_target: float = 0.5,
    tolerance: float = 0.02,
    *,
    replicas_per_eval: int = 400,
    bracket: tuple[float, float] | None = None,
    eps_trunc: float = 1e-6,
    workers: int | None = None,
) -> LambdaCResult:
    """Bisection estimate of the critical intensity from the crossing of the
    finite-size one-arm probability through ``crossing_target``.

    Bisection runs at every window radius in the ladder (for a sensitivity
    report); the headline estimate uses the largest.  A non-bracketing
    initial interval raises NonBracketingError carrying the endpoint
    evaluations (in particular, one-dimensional fields with integrable radii
    never percolate, so no interval brackets a crossing).
    """
    ladder = tuple(float(r) for r in R_ladder)
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("R_ladder must be nonempty and strictly increasing")
    if not 0.0 < crossing_target < 1.0:
        raise ValueError("crossing_target must lie in (0, 1)")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    require_weak_condition(cfg.mu, cfg.dimension)
    mean_ball_vol = unit_ball_volume(cfg.dimension) * cfg.mu.moment(cfg.dimension)
    if bracket is None:
        bracket = (0.05 / mean_ball_vol, 3.0 / mean_ball_vol)
    lo0, hi0 = float(bracket[0]), float(bracket[1])
    if not 0.0 <= lo0 < hi0:
        raise ValueError("bracket must satisfy 0 <= lo < hi")

    evaluations: list[tuple[float, float, float, float]] = []
    per_R: dict[float, float] = {}

    def theta_at(R: float, lam: float, k: int) -> float:
        ecfg = FieldConfig(cfg.dimension, lam, cfg.mu, derive_seed(cfg.seed, "lamc", repr(R), k))
        est = estimate_theta(ecfg, R, replicas_per_eval, eps_trunc=eps_trunc, workers=workers)
        evaluations.append((R, lam, est.value, est.standard_error))
        return est.value

    final_bracket = (lo0, hi0)
    for R in ladder:
        k = 0
        lo, hi = lo0, hi0
        th_lo = theta_at(R, lo, k); k += 1
        th_hi = theta_at(R, hi, k); k += 1
        if not (th_lo < crossing_target < th_hi):
            raise NonBracketingError(
                f"one-arm probability at R={R} does not cross {crossing_target} on "
                f"[{lo}, {hi}]: endpoints {th_lo:.4f}, {th_hi:.4f}",
                evaluations,
            )
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            if theta_at(R, mid, k) > crossing_target:
                hi = mid
            else:
                lo = mid
            k += 1
        per_R[R] = 0.5 * (lo + hi)
        final_bracket = (lo, hi)

    R_top = ladder[-1]
    return LambdaCResult(
        estimate=per_R[R_top],
        bracket=final_bracket,
        R=R_top,
        crossing_target=crossing_target,
        tolerance=tolerance,
        replicas_per_eval=replicas_per_eval,
        evaluations=evaluations,
        per_R=per_R,
        seed=cfg.seed,
    )


# -- exponent fitting ---------------------------------------------------------


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    stderr: float
    r2: float
    n_used: int
    n_excluded: int


def fit_exponent(x_grid, estimates, model: str = "power_law") -> ExponentFit:
    """Log-log least-squares slope of estimates against x_grid; nonpositive
    points are excluded and counted."""
    if model != "power_law":
        raise ValueError(f"unknown model {model!r}")
    x = np.asarray(x_grid, dtype=float)
    y = np.asarray(estimates, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x_grid and estimates must have matching shapes")
    mask = (x > 0) & (y > 0)
    n_excluded = int(np.sum(~mask))
    x, y = x[mask], y[mask]
    if x.size < 2:
        raise ValueError("need at least two positive points to fit")
    res = sstats.linregress(np.log(x), np.log(y))
    r = float(res.rvalue)
    return ExponentFit(
        exponent=float(res.slope),
        stderr=float(res.stderr) if math.isfinite(res.stderr) else 0.0,
        r2=r * r if math.isfinite(r) else 0.0,
        n_used=int(x.size),
        n_excluded=n_excluded,
    )


# -- theorem checkers ---------------------------------------------------------


@dataclass(frozen=True)
class CheckerConfig:
    """Grids and hypothesis parameters shared by the inequality checkers."""

    lambda_c_hat: float
    lambda_grid: tuple[float, ...]
    y_grid: tuple[float, ...]
    rho_grid: tuple[float, ...]
    beta0: float = 1.0
    c0: float = 1e-6

    def __post_init__(self):
        for name in ("lambda_grid", "y_grid", "rho_grid"):
            g = getattr(self, name)
            if len(g) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if self.beta0 <= 0 or self.c0 <= 0 or self.lambda_c_hat <= 0:
            raise ValueError("beta0, c0 and lambda_c_hat must be positive")


@dataclass
class TheoremReport:
    """Implied-constant diagnostics for one family of inequalities."""

    name: str
    rows: list[dict]
    constants: dict[str, float]
    passed: bool
    excluded: list[dict]
    details: dict


def _lower(e: Estimate) -> float:
    return max(e.value - 3.0 * e.standard_error, 0.0)


def _upper(e: Estimate) -> float:
    return e.value + 3.0 * e.standard_error


def check_theorem_susceptibility(
    cfg: FieldConfig,
    checker: CheckerConfig,
    *,
    replicas: int = 1500,
    theta_replicas: int = 800,
    critical_replicas: int = 3000,
    R: float = 16.0,
    theta_R: float = 8.0,
    ball_cap: int = 4000,
    vol_n: int = 16384,
    workers: int | None = None,
    critical_samples: VolumeSamples | None = None,
) -> TheoremReport:
    """Lower bounds on the susceptibility below criticality.

    For each subcritical grid intensity lam with gap = lambda_c_hat - lam:
      (a) chi(lam) * gap^2 / theta(2*lambda_c_hat - lam)  stays positive;
      (b) chi(lam) * gap^2 / P_crit[Vol >= gap^-2]        stays positive;
    both reported after 3-sigma widening (numerator lowered, denominator
    raised).
    """
    lc = checker.lambda_c_hat
    if any(l >= lc for l in checker.lambda_grid):
        raise ValueError("lambda_grid must lie strictly below lambda_c_hat")
    crit = critical_samples or sample_cluster_volumes(
        cfg.with_lam(lc), critical_replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
    )
    rows, excluded = [], []
    c1s, c2s = [], []
    for lam in checker.lambda_grid:
        gap = lc - lam
        chi = estimate_chi(cfg.with_lam(lam), replicas, ball_cap=ball_cap, R=R, vol_n=vol_n, workers=workers)
        mirror = estimate_theta(cfg.with_lam(2 * lc - lam), theta_R, theta_replicas, workers=workers)
        tail2 = crit.tail_at(gap ** -2)
        row = {
            "lam": lam, "gap": gap,
            "chi": chi.value, "chi_se": chi.standard_error,
            "theta_mirror": mirror.value, "theta_mirror_se": mirror.standard_error,
            "tail_at_gap2": tail2.value, "tail_se": tail2.standard_error,
            "censored_fraction": chi.censored_fraction,
        }
        if _upper(mirror) <= 0.0:
            excluded.append({**row, "why": "no arm signal at mirrored intensity"})
        else:
            row["c1_lower"] = _lower(chi) * gap**2 / _upper(mirror)
            c1s.append(row["c1_lower"])
        if _upper(tail2) <= 0.0:
            excluded.append({**row, "why": "zero tail estimate at gap^-2"})
        else:
            row["c2_lower"] = _lower(chi) * gap**2 / _upper(tail2)
            c2s.append(row["c2_lower"])
        rows.append(row)
    constants = {
        "arm_form": min(c1s) if c1s else float("nan"),
        "tail_form": min(c2s) if c2s else float("nan"),
    }
    passed = bool(c1s and c2s and min(c1s) > checker.c0 and min(c2s) > checker.c0)
    return TheoremReport(
        "susceptibility", rows, constants, passed, excluded,
        {"critical_censored_fraction": crit.censored_fraction, "replicas": replicas},
    )


def _tail_curve_with_origin(samples: VolumeSamples, y_grid: np.ndarray):
    """Isotonic survival curve on [0] + y_grid (the 0-entry is P[Vol > 0])."""
    ys = np.concatenate(([0.0], y_grid))
    raw = [samples.tail_at(float(v)) for v in ys]
    vals = np.array([e.value for e in raw])
    ses = np.array([e.standard_error for e in raw])
    corrected = isotonic_regression(vals, increasing=False).x
    return ys, corrected, ses


def _cumulative_trapezoid(ys: np.ndarray, vals: np.ndarray) -> np.ndarray:
    inc = 0.5 * (vals[1:] + vals[:-1]) * np.diff(ys)
    return np.concatenate(([0.0], np.cumsum(inc)))


def check_theorem_tail(
    cfg: FieldConfig,
    checker: CheckerConfig,
    *,
    replicas: int = 1500,
    critical_replicas: int = 3000,
    R: float = 16.0,
    ball_cap: int = 4000,
    vol_n: int = 16384,
    workers: int | None = None,
    critical_samples: VolumeSamples | None = None,
) -> TheoremReport:
    """Critical volume-tail inequalities.

    (a) T(y)^(2/beta0 - 1) * integral_0^y T(u) du stays positive across the
        y grid (T = critical survival curve, trapezoid on the isotonic fit);
    (b) for subcritical lam: log(T_lam(y)/T_crit(y)) >= -1 - c * gap^2 *
        integral/T_crit(y), with c the smallest fitted constant making the
        family hold (floored at c0, so positive by construction); rows with
        an empty tail estimate are excluded.
    """
    lc = checker.lambda_c_hat
    y_grid = np.asarray(checker.y_grid, dtype=float)
    crit = critical_samples or sample_cluster_volumes(
        cfg.with_lam(lc), critical_replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
    )
    ys, curve, ses = _tail_curve_with_origin(crit, y_grid)
    integ = _cumulative_trapezoid(ys, curve)
    low_curve = np.maximum(curve - 3.0 * ses, 0.0)
    low_integ = _cumulative_trapezoid(ys, low_curve)
    expo = 2.0 / checker.beta0 - 1.0

    rows, excluded, c1s = [], [], []
    for k in range(1, ys.size):
        row = {
            "y": float(ys[k]), "tail": float(curve[k]), "tail_se": float(ses[k]),
            "integral": float(integ[k]),
            "t1_lower": float(low_curve[k] ** expo * low_integ[k]) if low_curve[k] > 0 else 0.0,
        }
        rows.append(row)
        c1s.append(row["t1_lower"])

    sub_rows = []
    needed = [0.0]
    for lam in checker.lambda_grid:
        gap = lc - lam
        sub = sample_cluster_volumes(
            cfg.with_lam(lam), replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
        )
        _, sub_curve, _ = _tail_curve_with_origin(sub, y_grid)
        for k in range(1, ys.size):
            t_sub, t_crit = float(sub_curve[k]), float(curve[k])
            if t_sub <= 0.0 or t_crit <= 0.0:
                excluded.append({"lam": lam, "y": float(ys[k]), "why": "empty tail estimate"})
                continue
            log_ratio = math.log(t_sub / t_crit)
            need = (-1.0 - log_ratio) * t_crit / (gap**2 * integ[k]) if integ[k] > 0 else 0.0
            needed.append(need)
            sub_rows.append({
                "lam": lam, "y": float(ys[k]), "k": k, "log_ratio": log_ratio,
                "needed_constant": need,
            })
    fitted = max(checker.c0, max(needed))
    for row in sub_rows:
        k = row.pop("k")
        rhs = -1.0 - fitted * (lc - row["lam"]) ** 2 * integ[k] / max(curve[k], 1e-300)
        row["rhs_at_fitted"] = rhs
        row["holds"] = row["log_ratio"] >= rhs - 1e-12

    constants = {"integral_form": min(c1s) if c1s else float("nan"), "fitted_log_constant": fitted}
    passed = bool(c1s and min(c1s) > checker.c0 and all(r["holds"] for r in sub_rows))
    return TheoremReport(
        "tail", rows + sub_rows, constants, passed, excluded,
        {"critical_censored_fraction": crit.censored_fraction, "beta0": checker.beta0},
    )


def check_theorem_magnetization(
    cfg: FieldConfig,
    checker: CheckerConfig,
    *,
    replicas: int = 1500,
    critical_replicas: int = 3000,
    R: float = 16.0,
    ball_cap: int = 4000,
    vol_n: int = 16384,
    workers: int | None = None,
    critical_samples: VolumeSamples | None = None,
) -> TheoremReport:
    """Magnetization lower bounds at criticality.

    (a) chi(lam) * gap^2 / M(gap^2) stays positive across the lambda grid;
    (b) M(rho) / rho^(beta0/2) stays positive across the rho grid, with the
        log-log fitted exponent of M reported against beta0/2.
    """
    lc = checker.lambda_c_hat
    if any(l >= lc for l in checker.lambda_grid):
        raise ValueError("lambda_grid must lie strictly below lambda_c_hat")
    if checker.rho_grid[0] <= 0.0 or checker.rho_grid[-1] > 1.0:
        raise ValueError("rho_grid must lie in (0, 1]")
    crit = critical_samples or sample_cluster_volumes(
        cfg.with_lam(lc), critical_replicas, R=R, ball_cap=ball_cap, vol_n=vol_n, workers=workers
    )
    rows, excluded, m1s, m2s, mvals = [], [], [], [], []
    for rho in checker.rho_grid:
        m = crit.magnetization(rho)
        mvals.append(m.value)
        row = {
            "rho": rho, "M": m.value, "M_se": m.standard_error,
            "m2_lower": _lower(m) / rho ** (checker.beta0 / 2.0),
        }
        m2s.append(row["m2_lower"])
        rows.append(row)
    fit = fit_exponent(checker.rho_grid, mvals)
    for lam in checker.lambda_grid:
        gap = lc - lam
        chi = estimate_chi(cfg.with_lam(lam), replicas, ball_cap=ball_cap, R=R, vol_n=vol_n, workers=workers)
        m_gap = crit.magnetization(gap**2)
        row = {
            "lam": lam, "gap": gap, "chi": chi.value, "chi_se": chi.standard_error,
            "M_at_gap2": m_gap.value, "M_se": m_gap.standard_error,
        }
        if _upper(m_gap) <= 0.0:
            excluded.append({**row, "why": "zero magnetization estimate"})
        else:
            row["m1_lower"] = _lower(chi) * gap**2 / _upper(m_gap)
            m1s.append(row["m1_lower"])
        rows.append(row)
    constants = {
        "chi_form": min(m1s) if m1s else float("nan"),
        "power_form": min(m2s) if m2s else float("nan"),
    }
    passed = bool(m1s and m2s and min(m1s) > checker.c0 and min(m2s) > checker.c0)
    details = {
        "fitted_exponent": fit.exponent,
        "fitted_exponent_se": fit.stderr,
        "exponent_reference": checker.beta0 / 2.0,
        "exponent_consistent": fit.exponent <= checker.beta0 / 2.0 + 3.0 * fit.stderr,
        "M_at_1_le_1": mvals[-1] <= 1.0 if checker.rho_grid[-1] == 1.0 else None,
        "critical_censored_fraction": crit.censored_fraction,
    }
    return TheoremReport("magnetization", rows, constants, passed, excluded, details)


# -- entropic revealment bound ------------------------------------------------


def _entropic_replica(cfg2: FieldConfig, l1: float, event: EventSpec, max_steps: int, vol_n: int, rep: int):
    rcfg = replace(cfg2, seed=derive_seed(cfg2.seed, "ent", rep))
    t2 = run_template(rcfg, event, max_steps, vol_n=vol_n)
    t1 = run_template(rcfg, event, max_steps, thin_lam=l1, vol_n=vol_n)
    return (
        t1.occurred,
        t2.occurred,
        t1.pvol_revealed,
        t1.reason == "max_steps",
        t2.reason == "max_steps",
    )


@dataclass
class EntropicReport:
    """Measured two-intensity gap for one revealment-decided event against
    the process-KL bounds, plus revealed-mass comparisons."""

    event: EventSpec
    l1: float
    l2: float
    p1: Estimate
    p2: Estimate
    gap: float
    gap_se: float
    pvol: Estimate
    rhs_gap: float
    rhs_gap_widened: float
    gap_holds: bool
    log_ratio: float | None
    rhs_log: float | None
    log_holds: bool | None
    truncated_fraction: float
    flagged: bool
    ratio_chi: float | None
    ratio_tail_integral: float | None
    ratio_magnetization: float | None
    replicas: int
    seed: int


def check_entropic_bound(
    cfg: FieldConfig,
    event: EventSpec,
    l1: float,
    l2: float,
    replicas: int,
    *,
    max_steps: int = 2500,
    vol_n: int = 2048,
    workers: int | None = None,
    aux_replicas: int | None = None,
    aux_R: float = 12.0,
) -> EntropicReport:
    """Estimate P at both intensities of the budgeted revealment event (the
    event 'the algorithm certifies within max_steps', identical under both
    measures via monotone thinning of one field) and test the measured gap
    and log-ratio against the revealed-mass KL bounds with 3-sigma widening.

    Also reports the revealed product-volume against the smaller intensity's
    susceptibility, and, where the event type makes them meaningful, against
    the partial tail integral (volume events) and rho^-1 * magnetization
    (ghost events).
    """
    if not 0.0 < l1 <= l2:
        raise ValueError("need 0 < l1 <= l2")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    cfg2 = cfg.with_lam(l2)
    require_weak_condition(cfg.mu, cfg.dimension)
    out = run_replicas(
        partial(_entropic_replica, cfg2, l1, event, max_steps, vol_n), replicas, workers
    )
    i1 = np.array([o[0] for o in out], dtype=float)
    i2 = np.array([o[1] for o in out], dtype=float)
    pvols = np.array([o[2] for o in out])
    trunc = np.array([o[3] or o[4] for o in out], dtype=bool)

    p1v, _ = _mean_se(i1)
    p2v, _ = _mean_se(i2)
    p1 = Estimate(p1v, _binomial_se(p1v, replicas), replicas, float(np.mean(trunc)), cfg.seed)
    p2 = Estimate(p2v, _binomial_se(p2v, replicas), replicas, float(np.mean(trunc)), cfg.seed)
    gap = abs(p1v - p2v)
    _, gap_se = _mean_se(i1 - i2)
    pv, pv_se = _mean_se(pvols)
    pvol = Estimate(pv, pv_se, replicas, float(np.mean(trunc)), cfg.seed)

    max_p = max(p1v, p2v)
    max_p_se = p1.standard_error if p1v >= p2v else p2.standard_error
    rhs = entropic_rhs_gap(l1, l2, max_p, pv) if max_p > 0 else 0.0
    rhs_wide = entropic_rhs_gap(l1, l2, min(1.0, max_p + 3 * max_p_se), _upper(pvol))
    gap_holds = gap <= rhs_wide + 3.0 * gap_se + 1e-12

    log_ratio = rhs_log = None
    log_holds = None
    if p1v > 0.0 and p2v > 0.0:
        log_ratio = math.log(p1v / p2v)
        p1_low = _lower(p1)
        if p1_low > 0.0:
            rhs_log = entropic_rhs_log(l1, l2, p1_low, _upper(pvol))
            var_term = (
                np.var(i1, ddof=1) / p1v**2
                + np.var(i2, ddof=1) / p2v**2
                - 2.0 * np.cov(i1, i2, ddof=1)[0, 1] / (p1v * p2v)
            )
            se_log = math.sqrt(max(var_term, 0.0) / replicas)
            log_holds = log_ratio <= rhs_log + 3.0 * se_log + 1e-12

    aux_n = aux_replicas if aux_replicas is not None else max(400, replicas // 10)
    aux = sample_cluster_volumes(cfg.with_lam(l1), aux_n, R=aux_R, workers=workers)
    chi1 = aux.chi()
    ratio_chi = pv / chi1.value if chi1.value > 0 else None
    ratio_tail = ratio_mag = None
    if isinstance(event, VolumeAtLeast):
        ti = aux.tail_integral(event.y)
        ratio_tail = pv / ti.value if ti.value > 0 else None
    if isinstance(event, GhostConnection):
        rho = event.ghost.rho
        m = aux.magnetization(rho)
        ratio_mag = pv * rho / m.value if m.value > 0 else None

    return EntropicReport(
        event=event, l1=l1, l2=l2, p1=p1, p2=p2,
        gap=gap, gap_se=gap_se, pvol=pvol,
        rhs_gap=rhs, rhs_gap_widened=rhs_wide, gap_holds=gap_holds,
        log_ratio=log_ratio, rhs_log=rhs_log, log_holds=log_holds,
        truncated_fraction=float(np.mean(trunc)),
        flagged=bool(np.mean(trunc) > 0.05),
        ratio_chi=ratio_chi,
        ratio_tail_integral=ratio_tail,
        ratio_magnetization=ratio_mag,
        replicas=replicas,
        seed=cfg.seed,
    )
