"""boolperc: a simulation laboratory for Poisson-Boolean continuum percolation.

Lazy, reproducible sampling of the occupied set, cone-guided adaptive
revealment of cluster events, estimators for the one-arm probability,
susceptibility, volume tails and magnetization, and an entropy toolkit for
comparing revealment distributions at nearby intensities.
"""
from .distributions import (
    MomentConditionError,
    MomentReport,
    RadiusLaw,
    cone_pvol,
    cone_pvol_constant,
    expectation,
    validate_conditions,
)
from .entropy import (
    DecisionTree,
    FiniteLaw,
    StoppedKlReport,
    entropic_rhs_gap,
    entropic_rhs_log,
    kl_discrete,
    kl_poisson,
    kl_process_bound,
    log_ratio_bound,
    pinsker_gap_bound,
    run_decision_tree,
    stopped_kl_identity_check,
)
from .experiments import (
    CheckerConfig,
    CoupledSweep,
    EntropicReport,
    Estimate,
    ExponentFit,
    LambdaCResult,
    NonBracketingError,
    TailReport,
    TheoremReport,
    VolumeSamples,
    check_entropic_bound,
    check_theorem_magnetization,
    check_theorem_susceptibility,
    check_theorem_tail,
    coupled_sweep,
    estimate_chi,
    estimate_magnetization,
    estimate_tail,
    estimate_theta,
    find_lambda_c,
    fit_exponent,
    run_replicas,
    sample_cluster_volumes,
)
from .experiments import resolve_workers
from .explorer import (
    Cluster,
    StopArm,
    StopBallCap,
    StopNone,
    StopVolume,
    VolumeComparisonReport,
    VolumeEstimate,
    explore_cluster,
    good_cube_event,
    points_in_union,
    union_volume,
    volume_comparison_diagnostic,
)
from .field import (
    FieldConfig,
    GhostField,
    RevealedHypercube,
    WindowSample,
    band_mass,
    derive_seed,
    expected_window_count,
    require_weak_condition,
    reveal,
    reveal_box,
    sample_ghost,
    sample_window,
    substream,
    thin,
    window_tail_bound,
)
from .geometry import (
    Ball,
    ConeBase,
    HypercubeIndex,
    balls_intersect,
    cone_gap_sq,
    cube_ball_minkowski_volume,
    cubes_intersecting_ball,
    dilated_union_volume,
    enumerate_hypercubes,
    hypercube_intersects_cone,
    supnorm,
    unit_ball_volume,
)
from .revealment import (
    DeterminationCheck,
    EventSpec,
    GhostConnection,
    OneArm,
    RevealmentTrace,
    VolumeAtLeast,
    cluster_of_balls,
    event_holds,
    local_determination_check,
    run_template,
)

__all__ = [
    "Ball",
    "CheckerConfig",
    "Cluster",
    "ConeBase",
    "CoupledSweep",
    "DecisionTree",
    "DeterminationCheck",
    "EntropicReport",
    "Estimate",
    "EventSpec",
    "ExponentFit",
    "FieldConfig",
    "FiniteLaw",
    "GhostConnection",
    "GhostField",
    "HypercubeIndex",
    "LambdaCResult",
    "MomentConditionError",
    "MomentReport",
    "NonBracketingError",
    "OneArm",
    "RadiusLaw",
    "RevealedHypercube",
    "RevealmentTrace",
    "StopArm",
    "StopBallCap",
    "StopNone",
    "StopVolume",
    "StoppedKlReport",
    "TailReport",
    "TheoremReport",
    "VolumeAtLeast",
    "VolumeComparisonReport",
    "VolumeEstimate",
    "VolumeSamples",
    "WindowSample",
    "balls_intersect",
    "band_mass",
    "cluster_of_balls",
    "check_entropic_bound",
    "check_theorem_magnetization",
    "check_theorem_susceptibility",
    "check_theorem_tail",
    "cone_gap_sq",
    "cone_pvol",
    "cone_pvol_constant",
    "coupled_sweep",
    "cube_ball_minkowski_volume",
    "cubes_intersecting_ball",
    "derive_seed",
    "dilated_union_volume",
    "entropic_rhs_gap",
    "entropic_rhs_log",
    "enumerate_hypercubes",
    "estimate_chi",
    "estimate_magnetization",
    "estimate_tail",
    "estimate_theta",
    "event_holds",
    "expectation",
    "expected_window_count",
    "explore_cluster",
    "find_lambda_c",
    "fit_exponent",
    "good_cube_event",
    "hypercube_intersects_cone",
    "kl_discrete",
    "kl_poisson",
    "kl_process_bound",
    "local_determination_check",
    "log_ratio_bound",
    "pinsker_gap_bound",
    "points_in_union",
    "require_weak_condition",
    "resolve_workers",
    "reveal",
    "reveal_box",
    "run_decision_tree",
    "run_replicas",
    "run_template",
    "sample_cluster_volumes",
    "sample_ghost",
    "sample_window",
    "stopped_kl_identity_check",
    "substream",
    "supnorm",
    "thin",
    "union_volume",
    "unit_ball_volume",
    "validate_conditions",
    "volume_comparison_diagnostic",
    "window_tail_bound",
]

__version__ = "0.1.0"
