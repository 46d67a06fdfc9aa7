"""Shared fixtures: hypothesis profile and the session-wide critical-intensity
estimate for the d=2, Dirac(0.5) reference model used across slow tests."""
from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from boolperc import FieldConfig, RadiusLaw, find_lambda_c

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Reference model for the slow statistical tests: d=2, radii fixed at 0.5.
REF_SEED = 20260814
REF_MU = RadiusLaw.dirac(0.5)

_LAMC_CACHE_KEY = "boolperc/lambda_c_half/v1"


@pytest.fixture(scope="session")
def lambda_c_half(request) -> float:
    """Estimated critical intensity for d=2, Dirac(0.5), computed once per
    session with a fixed seed (deterministic, so caching it is safe)."""
    cached = request.config.cache.get(_LAMC_CACHE_KEY, None)
    if cached is not None:
        return float(cached)
    cfg = FieldConfig(dimension=2, lam=0.0, mu=REF_MU, seed=REF_SEED)
    result = find_lambda_c(
        cfg, R_ladder=(8.0, 16.0), tolerance=0.02, replicas_per_eval=400
    )
    value = float(result.estimate)
    request.config.cache.set(_LAMC_CACHE_KEY, value)
    return value
