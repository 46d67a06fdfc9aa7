"""Information toolkit: Poisson KL closed form, the process-level KL bound,
Pinsker-variant and log-ratio event bounds, discrete KL, the stopped-sequence
KL identity, and the entropic right-hand sides."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from boolperc import (
    DecisionTree,
    FiniteLaw,
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

# ---------------------------------------------------------------------------
# Oracle: truncated pmf-sum KL between Poisson laws
# ---------------------------------------------------------------------------


def poisson_kl_pmf_sum(l1: float, l2: float) -> float:
    """Independent oracle: sum p_k log(p_k/q_k) over k until both pmfs drop
    below 1e-16."""
    total = 0.0
    k = 0
    while True:
        p = stats.poisson.pmf(k, l1)
        q = stats.poisson.pmf(k, l2)
        if p > 0:
            total += p * math.log(p / q)
        if k > max(l1, l2) and p < 1e-16 and q < 1e-16:
            return total
        k += 1
        if k > 10_000:  # pragma: no cover - safety net
            return total


# ---------------------------------------------------------------------------
# kl_poisson
# ---------------------------------------------------------------------------


def test_kl_poisson_equal_rates():
    assert kl_poisson(1.0, 1.0) == 0.0


def test_kl_poisson_one_two():
    oracle = poisson_kl_pmf_sum(1.0, 2.0)
    assert oracle == pytest.approx(1 - math.log(2), abs=1e-9)
    assert kl_poisson(1.0, 2.0) == pytest.approx(1 - math.log(2), abs=1e-12)


def test_kl_poisson_three_half():
    oracle = poisson_kl_pmf_sum(3.0, 0.5)
    expected = -2.5 + 3 * math.log(6.0)
    assert oracle == pytest.approx(expected, abs=1e-9)
    assert kl_poisson(3.0, 0.5) == pytest.approx(expected, abs=1e-12)


def test_kl_poisson_grid_vs_pmf_oracle():
    grid = [0.1, 0.5, 1.0, 2.0, 5.0]
    worst = 0.0
    for l1 in grid:
        for l2 in grid:
            worst = max(worst, abs(kl_poisson(l1, l2) - poisson_kl_pmf_sum(l1, l2)))
    assert worst <= 1e-9


@given(st.floats(0.01, 50), st.floats(0.01, 50))
def test_kl_poisson_nonneg_iff_equal(l1, l2):
    v = kl_poisson(l1, l2)
    assert v >= 0.0
    if l1 == l2:
        assert v == 0.0


def test_kl_poisson_rejects_nonpositive():
    with pytest.raises(ValueError):
        kl_poisson(0.0, 1.0)
    with pytest.raises(ValueError):
        kl_poisson(1.0, -2.0)


# ---------------------------------------------------------------------------
# kl_process_bound
# ---------------------------------------------------------------------------


def test_process_bound_equal_rates():
    assert kl_process_bound(3.0, 1.7, 1.7) == 0.0


def test_process_bound_values():
    assert kl_process_bound(1.0, 1.0, 2.0) == pytest.approx(0.5)
    assert kl_poisson(1.0, 2.0) <= 0.5
    assert kl_process_bound(2.5, 0.4, 0.9) == pytest.approx(2.5 * 0.25 / 0.9)
    assert kl_poisson(2.5 * 0.4, 2.5 * 0.9) <= 2.5 * 0.25 / 0.9


def test_process_bound_dominates_on_grid():
    masses = [0.2, 1.0, 2.5, 4.0, 8.0]
    rates = [0.1, 0.5, 1.0, 2.0, 5.0]
    for m in masses:
        for lx in rates:
            for ly in rates:
                assert kl_poisson(m * lx, m * ly) <= kl_process_bound(m, lx, ly) + 1e-12


# ---------------------------------------------------------------------------
# event bounds on finite laws (exhaustive over all events)
# ---------------------------------------------------------------------------


def random_law_pair(rng, k: int) -> tuple[FiniteLaw, FiniteLaw]:
    p = rng.dirichlet(np.ones(k))
    q = rng.dirichlet(np.ones(k))
    return FiniteLaw(tuple(p)), FiniteLaw(tuple(q))


def test_pinsker_values():
    assert pinsker_gap_bound(0.3, 0.4, 0.0) == 0.0
    assert pinsker_gap_bound(1.0, 1.0, 0.5) == pytest.approx(1.0)


def test_log_ratio_values():
    assert log_ratio_bound(1.0, 0.0) == pytest.approx(1.0)
    assert log_ratio_bound(0.25, 1.0) == pytest.approx(5.0)


def test_event_bounds_exhaustive_random_pairs():
    rng = np.random.default_rng(12345)
    n_pairs = 300
    for _ in range(n_pairs):
        k = int(rng.integers(2, 7))
        p, q = random_law_pair(rng, k)
        kl = kl_discrete(p, q)
        pv = np.asarray(p.probs)
        qv = np.asarray(q.probs)
        for mask in range(1, 2**k):
            sel = np.array([(mask >> i) & 1 for i in range(k)], dtype=bool)
            pa, qa = float(pv[sel].sum()), float(qv[sel].sum())
            assert abs(pa - qa) <= pinsker_gap_bound(pa, qa, kl) + 1e-12
            if pa > 0 and qa > 0:
                assert math.log(pa) - math.log(qa) <= log_ratio_bound(pa, kl) + 1e-12


def test_log_ratio_rejects_zero_probability():
    with pytest.raises(ValueError):
        log_ratio_bound(0.0, 1.0)


# ---------------------------------------------------------------------------
# kl_discrete
# ---------------------------------------------------------------------------


def test_kl_discrete_identical():
    assert kl_discrete((0.5, 0.5), (0.5, 0.5)) == 0.0


def test_kl_discrete_log2():
    assert kl_discrete((1.0, 0.0), (0.5, 0.5)) == pytest.approx(math.log(2))


def test_kl_discrete_absolute_continuity_failure():
    assert kl_discrete((0.5, 0.5), (1.0, 0.0)) == math.inf


def test_finite_law_normalization_enforced():
    with pytest.raises(ValueError):
        FiniteLaw((0.5, 0.6))


# ---------------------------------------------------------------------------
# stopped-sequence KL identity
# ---------------------------------------------------------------------------


def test_stopped_identity_stop_immediately():
    tree = DecisionTree(n=3, selector=lambda seen: 0, stop=lambda seen: True)
    xs = [FiniteLaw((0.5, 0.5))] * 3
    ys = [FiniteLaw((0.25, 0.75))] * 3
    rep = stopped_kl_identity_check(tree, xs, ys)
    assert rep.lhs == pytest.approx(0.0, abs=1e-12)
    assert rep.rhs == pytest.approx(0.0, abs=1e-12)
    assert rep.equal


def test_stopped_identity_full_reveal_tensorizes():
    xs = [FiniteLaw((0.5, 0.5)), FiniteLaw((0.2, 0.8)), FiniteLaw((0.7, 0.3))]
    ys = [FiniteLaw((0.4, 0.6)), FiniteLaw((0.5, 0.5)), FiniteLaw((0.9, 0.1))]
    tree = DecisionTree(n=3, selector=lambda seen: len(seen), stop=lambda seen: len(seen) == 3)
    rep = stopped_kl_identity_check(tree, xs, ys)
    expected = sum(kl_discrete(x.probs, y.probs) for x, y in zip(xs, ys))
    assert rep.lhs == pytest.approx(expected, abs=1e-9)
    assert rep.rhs == pytest.approx(expected, abs=1e-9)
    assert rep.equal


def test_stopped_identity_adaptive_tree():
    # component 1 (or 2) is revealed second depending on component 0's value
    def selector(seen):
        if len(seen) == 0:
            return 0
        return 1 if seen[0] == 0 else 2

    def stop(seen):
        return len(seen) == 2

    xs = [FiniteLaw((0.5, 0.5)), FiniteLaw((0.2, 0.8)), FiniteLaw((0.7, 0.3))]
    ys = [FiniteLaw((0.4, 0.6)), FiniteLaw((0.5, 0.5)), FiniteLaw((0.9, 0.1))]
    rep = stopped_kl_identity_check(tree := DecisionTree(3, selector, stop), xs, ys)
    assert rep.equal, (rep.lhs, rep.rhs)


def test_stopped_identity_adaptive_stopping():
    # stop early on a 0, else reveal everything
    def stop(seen):
        return (len(seen) > 0 and seen[-1] == 0) or len(seen) == 3

    tree = DecisionTree(3, selector=lambda seen: len(seen), stop=stop)
    xs = [FiniteLaw((0.3, 0.7)), FiniteLaw((0.6, 0.4)), FiniteLaw((0.5, 0.5))]
    ys = [FiniteLaw((0.5, 0.5)), FiniteLaw((0.2, 0.8)), FiniteLaw((0.8, 0.2))]
    rep = stopped_kl_identity_check(tree, xs, ys)
    assert rep.equal, (rep.lhs, rep.rhs)


def _replay_selector(n: int, salt: int):
    """Adaptive selector that never repeats: replay the choices made on the
    value prefix and pick from the remaining indices by a prefix hash."""

    def selector(seen: tuple) -> int:
        chosen: list[int] = []
        for step in range(len(seen) + 1):
            avail = [i for i in range(n) if i not in chosen]
            prefix = seen[:step]
            pick = avail[(sum(prefix) * 7 + len(prefix) + salt) % len(avail)]
            if step == len(seen):
                return pick
            chosen.append(pick)
        raise AssertionError("unreachable")

    return selector


def test_stopped_identity_many_random_instances():
    rng = np.random.default_rng(99)
    count = 0
    for trial in range(60):
        n = int(rng.integers(1, 5))
        sizes = [int(rng.integers(2, 5)) for _ in range(n)]
        xs = [FiniteLaw(_normed(rng, k)) for k in sizes]
        ys = [FiniteLaw(_normed(rng, k)) for k in sizes]
        stop_after = int(rng.integers(1, n + 1))

        def stop(seen, stop_after=stop_after, n=n):
            if len(seen) >= n:
                return True
            if len(seen) >= stop_after and sum(seen) % 3 == 0:
                return True
            return False

        tree = DecisionTree(n, _replay_selector(n, salt=trial), stop)
        rep = stopped_kl_identity_check(tree, xs, ys)
        assert rep.equal, (trial, rep.lhs, rep.rhs)
        count += 1
    assert count == 60


def _normed(rng, k: int) -> tuple[float, ...]:
    # strictly positive so both directions are absolutely continuous
    w = rng.uniform(0.05, 1.0, size=k)
    w = w / w.sum()
    return tuple(float(v) for v in w)


def test_run_decision_tree_padding():
    tree = DecisionTree(3, selector=lambda seen: len(seen), stop=lambda seen: len(seen) == 1)
    order, values = run_decision_tree(tree, (1, 0, 1))
    assert order == (0,)
    assert len(values) == 3
    assert values[0] == 1


def test_decision_tree_repeat_selection_rejected():
    tree = DecisionTree(2, selector=lambda seen: 0, stop=lambda seen: len(seen) == 2)
    with pytest.raises(ValueError):
        run_decision_tree(tree, (0, 1))


# ---------------------------------------------------------------------------
# entropic right-hand sides
# ---------------------------------------------------------------------------


def test_entropic_rhs_gap_values():
    assert entropic_rhs_gap(1.3, 1.3, 0.8, 4.0) == 0.0
    assert entropic_rhs_gap(1.0, 2.0, 1.0, 1.0) == pytest.approx(1.0)
    assert entropic_rhs_gap(0.6, 0.9, 0.3, 5.0) == pytest.approx(
        (0.3 / math.sqrt(0.9)) * math.sqrt(2 * 0.3 * 5.0)
    )
    assert entropic_rhs_gap(0.6, 0.9, 0.3, 5.0) == pytest.approx(0.5477, abs=5e-4)


def test_entropic_rhs_log_values():
    assert entropic_rhs_log(1.1, 1.1, 0.4, 3.0) == pytest.approx(1.0)
    assert entropic_rhs_log(1.0, 2.0, 0.5, 1.0) == pytest.approx(2.0)
    assert entropic_rhs_log(0.8, 1.0, 0.1, 10.0) == pytest.approx(5.0)


def test_entropic_rhs_log_rejects_zero():
    with pytest.raises(ValueError):
        entropic_rhs_log(1.0, 2.0, 0.0, 1.0)
