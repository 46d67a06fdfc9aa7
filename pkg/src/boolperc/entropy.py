"""Relative-entropy toolkit: Poisson KL, process-level bounds, and the
stopped-sequence KL identity for adaptive decision trees.

The quantitative backbone:

* ``kl_poisson(l1, l2) = l2 - l1 + l1 * log(l1 / l2)``;
* a product of Poisson components on a region of product-measure mass m with
  intensities lX vs lY has KL at most ``m * (lY - lX)^2 / lY``;
* for any event A, ``|P(A) - Q(A)| <= sqrt(2 max(P(A), Q(A)) KL(P||Q))`` and
  ``log P(A) - log Q(A) <= (KL(P||Q) + 1/e) / P(A) <= KL/P(A) + 1``;
* revealing independent components along an adaptive stopped decision tree
  loses nothing: the KL of the stopped revealed sequences equals the expected
  sum of per-component KLs over the components actually revealed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

DAGGER = "+"  # padding symbol for unrevealed coordinates of stopped sequences


def kl_poisson(l1: float, l2: float) -> float:
    """KL divergence between Poisson(l1) and Poisson(l2)."""
    if not (l1 > 0 and l2 > 0):
        raise ValueError("kl_poisson needs strictly positive intensities")
    return l2 - l1 + l1 * math.log(l1 / l2)


def kl_process_bound(mass: float, lam_x: float, lam_y: float) -> float:
    """Upper bound mass * (lY - lX)^2 / lY on the KL between two Poisson
    processes on a region of product-measure ``mass``; asserts it dominates
    the exact Poisson KL of the total counts."""
    if mass < 0:
        raise ValueError("mass must be >= 0")
    if not (lam_x > 0 and lam_y > 0):
        raise ValueError("intensities must be positive")
    bound = mass * (lam_y - lam_x) ** 2 / lam_y
    if mass > 0:
        exact = kl_poisson(mass * lam_x, mass * lam_y)
        assert exact <= bound * (1.0 + 1e-12) + 1e-15, (exact, bound)
    return bound


_PROB_SLACK = 1e-9  # tolerate summation round-off just past the endpoints


def _clamped_probability(v: float) -> float:
    if not (-_PROB_SLACK <= v <= 1.0 + _PROB_SLACK):
        raise ValueError("probabilities must lie in [0, 1]")
    return min(max(v, 0.0), 1.0)


def pinsker_gap_bound(p_a: float, q_a: float, kl: float) -> float:
    """sqrt(2 * max(p_a, q_a) * kl), the one-event total-variation bound."""
    p_a = _clamped_probability(p_a)
    q_a = _clamped_probability(q_a)
    if kl < 0:
        raise ValueError("kl must be >= 0")
    return math.sqrt(2.0 * max(p_a, q_a) * kl)


def log_ratio_bound(p_a: float, kl: float) -> float:
    """kl / p_a + 1, the bound on log p_a - log q_a."""
    p_a = _clamped_probability(p_a)
    if p_a <= 0.0:
        raise ValueError("p_a must lie in (0, 1]")
    if kl < 0:
        raise ValueError("kl must be >= 0")
    return kl / p_a + 1.0


@dataclass(frozen=True)
class FiniteLaw:
    """A probability vector on {0, ..., k-1}."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.probs:
            raise ValueError("finite law needs at least one outcome")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be >= 0")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")

    @property
    def support_size(self) -> int:
        return len(self.probs)


def kl_discrete(p: FiniteLaw | Sequence[float], q: FiniteLaw | Sequence[float]) -> float:
    """KL divergence between finite laws; +inf when p charges a q-null atom."""
    pp = p.probs if isinstance(p, FiniteLaw) else tuple(p)
    qq = q.probs if isinstance(q, FiniteLaw) else tuple(q)
    if len(pp) != len(qq):
        raise ValueError("finite laws must share a support size")
    total = 0.0
    for a, b in zip(pp, qq):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        total += a * math.log(a / b)
    return total


@dataclass(frozen=True)
class DecisionTree:
    """An adaptive reveal order over n independent components.

    ``selector(prefix)`` and ``stop(prefix)`` see only the tuple of values
    revealed so far, so the k-th choice depends on the first k-1 outcomes
    only.  Selected indices may not repeat.
    """

    n: int
    selector: Callable[[tuple[int, ...]], int]
    stop: Callable[[tuple[int, ...]], bool]


def run_decision_tree(tree: DecisionTree, outcome: Sequence[int]) -> tuple[tuple[int, ...], tuple]:
    """Reveal ``outcome`` along the tree; returns (revealed index order,
    stopped sequence padded with the dagger symbol to length n)."""
    if len(outcome) != tree.n:
        raise ValueError("outcome length must equal tree.n")
    revealed: list[int] = []
    order: list[int] = []
    while len(order) < tree.n and not tree.stop(tuple(revealed)):
        i = tree.selector(tuple(revealed))
        if not (0 <= i < tree.n) or i in order:
            raise ValueError(f"selector chose invalid or repeated index {i}")
        order.append(i)
        revealed.append(outcome[i])
    padded = tuple(revealed) + (DAGGER,) * (tree.n - len(revealed))
    return tuple(order), padded


@dataclass(frozen=True)
class StoppedKlReport:
    lhs: float  # KL between the pushforward laws of the stopped sequences
    rhs: float  # expected sum of per-component KLs over revealed components
    equal: bool
    tol: float


def stopped_kl_identity_check(
    tree: DecisionTree,
    components_x: Sequence[FiniteLaw],
    components_y: Sequence[FiniteLaw],
    tol: float = 1e-9,
) -> StoppedKlReport:
    """Brute-force check of the stopped-sequence KL identity.

    Enumerates every full outcome tuple under the product laws, pushes both
    forward through the tree (dagger-padded), and compares the KL of the two
    stopped-sequence laws with the expected revealed-component KL sum under X.
    """
    if tree.n > 4:
        raise ValueError("brute force requires n <= 4")
    if len(components_x) != tree.n or len(components_y) != tree.n:
        raise ValueError("need one component law per coordinate")
    for lx, ly in zip(components_x, components_y):
        if lx.support_size != ly.support_size or lx.support_size > 4:
            raise ValueError("component supports must match and have size <= 4")
        for a, b in zip(lx.probs, ly.probs):
            if (a > 0) != (b > 0):
                raise ValueError("component laws must be mutually absolutely continuous")

    comp_kl = [kl_discrete(lx, ly) for lx, ly in zip(components_x, components_y)]
    law_x: dict[tuple, float] = {}
    law_y: dict[tuple, float] = {}
    rhs = 0.0
    supports = [range(l.support_size) for l in components_x]
    for outcome in itertools.product(*supports):
        wx = math.prod(components_x[i].probs[v] for i, v in enumerate(outcome))
        wy = math.prod(components_y[i].probs[v] for i, v in enumerate(outcome))
        order, padded = run_decision_tree(tree, outcome)
        law_x[padded] = law_x.get(padded, 0.0) + wx
        law_y[padded] = law_y.get(padded, 0.0) + wy
        rhs += wx * sum(comp_kl[i] for i in order)

    lhs = 0.0
    for seq, px in law_x.items():
        if px == 0.0:
            continue
        py = law_y.get(seq, 0.0)
        if py == 0.0:
            lhs = math.inf
            break
        lhs += px * math.log(px / py)

    equal = math.isfinite(lhs) and math.isfinite(rhs) and abs(lhs - rhs) <= tol
    return StoppedKlReport(lhs=lhs, rhs=rhs, equal=equal, tol=tol)


def entropic_rhs_gap(l1: float, l2: float, max_prob: float, expected_pvol: float) -> float:
    """Right side of the probability-gap bound:
    |l2 - l1| / sqrt(l2) * sqrt(2 * max_prob * expected_pvol)."""
    if not (l1 > 0 and l2 > 0):
        raise ValueError("intensities must be positive")
    if not (0.0 <= max_prob <= 1.0):
        raise ValueError("max_prob must lie in [0, 1]")
    if expected_pvol < 0:
        raise ValueError("expected_pvol must be >= 0")
    return abs(l2 - l1) / math.sqrt(l2) * math.sqrt(2.0 * max_prob * expected_pvol)


def entropic_rhs_log(l1: float, l2: float, p1: float, expected_pvol: float) -> float:
    """Right side of the log-ratio bound:
    (l2 - l1)^2 / l2 * expected_pvol / p1 + 1."""
    if not (l1 > 0 and l2 > 0):
        raise ValueError("intensities must be positive")
    if not (0.0 < p1 <= 1.0):
        raise ValueError("p1 must lie in (0, 1]")
    if expected_pvol < 0:
        raise ValueError("expected_pvol must be >= 0")
    return (l2 - l1) ** 2 / l2 * expected_pvol / p1 + 1.0
