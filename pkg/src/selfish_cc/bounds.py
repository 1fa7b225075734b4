"""Closed-form load bounds, baselines, coding gains and the memory LP, all in exact rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .fds import FdsStructure, binom


def _check(K: int, alpha: int, t: int) -> None:
    if not (1 <= alpha <= K and 0 <= t <= alpha):
        raise ValueError(f"need 0 <= t <= alpha <= K and alpha >= 1, got K={K}, alpha={alpha}, t={t}")


def r_lb(K: int, alpha: int, t: int) -> Fraction:
    """Lower bound on the worst-case load under selfish uncoded placement at redundancy t."""
    _check(K, alpha, t)
    return Fraction(binom(alpha, t + 1) + (K - alpha) * binom(alpha - 1, t), binom(alpha, t))


def r_lb_factored(K: int, alpha: int, t: int) -> Fraction:
    """Same value as :func:`r_lb`, written through gamma = t/K and gamma_alpha = t/alpha."""
    _check(K, alpha, t)
    gamma = Fraction(t, K)
    gamma_a = Fraction(t, alpha)
    return K * (1 - gamma_a) * ((K - alpha) * gamma + 1) / (K * gamma + 1)


def r_man(K: int, t: int) -> Fraction:
    if not 0 <= t <= K:
        raise ValueError(f"t={t} outside [0, {K}]")
    return Fraction(K - t, t + 1)


class UncodedLoads(NamedTuple):
    unselfish: Fraction
    selfish: Fraction


def uncoded_loads(K: int, alpha: int, t: int) -> UncodedLoads:
    """Uncoded delivery: K(1 - gamma) without and K(1 - gamma_alpha) with selfish placement."""
    _check(K, alpha, t)
    return UncodedLoads(Fraction(K - t), K - Fraction(K * t, alpha))


class TradeoffPoint(NamedTuple):
    t: int
    M: Fraction
    load: Fraction


@dataclass(frozen=True)
class LowerBoundCurve:
    """Corner points of the piecewise-linear lower bound; :meth:`eval_at` interpolates."""

    structure: FdsStructure
    points: tuple[TradeoffPoint, ...]

    def eval_at(self, M: Fraction | int) -> Fraction:
        M = Fraction(M)
        top = self.points[-1].M
        if not 0 <= M <= top:
            raise ValueError(f"M={M} outside [0, {top}]")
        for a, b in zip(self.points, self.points[1:]):
            if a.M <= M <= b.M:
                return a.load + (b.load - a.load) * (M - a.M) / (b.M - a.M)
        raise AssertionError("unreachable: alpha >= 1 gives at least two corners")


def r_lb_curve(s: FdsStructure) -> LowerBoundCurve:
    pts = tuple(TradeoffPoint(t, s.memory(t), r_lb(s.K, s.alpha, t)) for t in range(s.alpha + 1))
    return LowerBoundCurve(s, pts)


def ratio_to_man(K: int, alpha: int, t: int) -> Fraction:
    """r_lb / r_man in closed form; at least 1 on [0, alpha-1]."""
    if not (1 <= alpha <= K - 1 and 0 <= t <= alpha - 1):
        raise ValueError(f"need 1 <= alpha <= K-1 and 0 <= t <= alpha-1, got K={K}, alpha={alpha}, t={t}")
    return 1 + Fraction(t * (K - alpha) * (alpha - 1 - t), alpha * (K - t))


class GainSummary(NamedTuple):
    bound: Fraction
    deterioration: Fraction
    limit: Fraction | None  # None when alpha == K (no finite asymptote)


def coding_gain_bound(K: int, alpha: int, gamma: Fraction | int) -> GainSummary:
    """Selfish coding gain bound (K gamma + 1)/((K - alpha) gamma + 1) and its K/(K - alpha) ceiling."""
    gamma = Fraction(gamma)
    if not 1 <= alpha <= K:
        raise ValueError(f"alpha={alpha} outside [1, {K}]")
    if not 0 <= gamma <= Fraction(alpha, K):
        raise ValueError(f"gamma={gamma} outside [0, alpha/K]")
    D = (K - alpha) * gamma + 1
    limit = Fraction(K, K - alpha) if alpha < K else None
    return GainSummary((K * gamma + 1) / D, D, limit)


def f_coefficient(K: int, alpha: int, t: int) -> Fraction:
    """Coefficient of x_t in the averaged bound, in closed form."""
    return r_lb(K, alpha, t)


def _farthest_count(ell: int, t: int) -> int:
    # Number of t-subsets of the first ell users after the owner that include
    # the ell-th one. With t = 0 only the empty tag exists and it is counted at ell = 0.
    if t == 0:
        return 1 if ell == 0 else 0
    return binom(ell - 1, t - 1)


def f_coefficient_sum(K: int, alpha: int, t: int) -> Fraction:
    """Coefficient of x_t as the sum over the position of a tag's farthest user."""
    _check(K, alpha, t)
    total = sum(_farthest_count(ell, t) * (K - ell) for ell in range(t, alpha))
    return Fraction(total, binom(alpha, t))


def c_coefficient(s: FdsStructure, t: int) -> Fraction:
    """c_t = f(t)/N: per-subfile weight of size-t tags in the averaged bound."""
    return f_coefficient_sum(s.K, s.alpha, t) / s.N


def lp_lower_bound(s: FdsStructure, M: Fraction | int) -> Fraction:
    """Minimum of sum f(t) x_t with sum x_t = 1, sum t x_t <= KM/N, x >= 0.

    f is convex and decreasing, so the optimum is f interpolated at KM/N.
    """
    M = Fraction(M)
    if not 0 <= M <= s.fds_size:
        raise ValueError(f"M={M} outside [0, {s.fds_size}]")
    tau = s.K * M / s.N
    lo = min(int(tau), s.alpha)
    if lo == tau or lo == s.alpha:
        return f_coefficient(s.K, s.alpha, lo)
    a, b = f_coefficient(s.K, s.alpha, lo), f_coefficient(s.K, s.alpha, lo + 1)
    return a + (b - a) * (tau - lo)


def lp_vertex_enumeration(s: FdsStructure, M: Fraction | int) -> Fraction:
    """Same LP solved by trying every basic solution with at most two nonzero x_t."""
    M = Fraction(M)
    if not 0 <= M <= s.fds_size:
        raise ValueError(f"M={M} outside [0, {s.fds_size}]")
    tau = s.K * M / s.N
    coef = [f_coefficient_sum(s.K, s.alpha, t) for t in range(s.alpha + 1)]
    best = None
    for i in range(s.alpha + 1):
        if i <= tau:
            best = coef[i] if best is None else min(best, coef[i])
        for j in range(i + 1, s.alpha + 1):
            # both constraints tight: x_i + x_j = 1, i x_i + j x_j = tau
            xj = (tau - i) / (j - i)
            if 0 <= xj <= 1:
                val = (1 - xj) * coef[i] + xj * coef[j]
                best = val if best is None else min(best, val)
    assert best is not None  # x_0 = 1 is always feasible
    return best
