"""Demand families (circular demands, alpha-demands), FDS request graphs and circular shifts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .fds import (
    DEFAULT_CAP,
    CapExceededError,
    Demand,
    FdsStructure,
    UserSet,
    mask_of,
    popcount,
    require_valid,
    subsets_of_size,
)

BRUTE_FORCE_MAX_K = 6


class UserPermutation(tuple):
    """Ordering ``(u_1, ..., u_K)`` of the users; :meth:`position` is its inverse (1-based)."""

    def __new__(cls, users: Sequence[int]):
        users = tuple(int(k) for k in users)
        if sorted(users) != list(range(1, len(users) + 1)):
            raise ValueError(f"not a permutation of 1..{len(users)}: {users}")
        return super().__new__(cls, users)

    def position(self, k: int) -> int:
        return self.index(k) + 1

    def rotate(self, r: int) -> "UserPermutation":
        r %= len(self)
        return UserPermutation(self[r:] + self[:r])

    def window(self, start: int, length: int) -> int:
        """Mask of the ``length`` users from 1-based position ``start`` on, cyclically."""
        K = len(self)
        return mask_of(self[(start - 1 + i) % K] for i in range(length))


def circular_shifts(u: Sequence[int]) -> list[UserPermutation]:
    u = UserPermutation(u)
    return [u.rotate(r) for r in range(len(u))]


def count_shifts_with_k1_before_k2(u_hat: Sequence[int], k1: int, k2: int) -> int:
    """How many rotations of ``u_hat`` place ``k1`` before ``k2``: K minus their cyclic gap."""
    if k1 == k2:
        raise ValueError("k1 and k2 must differ")
    u = UserPermutation(u_hat)
    K = len(u)
    gap = (u.position(k2) - u.position(k1)) % K
    return K - gap


def is_circular_for(dm: Demand, alpha: int, u: Sequence[int]) -> bool:
    """Check that each user's class is itself plus the next alpha-1 users of ``u``."""
    u = UserPermutation(u)
    for pos, k in enumerate(u, start=1):
        if dm.d[k - 1] != u.window(pos, alpha):
            return False
    return True


def _witness_brute_force(s: FdsStructure, dm: Demand) -> UserPermutation | None:
    for rest in itertools.permutations(range(2, s.K + 1)):
        u = (1,) + rest
        if is_circular_for(dm, s.alpha, u):
            return UserPermutation(u)
    return None


def _witness_search(s: FdsStructure, dm: Demand) -> UserPermutation | None:
    # Depth-first extension of u from u_1 = 1. The successor of u_k must lie in
    # D_{u_k} \ {u_k}; each window is checked as soon as it is fully placed, so
    # for circular demands the successor is forced and the search is linear.
    K, alpha = s.K, s.alpha
    d = dm.d
    order = [1]
    used = 1

    def window_ok(pos: int) -> bool:
        # pos is 0-based; requires order[pos : pos + alpha] placed (non-wrapping)
        return d[order[pos] - 1] == mask_of(order[pos : pos + alpha])

    def extend() -> bool:
        nonlocal used
        n = len(order)
        if n == K:
            u = UserPermutation(order)
            return all(d[k - 1] == u.window(p, alpha) for p, k in enumerate(u, start=1))
        last = order[-1]
        cand = d[last - 1] & ~used if alpha >= 2 else ((1 << K) - 1) & ~used
        for k in range(2, K + 1):
            bit = 1 << (k - 1)
            if not cand & bit:
                continue
            order.append(k)
            used |= bit
            start = len(order) - alpha
            if (start < 0 or window_ok(start)) and extend():
                return True
            order.pop()
            used &= ~bit
        return False

    return UserPermutation(order) if extend() else None


def circular_witness(s: FdsStructure, dm: Demand) -> UserPermutation | None:
    """Lexicographically smallest u with u_1 = 1 making ``dm`` circular, or None."""
    require_valid(s, dm)
    if s.K <= BRUTE_FORCE_MAX_K:
        return _witness_brute_force(s, dm)
    return _witness_search(s, dm)


def count_circular_demands(s: FdsStructure) -> int:
    """f^K (K-1)!: one circular demand per canonical u and file-index vector."""
    count = s.f**s.K
    for i in range(2, s.K):
        count *= i
    return count


def circular_demand_for(s: FdsStructure, u: Sequence[int], fidx: Sequence[int]) -> Demand:
    u = UserPermutation(u)
    d = [0] * s.K
    for pos, k in enumerate(u, start=1):
        d[k - 1] = u.window(pos, s.alpha)
    return Demand(tuple(UserSet(c) for c in d), tuple(fidx))


def enumerate_circular_demands(
    s: FdsStructure, cap: int = DEFAULT_CAP
) -> Iterator[tuple[Demand, UserPermutation]]:
    """Yield (demand, canonical u) for every canonical u and file-index vector.

    For 2 <= alpha <= K-1 every circular demand appears exactly once. For
    alpha in {1, K} every valid demand is circular under every ordering, so the
    same demand recurs once per canonical u; the pairs are still what the
    averaged bound runs over.
    """
    required = count_circular_demands(s)
    if required > cap:
        raise CapExceededError("circular demands", required, cap)
    return _circular_pairs(s)


def _circular_pairs(s: FdsStructure) -> Iterator[tuple[Demand, UserPermutation]]:
    fvectors = list(itertools.product(range(1, s.f + 1), repeat=s.K))
    for rest in itertools.permutations(range(2, s.K + 1)):
        u = UserPermutation((1,) + rest)
        base = circular_demand_for(s, u, (1,) * s.K)
        for fv in fvectors:
            yield Demand(base.d, fv), u


def alpha_demand_witness(s: FdsStructure, dm: Demand) -> UserSet | None:
    """Smallest alpha-set whose members all request that very class with distinct file indices."""
    require_valid(s, dm)
    for group in subsets_of_size(s.all_users, s.alpha):
        members = [k for k in s.users if group >> (k - 1) & 1]
        if all(dm.d[k - 1] == group for k in members):
            if len({dm.fidx[k - 1] for k in members}) == len(members):
                return UserSet(group)
    return None


def make_alpha_demand(
    s: FdsStructure, group: UserSet | int, shared: UserSet | int | None = None
) -> Demand:
    """An alpha-demand on ``group`` whose outside users request ``shared`` plus themselves.

    Group members get file indices 1..alpha in user order; outside users
    request file 1 of class ``shared | {k}``. ``shared`` defaults to the
    alpha-1 smallest users of ``group``.
    """
    if s.f < s.alpha:
        raise ValueError(f"alpha-demands need f >= alpha, got f={s.f} < alpha={s.alpha}")
    group = int(group)
    if popcount(group) != s.alpha or group >> s.K:
        raise ValueError("group must be an alpha-subset of [K]")
    if shared is None:
        shared = next(iter(subsets_of_size(group, s.alpha - 1)))
    shared = int(shared)
    if popcount(shared) != s.alpha - 1 or shared & ~group:
        raise ValueError("shared must be an (alpha-1)-subset of group")
    d, fidx = [], []
    nxt = 1
    for k in s.users:
        bit = 1 << (k - 1)
        if group & bit:
            d.append(group)
            fidx.append(nxt)
            nxt += 1
        else:
            d.append(shared | bit)
            fidx.append(1)
    return Demand(tuple(UserSet(c) for c in d), tuple(fidx))


@dataclass(frozen=True)
class FdsRequestGraph:
    """Directed graph on users; ``adj[k-1]`` is the out-neighbour mask of user k."""

    adj: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.adj)

    def has_edge(self, k1: int, k2: int) -> bool:
        return bool(self.adj[k1 - 1] >> (k2 - 1) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [
            (k1, k2)
            for k1 in range(1, self.K + 1)
            for k2 in range(1, self.K + 1)
            if self.has_edge(k1, k2)
        ]

    def bidirectional_edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a, b in self.edges() if a < b and self.has_edge(b, a)]

    def is_complete(self) -> bool:
        full = (1 << self.K) - 1
        return all(m == full & ~(1 << i) for i, m in enumerate(self.adj))

    def relabel(self, perm: Sequence[int]) -> "FdsRequestGraph":
        """Graph with user k renamed ``perm[k-1]``."""
        adj = [0] * self.K
        for k1, k2 in self.edges():
            adj[perm[k1 - 1] - 1] |= 1 << (perm[k2 - 1] - 1)
        return FdsRequestGraph(tuple(adj))

    def is_isomorphic(self, other: "FdsRequestGraph") -> bool:
        if self.K != other.K:
            return False
        if self.K > BRUTE_FORCE_MAX_K:
            raise ValueError(f"isomorphism test is brute force, K <= {BRUTE_FORCE_MAX_K}")
        return any(
            self.relabel(perm) == other
            for perm in itertools.permutations(range(1, self.K + 1))
        )


def fds_request_graph(s: FdsStructure, dm: Demand) -> FdsRequestGraph:
    """Edge k1 -> k2 when the file requested by k1 is in the FDS of k2."""
    require_valid(s, dm)
    return FdsRequestGraph(
        tuple(int(dm.d[k - 1]) & ~(1 << (k - 1)) for k in s.users)
    )
