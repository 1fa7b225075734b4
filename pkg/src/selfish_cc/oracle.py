"""Brute-force converse machinery: side-information graphs, acyclic sets and circular-demand averaging.

A vertex is a pair (owner, subfile). Two users that happen to request the same
file give two vertices for one subfile; bounds count each subfile once.
"""

from __future__ import annotations

import heapq
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .bounds import f_coefficient, _farthest_count
from .demands import (
    UserPermutation,
    alpha_demand_witness,
    circular_demand_for,
    circular_shifts,
    count_circular_demands,
    enumerate_circular_demands,
)
from .fds import (
    DEFAULT_CAP,
    CapExceededError,
    Demand,
    FdsStructure,
    all_subsets,
    binom,
    popcount,
    require_valid,
    subsets_of_size,
    users_of,
)
from .placement import SELFISH, Placement, SubfileId, desired_subfiles


class Vertex(NamedTuple):
    owner: int
    subfile: SubfileId


@dataclass(frozen=True)
class SideInfoGraph:
    """Index-coding graph: edge v1 -> v2 iff the owner of v2 caches v1's subfile."""

    vertices: tuple[Vertex, ...]
    edges: frozenset[tuple[int, int]]  # vertex positions
    size: Fraction  # per-subfile size in file units

    def successors(self, i: int) -> list[int]:
        return sorted(j for a, j in self.edges if a == i)

    def induced(self, keep: Iterable[int]) -> "SideInfoGraph":
        keep = sorted(set(keep))
        pos = {v: n for n, v in enumerate(keep)}
        edges = frozenset((pos[a], pos[b]) for a, b in self.edges if a in pos and b in pos)
        return SideInfoGraph(tuple(self.vertices[i] for i in keep), edges, self.size)


def side_info_graph(p: Placement, dm: Demand) -> SideInfoGraph:
    require_valid(p.structure, dm)
    verts = tuple(
        Vertex(k, sf) for k in p.structure.users for sf in desired_subfiles(p, dm, k)
    )
    edges = frozenset(
        (i, j)
        for i, v1 in enumerate(verts)
        for j, v2 in enumerate(verts)
        if i != j and p.caches(v2.owner, v1.subfile)
    )
    return SideInfoGraph(verts, edges, Fraction(1, p.subpacketization))


def graph_topological_order(g: SideInfoGraph) -> list[int] | None:
    """Kahn's algorithm on explicit edges; smallest ready vertex first. None on a cycle."""
    indeg = [0] * len(g.vertices)
    succ: list[list[int]] = [[] for _ in g.vertices]
    for a, b in sorted(g.edges):
        indeg[b] += 1
        succ[a].append(b)
    ready = [i for i, d in enumerate(indeg) if d == 0]
    order = []
    while ready:
        ready.sort(reverse=True)
        i = ready.pop()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return order if len(order) == len(g.vertices) else None


# Vertices of a selfish side-information graph sharing an owner have the same
# in-neighbours (every vertex whose tag holds that owner), so Kahn's algorithm
# only needs one in-degree per user.


def topological_order(vertices: Sequence[tuple[int, int]]) -> list[int] | None:
    """Order (owner, tag mask) vertices so every edge points forward, or None on a cycle.

    Edge v1 -> v2 iff owner(v2) is in tag(v1). Deterministic: among ready
    vertices the lowest position goes first.
    """
    indeg: dict[int, int] = {}
    by_owner: dict[int, list[int]] = {}
    for i, (owner, _) in enumerate(vertices):
        indeg.setdefault(owner, 0)
        by_owner.setdefault(owner, []).append(i)
    for _, tag in vertices:
        for k in users_of(tag):
            if k in indeg:
                indeg[k] += 1
    ready = [i for k, d in indeg.items() if d == 0 for i in by_owner[k]]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for k in users_of(vertices[i][1]):
            if k in indeg:
                indeg[k] -= 1
                if indeg[k] == 0:
                    for j in by_owner[k]:
                        heapq.heappush(ready, j)
    return order if len(order) == len(vertices) else None


def is_acyclic(vertices: Sequence[tuple[int, int]]) -> bool:
    return _acyclic_masks(vertices, None)


def _acyclic_masks(vertices: Sequence[tuple[int, int]], members: list[list[int]] | None) -> bool:
    # layer-by-layer Kahn: drop every vertex of every ready owner at once
    split = members.__getitem__ if members is not None else users_of
    indeg: dict[int, int] = {}
    by_owner: dict[int, list[int]] = {}
    for owner, tag in vertices:
        indeg.setdefault(owner, 0)
        by_owner.setdefault(owner, []).append(tag)
    for _, tag in vertices:
        for k in split(tag):
            if k in indeg:
                indeg[k] += 1
    left = set(by_owner)
    while left:
        ready = [k for k in left if indeg[k] == 0]
        if not ready:
            return False
        for k in ready:
            left.discard(k)
            for tag in by_owner[k]:
                for j in split(tag):
                    if j in indeg:
                        indeg[j] -= 1
    return True


def acyclic_set(dm: Demand, u: Sequence[int], t: int | None = None) -> list[Vertex]:
    """Vertices W[f_uk, D_uk, T] with T inside D_uk and avoiding u_1..u_k, for each k.

    ``t`` restricts to tags of that size; None keeps every size (the general split).
    """
    u = UserPermutation(u)
    if len(u) != dm.K:
        raise ValueError("permutation length differs from the number of users")
    out = []
    seen = 0
    for k in u:
        seen |= 1 << (k - 1)
        cls = int(dm.d[k - 1])
        free = cls & ~seen
        tags = sorted(all_subsets(free)) if t is None else list(subsets_of_size(free, t))
        out.extend(Vertex(k, SubfileId(dm.fidx[k - 1], cls, tag)) for tag in tags)
    return out


def _as_pairs(vertices: Iterable[Vertex]) -> list[tuple[int, int]]:
    return [(v.owner, v.subfile.tag) for v in vertices]


def index_coding_bound(p: Placement, dm: Demand, u: Sequence[int]) -> Fraction:
    """Total size of the distinct subfiles in the acyclic set for ``u``, in file units."""
    if p.kind != SELFISH:
        raise ValueError("the acyclic-set bound here is for the selfish MAN-style placement")
    require_valid(p.structure, dm)
    verts = acyclic_set(dm, u, p.t)
    if not is_acyclic(_as_pairs(verts)):
        raise AssertionError(f"acyclic set for u={tuple(u)} has a cycle")
    return Fraction(len({v.subfile for v in verts}), p.subpacketization)


@dataclass(frozen=True)
class GeneralPlacementProfile:
    """Aggregated sizes x_t of the 2^alpha-way split: x_t is the fraction of each
    file's class stored on tags of size t, summed over those tags."""

    x: tuple[Fraction, ...]

    def __post_init__(self):
        x = tuple(Fraction(v) for v in self.x)
        object.__setattr__(self, "x", x)
        if any(v < 0 for v in x) or sum(x) != 1:
            raise ValueError("x_t must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, alpha: int, t: int) -> "GeneralPlacementProfile":
        return cls(tuple(Fraction(int(i == t)) for i in range(alpha + 1)))

    def memory(self, s: FdsStructure) -> Fraction:
        """Cache size per user in file units implied by the profile."""
        return Fraction(s.N, s.K) * sum(t * v for t, v in enumerate(self.x))

    def averaged_bound(self, s: FdsStructure) -> Fraction:
        if len(self.x) != s.alpha + 1:
            raise ValueError("profile length must be alpha + 1")
        return sum((f_coefficient(s.K, s.alpha, t) * v for t, v in enumerate(self.x)), Fraction(0))


# ------------------------------------------------------- circular sweep ----


class SweepResult(NamedTuple):
    structure: FdsStructure
    bounds: int  # number of (demand, shift) pairs
    vertex_totals: tuple[int, ...]  # distinct subfiles per tag size, summed over all bounds
    cyclic: int  # acyclic-set check failures

    def average(self, t: int) -> Fraction:
        return Fraction(self.vertex_totals[t], self.bounds * binom(self.structure.alpha, t))


def _sweep_chunk(args: tuple[FdsStructure, list[tuple[int, ...]]]) -> tuple[int, list[int], int]:
    # Inner loop on bare masks; equivalent to acyclic_set(dm, v) + is_acyclic per shift.
    s, perms = args
    K, alpha = s.K, s.alpha
    totals = [0] * (alpha + 1)
    count = cyclic = 0
    members = [users_of(m) for m in range(1 << K)]
    subs = [sorted(all_subsets(m)) for m in range(1 << K)]
    sizes = [popcount(m) for m in range(1 << K)]
    fvectors = list(itertools.product(range(1, s.f + 1), repeat=K))
    for perm in perms:
        d = [int(c) for c in circular_demand_for(s, perm, (1,) * K).d]
        for shift in circular_shifts(perm):
            seen = 0
            verts: list[tuple[int, int]] = []
            for k in shift:
                seen |= 1 << (k - 1)
                verts.extend((k, tag) for tag in subs[d[k - 1] & ~seen])
            if not _acyclic_masks(verts, members):
                cyclic += len(fvectors)
            for fv in fvectors:
                distinct = {(fv[k - 1], d[k - 1], tag) for k, tag in verts}
                for _, _, tag in distinct:
                    totals[sizes[tag]] += 1
            count += len(fvectors)
    return count, totals, cyclic


def worker_count() -> int:
    env = os.environ.get("SELFISH_CC_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("SELFISH_CC_THREADS must be positive")
        return n
    return 1


def circular_sweep(s: FdsStructure, cap: int = DEFAULT_CAP, workers: int | None = None) -> SweepResult:
    """Run the general acyclic set over every circular demand and each of its K shifts.

    Bucketing vertices by tag size gives every uniform split's bound in one pass.
    """
    required = count_circular_demands(s) * s.K
    if required > cap:
        raise CapExceededError("circular bounds", required, cap)
    return _cached_sweep(s, workers or worker_count())


@lru_cache(maxsize=64)
def _cached_sweep(s: FdsStructure, workers: int) -> SweepResult:
    perms = [(1,) + rest for rest in itertools.permutations(range(2, s.K + 1))]
    if workers <= 1 or len(perms) < 2:
        parts = [_sweep_chunk((s, perms))]
    else:
        size = math.ceil(len(perms) / workers)
        chunks = [(s, perms[i : i + size]) for i in range(0, len(perms), size)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_sweep_chunk, chunks))
    count = cyclic = 0
    totals = [0] * (s.alpha + 1)
    for c, tot, cy in parts:
        count += c
        cyclic += cy
        totals = [a + b for a, b in zip(totals, tot)]
    return SweepResult(s, count, tuple(totals), cyclic)


def circular_bound_total(s: FdsStructure, t: int, cap: int = DEFAULT_CAP) -> tuple[Fraction, int]:
    """(sum of the index-coding bounds, number of bounds) over circular demands and shifts."""
    if not 0 <= t <= s.alpha:
        raise ValueError(f"t={t} outside [0, {s.alpha}]")
    r = circular_sweep(s, cap)
    return Fraction(r.vertex_totals[t], binom(s.alpha, t)), r.bounds


def averaged_circular_bound(s: FdsStructure, t: int, cap: int = DEFAULT_CAP) -> Fraction:
    total, n = circular_bound_total(s, t, cap)
    return total / n


def averaged_circular_bound_direct(s: FdsStructure, t: int, cap: int = DEFAULT_CAP) -> tuple[Fraction, int]:
    """Slow path: one :func:`index_coding_bound` call per (demand, shift). Returns (average, count)."""
    p = Placement(s, t)
    total = Fraction(0)
    n = 0
    for dm, u in enumerate_circular_demands(s, cap):
        for v in circular_shifts(u):
            total += index_coding_bound(p, dm, v)
            n += 1
    return total / n, n


def subfile_appearance_count(s: FdsStructure, t: int, witness: SubfileId, cap: int = DEFAULT_CAP) -> int:
    """How often ``witness`` sits in the size-t acyclic sets over all circular demands and shifts."""
    n = 0
    for dm, u in enumerate_circular_demands(s, cap):
        for v in circular_shifts(u):
            n += sum(1 for x in acyclic_set(dm, v, t) if x.subfile == witness)
    return n


def appearance_count_formula(s: FdsStructure, t: int) -> int:
    """(alpha - t) * sum_l a_l (K - l) with a_l = t!(alpha-1-t)!(K-alpha)! * C(l-1, t-1) * f^(K-1)."""
    K, alpha, f = s.K, s.alpha, s.f
    if not 0 <= t <= alpha:
        raise ValueError(f"t={t} outside [0, {alpha}]")
    base = math.factorial(t) * math.factorial(alpha - 1 - t) * math.factorial(K - alpha) if t < alpha else 0
    return (alpha - t) * sum(
        base * _farthest_count(ell, t) * f ** (K - 1) * (K - ell) for ell in range(t, alpha)
    )


# ---------------------------------------------------- alpha-demand converse ----


def alpha_demand_converse(p: Placement, dm: Demand) -> Fraction:
    """Acyclic-set bound for one alpha-demand under the fixed selfish placement.

    Outside users contribute all their desired subfiles, the group its MAN-style
    nested sets along sorted order; the union is checked for cycles.
    """
    if p.kind != SELFISH:
        raise ValueError("needs the selfish MAN-style placement")
    s = p.structure
    if s.f < s.alpha:
        raise ValueError(f"alpha-demands need f >= alpha, got f={s.f}")
    group = alpha_demand_witness(s, dm)
    if group is None:
        raise ValueError(f"{dm} is not an alpha-demand")
    verts: list[Vertex] = []
    for k in s.users:
        if not group >> (k - 1) & 1:
            verts.extend(Vertex(k, sf) for sf in desired_subfiles(p, dm, k))
    seen = 0
    for k in users_of(group):
        seen |= 1 << (k - 1)
        for tag in subsets_of_size(group & ~seen, p.t):
            verts.append(Vertex(k, SubfileId(dm.fidx[k - 1], int(group), tag)))
    if not is_acyclic(_as_pairs(verts)):
        raise ValueError("outside users' requests give a cyclic vertex set; pick D_k = S + {k}")
    return Fraction(len({v.subfile for v in verts}), p.subpacketization)
