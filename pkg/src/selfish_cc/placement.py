"""Uncoded cache placements: the selfish MAN-style split and the unselfish MAN baseline."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal, NamedTuple

from .fds import (
    Demand,
    FdsStructure,
    FileRef,
    binom,
    popcount,
    require_valid,
    set_label,
    subsets_of_size,
)

SELFISH = "selfish-MAN"
UNSELFISH = "unselfish-MAN"
PlacementKind = Literal["selfish-MAN", "unselfish-MAN"]


class SubfileId(NamedTuple):
    """Piece ``W[index, cls, tag]``: the part of file (index, cls) cached by users in ``tag``."""

    index: int
    cls: int
    tag: int

    @property
    def file(self) -> FileRef:
        return FileRef(self.cls, self.index)

    def __str__(self) -> str:
        return f"W[{self.index},{set_label(self.cls)},{set_label(self.tag)}]"


@dataclass(frozen=True)
class Placement:
    """A MAN-style placement with redundancy ``t``.

    Cache contents are implicit: membership is decided from the tag, and
    :meth:`cache` materialises one user's cache only on request.
    """

    structure: FdsStructure
    t: int
    kind: PlacementKind = SELFISH

    def __post_init__(self):
        top = self.structure.alpha if self.kind == SELFISH else self.structure.K
        if self.kind not in (SELFISH, UNSELFISH):
            raise ValueError(f"unknown placement kind {self.kind!r}")
        if not 0 <= self.t <= top:
            raise ValueError(f"t={self.t} outside [0, {top}] for {self.kind}")

    @property
    def subpacketization(self) -> int:
        s = self.structure
        return binom(s.alpha if self.kind == SELFISH else s.K, self.t)

    @property
    def memory(self) -> Fraction:
        return self.structure.memory(self.t)

    def tag_universe(self, cls: int) -> int:
        return cls if self.kind == SELFISH else int(self.structure.all_users)

    def subfiles_of(self, file: FileRef) -> list[SubfileId]:
        return [
            SubfileId(file.index, file.cls, tag)
            for tag in subsets_of_size(self.tag_universe(file.cls), self.t)
        ]

    def is_subfile(self, sf: SubfileId) -> bool:
        s = self.structure
        return (
            1 <= sf.index <= s.f
            and popcount(sf.cls) == s.alpha
            and not sf.cls >> s.K
            and popcount(sf.tag) == self.t
            and sf.tag & ~self.tag_universe(sf.cls) == 0
        )

    def caches(self, k: int, sf: SubfileId) -> bool:
        """Whether user ``k`` stores subfile ``sf``."""
        bit = 1 << (k - 1)
        if self.kind == SELFISH:
            return bool(sf.cls & sf.tag & bit)
        return bool(sf.tag & bit)

    def cache(self, k: int) -> frozenset[SubfileId]:
        """Materialised cache of user ``k``."""
        self.structure.check_user(k)
        return frozenset(
            sf
            for file in self.structure.files()
            for sf in self.subfiles_of(file)
            if self.caches(k, sf)
        )

    def cache_map(self) -> dict[int, frozenset[SubfileId]]:
        return {k: self.cache(k) for k in self.structure.users}


def selfish_man_placement(s: FdsStructure, t: int) -> Placement:
    """Split each file into binom(alpha, t) parts tagged by t-subsets of its class."""
    if not 0 <= t <= s.alpha:
        raise ValueError(f"t={t} outside [0, {s.alpha}]")
    return Placement(s, t, SELFISH)


def unselfish_man_placement(s: FdsStructure, t: int) -> Placement:
    if not 0 <= t <= s.K:
        raise ValueError(f"t={t} outside [0, {s.K}]")
    return Placement(s, t, UNSELFISH)


def is_selfish(p: Placement) -> bool:
    """True iff no user caches any piece of a file outside its own FDS."""
    for k in p.structure.users:
        bit = 1 << (k - 1)
        for sf in p.cache(k):
            if not sf.cls & bit:
                return False
    return True


def desired_subfiles(p: Placement, dm: Demand, k: int) -> list[SubfileId]:
    """Pieces of user ``k``'s requested file missing from its cache, in tag order."""
    require_valid(p.structure, dm)
    p.structure.check_user(k)
    bit = 1 << (k - 1)
    file = dm.file_of(k)
    return [
        SubfileId(file.index, file.cls, tag)
        for tag in subsets_of_size(p.tag_universe(file.cls) & ~bit, p.t)
    ]


def iter_desired(p: Placement, dm: Demand) -> Iterator[tuple[int, SubfileId]]:
    for k in p.structure.users:
        for sf in desired_subfiles(p, dm, k):
            yield k, sf
