"""Symmetric (K, alpha, f) file-demand-set structure, users, files and demands.

Users are numbered 1..K. A set of users is an int bitmask where bit ``k - 1``
stands for user ``k``; :class:`UserSet` is a thin ``int`` subclass over that
mask, so plain masks and ``UserSet`` values compare and hash identically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

MAX_USERS = 20
DEFAULT_CAP = 10**7


class CapExceededError(RuntimeError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what}: {required} items required, cap is {cap}")
        self.what = what
        self.required = required
        self.cap = cap


def binom(n: int, k: int) -> int:
    """Binomial coefficient with binom(n, k) = 0 for n < 0, k < 0 or n < k."""
    if n < 0 or k < 0 or n < k:
        return 0
    return math.comb(n, k)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(users: Iterable[int]) -> int:
    m = 0
    for k in users:
        m |= 1 << (k - 1)
    return m


def users_of(mask: int) -> list[int]:
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def subsets_of_size(mask: int, size: int) -> Iterator[int]:
    """Yield the ``size``-subsets of ``mask`` in increasing mask (colex) order."""
    bits = [1 << (k - 1) for k in users_of(mask)]
    if size < 0 or size > len(bits):
        return
    yield from sorted(sum(combo) for combo in itertools.combinations(bits, size))


def all_subsets(mask: int) -> Iterator[int]:
    """Yield every submask of ``mask`` (including 0 and ``mask``), decreasing."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def colex_rank(mask: int) -> int:
    """Rank of ``mask`` among subsets of equal cardinality in colex order."""
    return sum(binom(k - 1, i + 1) for i, k in enumerate(users_of(mask)))


def colex_unrank(rank: int, size: int) -> int:
    mask = 0
    for i in range(size, 0, -1):
        c = i - 1
        while binom(c + 1, i) <= rank:
            c += 1
        rank -= binom(c, i)
        mask |= 1 << c
    return mask


def set_label(mask: int) -> str:
    """``{1,2,4}`` -> ``"124"``; users above 9 force a dot-separated form (``{10}`` -> ``"10."``)."""
    users = users_of(mask)
    if any(k > 9 for k in users):
        return ".".join(str(k) for k in users) + ("." if len(users) == 1 else "")
    return "".join(str(k) for k in users)


def parse_set_label(text: str) -> int:
    text = text.strip()
    if not text:
        return 0
    if "." in text:
        users = [int(x) for x in text.split(".") if x]
    else:
        users = [int(c) for c in text]
    if len(set(users)) != len(users) or any(k < 1 or k > MAX_USERS for k in users):
        raise ValueError(f"bad user set label {text!r}")
    return mask_of(users)


class UserSet(int):
    """Subset of users 1..K stored as a bitmask (bit k-1 is user k)."""

    def __new__(cls, mask: int = 0):
        if mask < 0 or mask >> MAX_USERS:
            raise ValueError(f"user mask {mask:#x} outside users 1..{MAX_USERS}")
        return super().__new__(cls, mask)

    @classmethod
    def of(cls, users: Iterable[int]) -> "UserSet":
        users = list(users)
        if any(k < 1 or k > MAX_USERS for k in users):
            raise ValueError(f"users must lie in 1..{MAX_USERS}: {users}")
        return cls(mask_of(users))

    @classmethod
    def parse(cls, text: str) -> "UserSet":
        return cls(parse_set_label(text))

    def __len__(self) -> int:
        return popcount(self)

    def __iter__(self) -> Iterator[int]:
        return iter(users_of(self))

    def __contains__(self, k: object) -> bool:
        return isinstance(k, int) and k >= 1 and bool(self >> (k - 1) & 1)

    def __repr__(self) -> str:
        return f"UserSet({set_label(self) or '{}'})"

    def __str__(self) -> str:
        return set_label(self)


class FileRef(NamedTuple):
    cls: int  # alpha-subset mask
    index: int  # 1..f


@dataclass(frozen=True)
class FdsStructure:
    K: int
    alpha: int
    f: int = 1

    def __post_init__(self):
        if not 1 <= self.K <= MAX_USERS:
            raise ValueError(f"K must be in 1..{MAX_USERS}, got {self.K}")
        if not 1 <= self.alpha <= self.K:
            raise ValueError(f"alpha must be in 1..K, got {self.alpha}")
        if self.f < 1:
            raise ValueError(f"f must be positive, got {self.f}")

    @property
    def users(self) -> range:
        return range(1, self.K + 1)

    @property
    def all_users(self) -> UserSet:
        return UserSet((1 << self.K) - 1)

    @property
    def C(self) -> int:
        return binom(self.K, self.alpha)

    @property
    def N(self) -> int:
        return self.f * self.C

    @property
    def fds_size(self) -> int:
        return self.f * binom(self.K - 1, self.alpha - 1)

    @property
    def delta(self) -> Fraction:
        return Fraction(self.alpha, self.K)

    def classes(self) -> list[UserSet]:
        """All alpha-subsets of [K] in colex order (class id = list index)."""
        return [UserSet(m) for m in subsets_of_size(self.all_users, self.alpha)]

    def files(self) -> Iterator[FileRef]:
        for c in self.classes():
            for i in range(1, self.f + 1):
                yield FileRef(c, i)

    def check_user(self, k: int) -> None:
        if not 1 <= k <= self.K:
            raise ValueError(f"user {k} outside 1..{self.K}")

    def memory(self, t: int) -> Fraction:
        """Cache size M = tN/K in file units."""
        return Fraction(t * self.N, self.K)

    def __str__(self) -> str:
        return f"({self.K},{self.alpha},{self.f})"


class DerivedCounts(NamedTuple):
    C: int
    N: int
    fds_size: int
    delta: Fraction
    interest_fraction: Fraction


def derived_counts(s: FdsStructure) -> DerivedCounts:
    return DerivedCounts(
        C=s.C,
        N=s.N,
        fds_size=s.fds_size,
        delta=s.delta,
        interest_fraction=Fraction(s.fds_size, s.N),
    )


def fds_of_user(s: FdsStructure, k: int) -> list[UserSet]:
    """Classes user ``k`` may request: the alpha-subsets of [K] containing k."""
    s.check_user(k)
    rest = s.all_users & ~(1 << (k - 1))
    bit = 1 << (k - 1)
    return [UserSet(m | bit) for m in subsets_of_size(rest, s.alpha - 1)]


@dataclass(frozen=True)
class Demand:
    """Per-user requested class ``d[k-1]`` and file index ``fidx[k-1]``."""

    d: tuple[UserSet, ...]
    fidx: tuple[int, ...]

    def __post_init__(self):
        if len(self.d) != len(self.fidx):
            raise ValueError("d and fidx lengths differ")
        object.__setattr__(self, "d", tuple(UserSet(c) for c in self.d))
        object.__setattr__(self, "fidx", tuple(int(i) for i in self.fidx))

    @classmethod
    def parse(cls, classes: str | Sequence[str], fidx: Sequence[int] | None = None) -> "Demand":
        """``Demand.parse("1234,2345,1345")``; file indices default to 1."""
        if isinstance(classes, str):
            classes = classes.split(",")
        d = tuple(UserSet.parse(c) for c in classes)
        return cls(d, tuple(fidx) if fidx is not None else (1,) * len(d))

    @property
    def K(self) -> int:
        return len(self.d)

    def file_of(self, k: int) -> FileRef:
        return FileRef(self.d[k - 1], self.fidx[k - 1])

    def __str__(self) -> str:
        cls_part = ",".join(set_label(c) for c in self.d)
        f_part = ",".join(str(i) for i in self.fidx)
        return f"d=({cls_part}) f=({f_part})"


def check_shape(s: FdsStructure, dm: Demand) -> None:
    if dm.K != s.K:
        raise ValueError(f"demand has {dm.K} users, structure has {s.K}")
    for c in dm.d:
        if popcount(c) != s.alpha or c >> s.K:
            raise ValueError(f"requested class {set_label(c)} is not an alpha-subset of [K]")


def is_valid_demand(s: FdsStructure, dm: Demand) -> bool:
    check_shape(s, dm)
    return all(
        (c >> (k - 1)) & 1 and 1 <= i <= s.f
        for k, (c, i) in enumerate(zip(dm.d, dm.fidx), start=1)
    )


def require_valid(s: FdsStructure, dm: Demand) -> None:
    if not is_valid_demand(s, dm):
        raise ValueError(f"invalid demand {dm} for structure {s}")


def count_valid_demands(s: FdsStructure) -> int:
    return s.fds_size**s.K


def enumerate_valid_demands(s: FdsStructure, cap: int = DEFAULT_CAP) -> Iterator[Demand]:
    """Every valid demand once, lexicographic in (d_1, f_1, d_2, f_2, ...)."""
    required = count_valid_demands(s)
    if required > cap:
        raise CapExceededError("valid demands", required, cap)
    return _valid_demands(s)


def _valid_demands(s: FdsStructure) -> Iterator[Demand]:
    options = [
        [(c, i) for c in fds_of_user(s, k) for i in range(1, s.f + 1)] for k in s.users
    ]
    for choice in itertools.product(*options):
        yield Demand(tuple(c for c, _ in choice), tuple(i for _, i in choice))
