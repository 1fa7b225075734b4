"""XOR delivery schemes, their construction, GF(2) decodability checks and text serialization."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .demands import UserPermutation, alpha_demand_witness, is_circular_for
from .fds import Demand, binom, parse_set_label, require_valid, subsets_of_size
from .placement import SELFISH, UNSELFISH, Placement, SubfileId, desired_subfiles

XorMessage = frozenset  # frozenset[SubfileId]; its GF(2) sum

# Upper limit on subsets tried per desired subfile when looking for a
# smallest certificate; larger searches fall back to the elimination one.
MIN_CERT_BUDGET = 20000


@dataclass(frozen=True)
class DeliveryScheme:
    messages: tuple[frozenset[SubfileId], ...]
    subpacketization: int

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(frozenset(m) for m in self.messages))
        if self.subpacketization < 1:
            raise ValueError("subpacketization must be positive")
        for i, m in enumerate(self.messages, start=1):
            if not m:
                raise ValueError(f"message X{i} is empty")

    @property
    def load(self) -> Fraction:
        return Fraction(len(self.messages), self.subpacketization)

    def __len__(self) -> int:
        return len(self.messages)

    def dumps(self) -> str:
        return dumps(self)


# ---------------------------------------------------------------- GF(2) ----


def _reduce_rows(rows: Sequence[int]) -> list[tuple[int, int, int]]:
    """Echelon basis of ``rows`` as (pivot bit, row, combination mask over input indices)."""
    basis: list[tuple[int, int, int]] = []
    for i, row in enumerate(rows):
        combo = 1 << i
        for pivot, brow, bcombo in basis:
            if row & pivot:
                row ^= brow
                combo ^= bcombo
        if row:
            pivot = row & -row
            # keep the basis fully reduced on pivot columns
            basis = [
                (p, r ^ row, c ^ combo) if r & pivot else (p, r, c) for p, r, c in basis
            ]
            basis.append((pivot, row, combo))
    return basis


def _solve(basis: list[tuple[int, int, int]], target: int) -> int | None:
    combo = 0
    for pivot, brow, bcombo in basis:
        if target & pivot:
            target ^= brow
            combo ^= bcombo
    return combo if target == 0 else None


def gf2_rank(rows: Sequence[int]) -> int:
    return len(_reduce_rows(rows))


def gf2_in_span(target: int, rows: Sequence[int]) -> bool:
    return _solve(_reduce_rows(rows), target) is not None


# ----------------------------------------------------------- decoding ----


@dataclass(frozen=True)
class UserDecode:
    user: int
    decodable: bool
    desired: tuple[SubfileId, ...]
    # desired subfile -> 1-based message indices whose XOR yields it after removing cached parts
    certificates: dict[SubfileId, tuple[int, ...]] = field(default_factory=dict)

    @property
    def missing(self) -> tuple[SubfileId, ...]:
        return tuple(sf for sf in self.desired if sf not in self.certificates)


@dataclass(frozen=True)
class DecodeReport:
    users: tuple[UserDecode, ...]

    @property
    def all_decodable(self) -> bool:
        return all(u.decodable for u in self.users)

    @property
    def decodable_count(self) -> int:
        return sum(u.decodable for u in self.users)

    def user(self, k: int) -> UserDecode:
        return self.users[k - 1]


def _check_message_subfiles(p: Placement, scheme: DeliveryScheme) -> None:
    for i, m in enumerate(scheme.messages, start=1):
        for sf in m:
            if not p.is_subfile(sf):
                raise ValueError(f"message X{i} holds {sf}, not a subfile of placement t={p.t}")
    if scheme.subpacketization != p.subpacketization:
        raise ValueError(
            f"scheme subpacketization {scheme.subpacketization} != placement {p.subpacketization}"
        )


def reduce_message(p: Placement, k: int, message: Iterable[SubfileId]) -> frozenset[SubfileId]:
    """Message content user ``k`` still has to resolve after XOR-ing out its cache."""
    return frozenset(sf for sf in message if not p.caches(k, sf))


def _smallest_certificate(
    relevant: list[tuple[int, int]], target: int, cap: int
) -> tuple[int, ...] | None:
    # relevant: (1-based message index, reduced row), in message order
    n = len(relevant)
    spent = 0
    for size in range(1, n + 1):
        spent += binom(n, size)
        if spent > cap:
            return None
        for combo in itertools.combinations(relevant, size):
            acc = 0
            for _, row in combo:
                acc ^= row
            if acc == target:
                return tuple(i for i, _ in combo)
    return None


def decode_user(
    p: Placement, dm: Demand, scheme: DeliveryScheme, k: int, certificates: bool = True
) -> UserDecode:
    desired = desired_subfiles(p, dm, k)
    coords: dict[SubfileId, int] = {sf: j for j, sf in enumerate(desired)}
    rows = []
    for m in scheme.messages:
        row = 0
        for sf in reduce_message(p, k, m):
            j = coords.setdefault(sf, len(coords))
            row |= 1 << j
        rows.append(row)
    basis = _reduce_rows(rows)
    certs: dict[SubfileId, tuple[int, ...]] = {}
    relevant = [(i, r) for i, r in enumerate(rows, start=1) if r]
    for j, sf in enumerate(desired):
        combo = _solve(basis, 1 << j)
        if combo is None:
            continue
        if not certificates:
            certs[sf] = ()
            continue
        best = _smallest_certificate(relevant, 1 << j, MIN_CERT_BUDGET)
        if best is None:
            best = tuple(i + 1 for i in range(len(rows)) if combo >> i & 1)
        certs[sf] = best
    return UserDecode(k, len(certs) == len(desired), tuple(desired), certs)


def verify_decodability(
    p: Placement, dm: Demand, scheme: DeliveryScheme, certificates: bool = True
) -> DecodeReport:
    """Linear decodability per user: each desired subfile must lie in the GF(2)
    span of the messages once cached subfiles are removed. Coordinates cover
    every uncached subfile, so undesired interference has to cancel too.
    """
    require_valid(p.structure, dm)
    _check_message_subfiles(p, scheme)
    return DecodeReport(
        tuple(decode_user(p, dm, scheme, k, certificates) for k in p.structure.users)
    )


def check_certificate(
    p: Placement, k: int, scheme: DeliveryScheme, indices: Iterable[int], target: SubfileId
) -> bool:
    """Recompute the XOR of the listed messages and test it isolates ``target`` for user k."""
    acc: set[SubfileId] = set()
    for i in indices:
        acc ^= set(reduce_message(p, k, scheme.messages[i - 1]))
    return acc == {target}


# ------------------------------------------------------------ schemes ----


def _require_selfish(p: Placement) -> None:
    if p.kind != SELFISH:
        raise ValueError("scheme needs the selfish MAN-style placement")


def alpha_demand_scheme(p: Placement, dm: Demand) -> DeliveryScheme:
    """MAN XORs inside the alpha-group, then every other user's missing pieces uncoded."""
    _require_selfish(p)
    s = p.structure
    group = alpha_demand_witness(s, dm)
    if group is None:
        raise ValueError(f"{dm} is not an alpha-demand")
    messages = []
    for S in subsets_of_size(group, p.t + 1):
        messages.append(
            frozenset(
                SubfileId(dm.fidx[k - 1], int(group), S & ~(1 << (k - 1)))
                for k in s.users
                if S >> (k - 1) & 1
            )
        )
    for k in s.users:
        if not group >> (k - 1) & 1:
            messages.extend(frozenset([sf]) for sf in desired_subfiles(p, dm, k))
    return DeliveryScheme(tuple(messages), p.subpacketization)


def uncoded_scheme(p: Placement, dm: Demand) -> DeliveryScheme:
    require_valid(p.structure, dm)
    messages = [
        frozenset([sf]) for k in p.structure.users for sf in desired_subfiles(p, dm, k)
    ]
    return DeliveryScheme(tuple(messages), p.subpacketization)


def man_scheme(p: Placement, dm: Demand) -> DeliveryScheme:
    """Classical MAN delivery: one XOR per (t+1)-subset of all users."""
    if p.kind != UNSELFISH:
        raise ValueError("MAN delivery needs the unselfish MAN placement")
    s = p.structure
    require_valid(s, dm)
    messages = []
    for S in subsets_of_size(s.all_users, p.t + 1):
        messages.append(
            frozenset(
                SubfileId(dm.fidx[k - 1], int(dm.d[k - 1]), S & ~(1 << (k - 1)))
                for k in s.users
                if S >> (k - 1) & 1
            )
        )
    return DeliveryScheme(tuple(messages), p.subpacketization)


# Templates are relative to u: (owner position, tag positions), 1-based.
Template = tuple[tuple[int, tuple[int, ...]], ...]

CIRCULAR_5_4_T2: tuple[Template, ...] = (
    ((1, (2, 3)), (2, (3, 5)), (3, (1, 4))),
    ((3, (1, 4)), (1, (2, 4)), (4, (1, 2))),
    ((2, (3, 5)), (5, (1, 3)), (3, (1, 5))),
    ((1, (3, 4)), (4, (1, 5))),
    ((2, (3, 4)), (4, (2, 5))),
    ((2, (4, 5)), (5, (1, 2))),
    ((3, (4, 5)), (5, (2, 3))),
)

CIRCULAR_5_4_T3: tuple[Template, ...] = (
    ((1, (2, 3, 4)), (2, (3, 4, 5)), (4, (1, 2, 5))),
    ((1, (2, 3, 4)), (3, (1, 4, 5)), (5, (1, 2, 3))),
)

CIRCULAR_6_5_T3: tuple[Template, ...] = (
    ((1, (2, 3, 4)), (2, (4, 5, 6)), (4, (2, 5, 6))),
    ((4, (1, 5, 6)), (1, (2, 3, 5)), (5, (1, 2, 3))),
    ((1, (2, 3, 4)), (4, (1, 5, 6)), (6, (1, 3, 4)), (3, (1, 4, 6))),
    ((2, (3, 4, 5)), (3, (1, 5, 6)), (5, (1, 3, 6))),
    ((5, (1, 2, 6)), (2, (3, 4, 6)), (6, (2, 3, 4))),
    ((2, (3, 4, 5)), (5, (1, 2, 6)), (1, (2, 4, 5)), (4, (1, 2, 5))),
    ((3, (4, 5, 6)), (4, (1, 2, 6)), (6, (1, 2, 4))),
    ((6, (1, 2, 3)), (3, (1, 4, 5)), (1, (3, 4, 5))),
    ((3, (4, 5, 6)), (6, (1, 2, 3)), (2, (3, 5, 6)), (5, (2, 3, 6))),
)


def instantiate(
    templates: Sequence[Template], dm: Demand, u: Sequence[int], subpacketization: int
) -> DeliveryScheme:
    """Turn u-relative templates into concrete subfile XORs for demand ``dm``."""
    messages = []
    for tpl in templates:
        msg = []
        for owner_pos, tag_pos in tpl:
            k = u[owner_pos - 1]
            tag = 0
            for q in tag_pos:
                tag |= 1 << (u[q - 1] - 1)
            cls = int(dm.d[k - 1])
            if tag & ~cls or tag >> (k - 1) & 1:
                raise ValueError(f"template piece ({owner_pos}, {tag_pos}) is not desired by user {k}")
            msg.append(SubfileId(dm.fidx[k - 1], cls, tag))
        messages.append(frozenset(msg))
    return DeliveryScheme(tuple(messages), subpacketization)


def _check_circular(p: Placement, dm: Demand, u_hat: Sequence[int], K: int, alpha: int) -> UserPermutation:
    _require_selfish(p)
    s = p.structure
    if (s.K, s.alpha) != (K, alpha):
        raise ValueError(f"scheme is for the ({K},{alpha},f) structure, got {s}")
    require_valid(s, dm)
    u = UserPermutation(u_hat)
    if len(u) != K or not is_circular_for(dm, alpha, u):
        raise ValueError(f"{dm} is not circular for u={u}")
    return u


def circular_scheme_5_4(p: Placement, dm: Demand, u_hat: Sequence[int]) -> DeliveryScheme:
    u = _check_circular(p, dm, u_hat, 5, 4)
    if p.t == 2:
        return instantiate(CIRCULAR_5_4_T2, dm, u, p.subpacketization)
    if p.t == 3:
        return instantiate(CIRCULAR_5_4_T3, dm, u, p.subpacketization)
    raise ValueError(f"no circular (5,4,f) scheme for t={p.t}; t must be 2 or 3")


def circular_scheme_6_5_t3(p: Placement, dm: Demand, u_hat: Sequence[int]) -> DeliveryScheme:
    u = _check_circular(p, dm, u_hat, 6, 5)
    if p.t != 3:
        raise ValueError(f"no circular (6,5,f) scheme for t={p.t}; t must be 3")
    return instantiate(CIRCULAR_6_5_T3, dm, u, p.subpacketization)


def motivating_scheme_5_4_1() -> list[frozenset[SubfileId]]:
    """The seven XORs used for the (5,4,1), t=2 demand (1234,2345,1345,1245,1235)."""
    text = """\
W[1,1345,14]+W[1,1234,24]+W[1,1245,12]
W[1,2345,35]+W[1,1235,13]+W[1,1345,15]
W[1,1345,14]+W[1,2345,35]+W[1,1234,23]
W[1,1234,34]+W[1,1245,15]
W[1,2345,45]+W[1,1235,12]
W[1,2345,34]+W[1,1245,25]
W[1,1345,45]+W[1,1235,23]
"""
    return list(loads(text, 6).messages)


# ------------------------------------------------------ serialization ----

_SUBFILE_RE = re.compile(r"W\[(\d+),([\d.]+),([\d.]*)\]")


def format_message(message: Iterable[SubfileId]) -> str:
    return "+".join(str(sf) for sf in sorted(message, key=lambda sf: (sf.cls, sf.index, sf.tag)))


def dumps(scheme: DeliveryScheme) -> str:
    """One message per line, ``+``-joined ``W[i,S,T]`` terms in canonical order."""
    return "".join(format_message(m) + "\n" for m in scheme.messages)


def parse_message(line: str) -> frozenset[SubfileId]:
    terms = line.strip().split("+")
    out = []
    for term in terms:
        m = _SUBFILE_RE.fullmatch(term.strip())
        if m is None:
            raise ValueError(f"bad subfile term {term!r}")
        out.append(SubfileId(int(m.group(1)), parse_set_label(m.group(2)), parse_set_label(m.group(3))))
    msg = frozenset(out)
    if len(msg) != len(out):
        raise ValueError(f"repeated subfile in {line!r}")
    return msg


def loads(text: str, subpacketization: int) -> DeliveryScheme:
    messages = [parse_message(line) for line in text.splitlines() if line.strip()]
    return DeliveryScheme(tuple(messages), subpacketization)
