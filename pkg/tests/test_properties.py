"""Randomised invariants over small structures."""

from fractions import Fraction

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from selfish_cc.bounds import (
    coding_gain_bound,
    f_coefficient,
    lp_lower_bound,
    lp_vertex_enumeration,
    r_lb,
    r_lb_curve,
    r_man,
    ratio_to_man,
)
from selfish_cc.delivery import DeliveryScheme, check_certificate, uncoded_scheme, verify_decodability
from selfish_cc.demands import (
    circular_demand_for,
    circular_shifts,
    circular_witness,
    count_shifts_with_k1_before_k2,
)
from selfish_cc.fds import Demand, FdsStructure, colex_rank, colex_unrank, fds_of_user, is_valid_demand
from selfish_cc.oracle import acyclic_set, is_acyclic
from selfish_cc.placement import selfish_man_placement


@st.composite
def structures(draw, kmax=20, amin=1):
    K = draw(st.integers(max(2, amin + 1), kmax))
    a = draw(st.integers(amin, K))
    return K, a


@st.composite
def valid_demands(draw, kmax=6):
    K = draw(st.integers(2, kmax))
    a = draw(st.integers(1, K))
    f = draw(st.integers(1, 3))
    s = FdsStructure(K, a, f)
    d = tuple(draw(st.sampled_from(fds_of_user(s, k))) for k in s.users)
    fi = tuple(draw(st.integers(1, f)) for _ in s.users)
    return s, Demand(d, fi)


@given(structures(), st.data())
def test_ratio_to_man_interior_strict(ka, data):
    K, a = ka
    assume(a < K)
    t = data.draw(st.integers(0, a - 1))
    r = ratio_to_man(K, a, t)
    if t in (0, a - 1):
        assert r == 1
    else:
        assert r > 1


@given(st.integers(1, 20), st.data())
def test_full_fds_is_man(K, data):
    t = data.draw(st.integers(0, K))
    assert r_lb(K, K, t) == r_man(K, t)


@given(structures(), st.fractions(min_value=0, max_value=1))
def test_gain_below_limit(ka, frac):
    K, a = ka
    assume(a < K)
    gamma = frac * Fraction(a, K)
    g = coding_gain_bound(K, a, gamma)
    assert g.bound < g.limit
    assert g.bound * g.deterioration == K * gamma + 1


@given(structures())
def test_f_convex_decreasing(ka):
    K, a = ka
    f = [f_coefficient(K, a, t) for t in range(a + 1)]
    assert all(x > y for x, y in zip(f, f[1:]))
    assert all(f[t + 2] - 2 * f[t + 1] + f[t] > 0 for t in range(a - 1))


@settings(max_examples=60)
@given(structures(kmax=12), st.integers(1, 3), st.fractions(min_value=0, max_value=1))
def test_lp_jensen_equals_vertices(ka, f, frac):
    K, a = ka
    s = FdsStructure(K, a, f)
    M = frac * s.fds_size
    assert lp_lower_bound(s, M) == lp_vertex_enumeration(s, M) == r_lb_curve(s).eval_at(M)


@given(st.integers(1, 12), st.data())
def test_colex_roundtrip(n, data):
    size = data.draw(st.integers(0, n))
    mask = data.draw(st.sets(st.integers(0, n - 1), min_size=size, max_size=size))
    m = sum(1 << i for i in mask)
    assert colex_unrank(colex_rank(m), size) == m


@given(st.integers(2, 9), st.data())
def test_shift_count_formula(K, data):
    u = data.draw(st.permutations(range(1, K + 1)))
    k1, k2 = data.draw(st.lists(st.integers(1, K), min_size=2, max_size=2, unique=True))
    brute = sum(v.position(k1) < v.position(k2) for v in circular_shifts(u))
    assert brute == count_shifts_with_k1_before_k2(u, k1, k2)


@given(st.integers(3, 9), st.data())
def test_circularity_survives_rotation_and_relabel(K, data):
    a = data.draw(st.integers(2, K - 1))
    s = FdsStructure(K, a, 1)
    u = data.draw(st.permutations(range(1, K + 1)))
    dm = circular_demand_for(s, u, (1,) * K)
    assert is_valid_demand(s, dm)
    w = circular_witness(s, dm)
    assert w is not None and w[0] == 1
    # w is a rotation of u
    assert tuple(w) in [tuple(v) for v in circular_shifts(u)]


@settings(max_examples=50)
@given(valid_demands(), st.data())
def test_acyclic_set_always_acyclic(sd, data):
    s, dm = sd
    u = data.draw(st.permutations(range(1, s.K + 1)))
    verts = acyclic_set(dm, u)
    assert is_acyclic([(v.owner, v.subfile.tag) for v in verts])


@settings(max_examples=40, deadline=None)
@given(valid_demands(kmax=5), st.data())
def test_adding_messages_keeps_decodability(sd, data):
    s, dm = sd
    t = data.draw(st.integers(0, s.alpha))
    p = selfish_man_placement(s, t)
    sc = uncoded_scheme(p, dm)
    extra = data.draw(st.lists(st.sampled_from(sc.messages), max_size=3)) if sc.messages else []
    # xor two messages together as a redundant extra
    if len(sc.messages) >= 2:
        extra.append(sc.messages[0] ^ sc.messages[-1] or sc.messages[0])
    bigger = DeliveryScheme(sc.messages + tuple(extra), p.subpacketization)
    rep = verify_decodability(p, dm, bigger)
    assert rep.all_decodable
    for u in rep.users:
        for sf, cert in u.certificates.items():
            assert check_certificate(p, u.user, bigger, cert, sf)
