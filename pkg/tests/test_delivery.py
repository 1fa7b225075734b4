from fractions import Fraction

import pytest

from selfish_cc.bounds import r_lb, r_man
from selfish_cc.delivery import (
    CIRCULAR_5_4_T2,
    DeliveryScheme,
    alpha_demand_scheme,
    check_certificate,
    circular_scheme_5_4,
    circular_scheme_6_5_t3,
    dumps,
    gf2_in_span,
    gf2_rank,
    instantiate,
    loads,
    man_scheme,
    motivating_scheme_5_4_1,
    uncoded_scheme,
    verify_decodability,
)
from selfish_cc.demands import circular_demand_for, circular_shifts, enumerate_circular_demands, make_alpha_demand
from selfish_cc.fds import Demand, FdsStructure, UserSet
from selfish_cc.placement import SubfileId, selfish_man_placement, unselfish_man_placement


@pytest.fixture
def motivating(s541, d1):
    p = selfish_man_placement(s541, 2)
    return p, d1, DeliveryScheme(tuple(motivating_scheme_5_4_1()), 6)


def all_certificates_reverify(p, dm, sc, report):
    for u in report.users:
        for sf, cert in u.certificates.items():
            assert check_certificate(p, u.user, sc, cert, sf), (u.user, sf, cert)


def test_gf2_helpers():
    assert gf2_rank([0b011, 0b110, 0b101]) == 2
    assert gf2_in_span(0b101, [0b011, 0b110])
    assert not gf2_in_span(0b100, [0b011, 0b110])
    assert gf2_rank([]) == 0


def test_motivating_scheme_decodes(motivating):
    p, dm, sc = motivating
    rep = verify_decodability(p, dm, sc)
    assert rep.all_decodable
    assert sc.load == Fraction(7, 6)
    # user 1 recovers its 23-piece from X2 xor X3, the others directly
    certs = rep.user(1).certificates
    assert certs[SubfileId(1, UserSet.parse("1234"), UserSet.parse("23"))] == (2, 3)
    assert certs[SubfileId(1, UserSet.parse("1234"), UserSet.parse("24"))] == (1,)
    assert certs[SubfileId(1, UserSet.parse("1234"), UserSet.parse("34"))] == (4,)
    all_certificates_reverify(p, dm, sc, rep)


def test_dropping_last_message_breaks_users_3_and_5(motivating):
    p, dm, sc = motivating
    rep = verify_decodability(p, dm, DeliveryScheme(sc.messages[:6], 6))
    assert [u.user for u in rep.users if not u.decodable] == [3, 5]
    assert rep.user(3).missing == (SubfileId(1, UserSet.parse("1345"), UserSet.parse("45")),)


def test_template_gives_the_same_xors_as_the_worked_example(motivating, s541, d1):
    p, _, sc = motivating
    tpl = circular_scheme_5_4(p, d1, (1, 2, 3, 4, 5))
    assert set(tpl.messages) == set(sc.messages)


@pytest.mark.parametrize("t,load", [(2, Fraction(7, 6)), (3, Fraction(1, 2))])
def test_circular_5_4_all_demands_all_shifts(t, load):
    for f in (1, 2):
        s = FdsStructure(5, 4, f)
        p = selfish_man_placement(s, t)
        for dm, u in enumerate_circular_demands(s):
            for v in circular_shifts(u):
                sc = circular_scheme_5_4(p, dm, v)
                assert sc.load == load == r_lb(5, 4, t)
                assert verify_decodability(p, dm, sc, certificates=False).all_decodable


def test_circular_6_5_all_demands():
    s = FdsStructure(6, 5, 1)
    p = selfish_man_placement(s, 3)
    n = 0
    for dm, u in enumerate_circular_demands(s):
        sc = circular_scheme_6_5_t3(p, dm, u)
        assert sc.load == Fraction(9, 10)
        assert verify_decodability(p, dm, sc, certificates=False).all_decodable
        n += 1
    assert n == 120


def test_circular_6_5_certificates():
    s = FdsStructure(6, 5, 1)
    p = selfish_man_placement(s, 3)
    u = (1, 2, 3, 4, 5, 6)
    dm = circular_demand_for(s, u, (1,) * 6)
    sc = circular_scheme_6_5_t3(p, dm, u)
    rep = verify_decodability(p, dm, sc)
    assert (4, 6) in rep.user(1).certificates.values()
    assert (7, 9) in rep.user(2).certificates.values()
    all_certificates_reverify(p, dm, sc, rep)


def test_circular_scheme_preconditions(s541, d1, d2):
    with pytest.raises(ValueError):
        circular_scheme_5_4(selfish_man_placement(s541, 1), d1, (1, 2, 3, 4, 5))
    with pytest.raises(ValueError):
        circular_scheme_5_4(selfish_man_placement(s541, 2), d2, (1, 2, 3, 4, 5))
    with pytest.raises(ValueError):
        circular_scheme_5_4(selfish_man_placement(s541, 2), d1, (1, 3, 2, 4, 5))
    with pytest.raises(ValueError):
        circular_scheme_6_5_t3(selfish_man_placement(s541, 3), d1, (1, 2, 3, 4, 5))


def test_template_rejects_undesired_pieces(s541, d1):
    bad = ((((1, (1, 2)),),))
    with pytest.raises(ValueError):
        instantiate(bad, d1, (1, 2, 3, 4, 5), 6)
    assert len(instantiate(CIRCULAR_5_4_T2, d1, (1, 2, 3, 4, 5), 6)) == 7


def test_alpha_demand_scheme_533():
    s = FdsStructure(5, 3, 3)
    p = selfish_man_placement(s, 2)
    dm = make_alpha_demand(s, UserSet.of([1, 2, 3]))
    sc = alpha_demand_scheme(p, dm)
    assert sc.load == 1
    assert [len(m) for m in sc.messages] == [3, 1, 1]
    rep = verify_decodability(p, dm, sc)
    assert rep.all_decodable
    all_certificates_reverify(p, dm, sc, rep)


@pytest.mark.parametrize("K,alpha,f", [(5, 3, 3), (4, 2, 2), (6, 3, 3), (5, 2, 2), (6, 4, 4)])
def test_alpha_demand_scheme_load_all_t(K, alpha, f):
    s = FdsStructure(K, alpha, f)
    dm = make_alpha_demand(s, UserSet((1 << alpha) - 1))
    for t in range(alpha + 1):
        p = selfish_man_placement(s, t)
        sc = alpha_demand_scheme(p, dm)
        assert sc.load == r_lb(K, alpha, t)
        assert verify_decodability(p, dm, sc, certificates=False).all_decodable


def test_alpha_demand_scheme_endpoints():
    s = FdsStructure(5, 3, 3)
    dm = make_alpha_demand(s, UserSet.of([1, 2, 3]))
    assert alpha_demand_scheme(selfish_man_placement(s, 0), dm).load == 5
    assert alpha_demand_scheme(selfish_man_placement(s, 3), dm).load == 0


def test_alpha_demand_scheme_rejects_other_demands(s541, d1):
    with pytest.raises(ValueError):
        alpha_demand_scheme(selfish_man_placement(s541, 2), d1)


def test_uncoded_scheme_loads(s541, d1):
    assert uncoded_scheme(selfish_man_placement(s541, 2), d1).load == Fraction(5, 2)
    assert uncoded_scheme(selfish_man_placement(s541, 0), d1).load == 5
    assert uncoded_scheme(selfish_man_placement(s541, 4), d1).load == 0
    p = selfish_man_placement(s541, 2)
    assert verify_decodability(p, d1, uncoded_scheme(p, d1)).all_decodable


def test_empty_scheme_at_t_alpha(s541, d1):
    p = selfish_man_placement(s541, 4)
    assert verify_decodability(p, d1, DeliveryScheme((), 1)).all_decodable


def test_man_scheme_distinct_files():
    s = FdsStructure(4, 2, 1)
    dm = Demand.parse("12,23,34,14")
    for t in range(5):
        p = unselfish_man_placement(s, t)
        sc = man_scheme(p, dm)
        assert sc.load == r_man(4, t)
        assert verify_decodability(p, dm, sc, certificates=False).all_decodable
    assert man_scheme(unselfish_man_placement(s, 2), dm).load == Fraction(2, 3)


def test_man_scheme_needs_unselfish(s541, d1):
    with pytest.raises(ValueError):
        man_scheme(selfish_man_placement(s541, 2), d1)


def test_scheme_over_wrong_subfiles_rejected(s541, d1):
    p = selfish_man_placement(s541, 2)
    sc = DeliveryScheme((frozenset([SubfileId(1, 0b1111, 0b111)]),), 6)
    with pytest.raises(ValueError):
        verify_decodability(p, d1, sc)
    with pytest.raises(ValueError):
        verify_decodability(p, d1, DeliveryScheme((), 4))


def test_serialization_roundtrip(motivating):
    _, _, sc = motivating
    text = dumps(sc)
    assert text.splitlines()[0] == "W[1,1234,24]+W[1,1245,12]+W[1,1345,14]"
    again = loads(text, 6)
    assert again == sc
    assert dumps(again) == text


def test_serialization_wide_users():
    sf = SubfileId(2, UserSet.of([1, 10, 11]), UserSet.of([10]))
    sc = DeliveryScheme((frozenset([sf]),), 3)
    assert dumps(sc) == "W[2,1.10.11,10.]\n"
    assert loads(dumps(sc), 3) == sc


def test_serialization_rejects_garbage():
    with pytest.raises(ValueError):
        loads("W[1,12,3]+X\n", 2)
    with pytest.raises(ValueError):
        loads("W[1,12,1]+W[1,12,1]\n", 2)
