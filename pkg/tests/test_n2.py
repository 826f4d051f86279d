import dataclasses
from fractions import Fraction

import pytest

from chiralflow import n2
from chiralflow.fock import State, generator
from chiralflow.modes import field_coeff, nop, ope_singular, translate
from chiralflow.n2 import (
    N2ClosureError, build_currents, load_convention, make_currents, q_g_generate,
    resolve_convention, twist, verify_n2_closure, verify_omega_relations, verify_twist,
)

VAC = State.vacuum()


@pytest.fixture(scope="module", params=[1, 2])
def cs(request):
    return make_currents(request.param)


def test_j_is_sum_of_c_b(cs):
    expected = State.zero()
    for i in range(1, cs.rank + 1):
        expected = expected + nop(generator("c", i), generator("b", i))
    assert cs.J == expected


def test_printed_opes(cs):
    d = cs.rank
    # J J ~ d/(z-w)^2, J Q ~ Q/(z-w), J G ~ -G/(z-w)
    assert ope_singular(cs.J, cs.J) == {1: VAC * d}
    assert ope_singular(cs.J, cs.Q) == {0: cs.Q}
    assert ope_singular(cs.J, cs.G) == {0: -cs.G}
    # Virasoro with c = 3d
    assert field_coeff(cs.L, 3, cs.L) == VAC * Fraction(3 * d, 2)
    assert field_coeff(cs.L, 1, cs.L) == cs.L * 2
    assert field_coeff(cs.L, 0, cs.L) == translate(cs.L)
    # Q G ~ d/(z-w)^3 + J/(z-w)^2 + (L + dJ/2)/(z-w)
    assert field_coeff(cs.Q, 2, cs.G) == VAC * d
    assert field_coeff(cs.Q, 1, cs.G) == cs.J
    assert field_coeff(cs.Q, 0, cs.G) == cs.L + translate(cs.J) * Fraction(1, 2)
    assert ope_singular(cs.Q, cs.Q) == {} and ope_singular(cs.G, cs.G) == {}


def test_weights_of_currents(cs):
    for name, h in (("J", 1), ("Q", Fraction(3, 2)), ("G", Fraction(3, 2)), ("L", 2)):
        x = cs.current(name)
        assert field_coeff(cs.L, 1, x) == x * h


def test_closure_report(cs):
    rep = verify_n2_closure(cs, {"hmax": 2, "sector": "full", "gmax": 1})
    assert rep.status == "PASS", rep.to_text()
    assert rep.measured["central_charge"] == 3 * cs.rank


@pytest.mark.parametrize("d", [1, 2, 3])
def test_omega_relations(d):
    rep = verify_omega_relations(make_currents(d))
    assert rep.status == "PASS", rep.to_text()
    assert rep.measured["top_pole_order"] == d


def test_omega_normalization():
    cs = make_currents(2)
    assert field_coeff(cs.omega_plus, 1, cs.omega_minus) == VAC
    assert nop(cs.J, cs.omega_plus) == translate(cs.omega_plus)
    assert nop(cs.J, cs.omega_minus) == -translate(cs.omega_minus)


@pytest.mark.parametrize("sign", [1, -1])
def test_topological_twist(cs, sign):
    rep = verify_twist(cs, sign)
    assert rep.status == "PASS", rep.to_text()
    assert rep.measured["central_charge"] == 0
    lt = twist(cs, sign)
    assert ope_singular(lt, lt).get(3) is None


def test_q_g_generate_the_algebra(cs):
    assert q_g_generate(cs)


def test_convention_file_matches_search():
    frozen = load_convention()
    res = resolve_convention()
    assert frozen == res["chosen"]
    # the two closing conventions differ by (Q, G) -> (-Q, -G)
    a, b = res["passing"]
    assert (a[0], a[1]) == (-b[0], -b[1]) and a[2:] == b[2:]
    assert set(res["exponents"].values()) == {-1}


def test_wrong_signs_fail_with_counterexample():
    signs = list(load_convention())
    signs[2] = -signs[2]
    rep = verify_n2_closure(build_currents(1, tuple(signs)))
    assert rep.status == "FAIL" and rep.counterexample
    with pytest.raises(N2ClosureError):
        make_currents(1, tuple(signs))


def test_corrupted_omega_fails():
    cs = make_currents(2)
    bad = dataclasses.replace(cs, omega_plus=generator("c", 1))
    rep = verify_omega_relations(bad)
    assert rep.status == "FAIL" and rep.counterexample


def test_rank_must_be_positive():
    with pytest.raises(ValueError):
        build_currents(0)


def test_borcherds_suite_small_window():
    rep = n2.borcherds_suite(make_currents(1), hmax=1, mrange=1)
    assert rep.status == "PASS"
    assert rep.measured["pairs"] == 100
