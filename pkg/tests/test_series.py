from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralflow.series import (
    BiSeries, GradedDims, ellipticity_check, flow_substitute, graded_dims, trace_series, twisted_trace,
)
from oracles import fermion_dims

F = Fraction


def test_graded_dims_examples():
    assert graded_dims(1, "fermionic", 1).table == {
        (F(0), 0, 0): 1, (F(1, 2), -1, 1): 1, (F(1, 2), 1, 1): 1, (F(1), 0, 0): 1}
    assert graded_dims(1, "fermionic", 0).table == {(F(0), 0, 0): 1}
    assert graded_dims(2, "fermionic", F(1, 2)).table == {
        (F(0), 0, 0): 1, (F(1, 2), -1, 1): 2, (F(1, 2), 1, 1): 2}


@pytest.mark.parametrize("d,hmax", [(1, 3), (2, 3), (3, 2)])
def test_graded_dims_product_formula(d, hmax):
    assert graded_dims(d, "fermionic", hmax).table == fermion_dims(d, hmax)


@pytest.mark.parametrize("d", [1, 2])
def test_charge_symmetry(d):
    t = graded_dims(d, "fermionic", 3).table
    assert all(t.get((h, -m, p)) == n for (h, m, p), n in t.items())


def test_trace_series_examples():
    f = trace_series(graded_dims(1, "fermionic", 1), 3)
    q0 = F(-1, 8)
    assert f.terms == {(q0, 0): 1, (q0 + F(1, 2), 1): -1, (q0 + F(1, 2), -1): -1, (q0 + 1, 0): 1}
    assert f.cap == F(7, 8)
    assert not trace_series(GradedDims(1, "fermionic", F(1)), 3)
    assert trace_series(GradedDims(1, "fermionic", F(0), {(F(0), 0, 0): 1}), 0).terms == {(F(0), 0): 1}


def test_flow_substitute_examples():
    assert flow_substitute(BiSeries({(0, 0): 1}), 1, 2).terms == {(F(1), 2): 1}
    assert flow_substitute(BiSeries({(F(1, 2), -1): 1}), 1, 1).terms == {(F(0), 0): 1}


def test_group_law_on_trace():
    f = trace_series(graded_dims(1, "fermionic", 2))
    assert flow_substitute(flow_substitute(f, 1, 1), 1, 1) == flow_substitute(f, 2, 1)


series_st = st.dictionaries(st.tuples(st.fractions(-3, 3, max_denominator=8), st.integers(-3, 3)),
                            st.integers(-3, 3), max_size=8)


@given(series_st, st.integers(-2, 2), st.integers(-2, 2), st.integers(1, 3))
@settings(max_examples=80)
def test_group_law_property(terms, m, n, d):
    f = BiSeries(terms, cap=2)
    assert flow_substitute(flow_substitute(f, n, d), m, d) == flow_substitute(f, m + n, d)


@given(series_st, series_st)
@settings(max_examples=60)
def test_arithmetic(a, b):
    x, y = BiSeries(a, cap=1), BiSeries(b, cap=F(1, 2))
    assert x + y == y + x
    assert (x - x).terms == {}
    assert (x * y).terms == (y * x).terms
    assert all(k[0] <= (x + y).cap for k in (x + y).terms)


def test_product_cap():
    # (1 + q)(1 - q) known only below q^1 when both are capped at 1
    x = BiSeries({(0, 0): 1, (1, 0): 1}, cap=1)
    y = BiSeries({(0, 0): 1, (1, 0): -1}, cap=1)
    p = x * y
    assert p.cap == 1 and p.terms == {(F(0), 0): 1}


def test_mismatched_slopes_rejected():
    with pytest.raises(ValueError):
        BiSeries({}, cap=0, slope=1) + BiSeries({}, cap=0, slope=0)


def test_float_rejected():
    with pytest.raises(TypeError):
        BiSeries({(0, 0): 0.5})


def test_printout_is_sorted_and_exact():
    f = trace_series(graded_dims(1, "fermionic", 1), 3)
    assert f.to_text() == "q^-1/8 y^0 : 1\nq^3/8 y^-1 : -1\nq^3/8 y^1 : -1\nq^7/8 y^0 : 1"


def test_twisted_trace_n0_is_trace():
    for d in (1, 2):
        assert twisted_trace(d, 0, "fermionic", 2) == trace_series(graded_dims(d, "fermionic", 2))


@pytest.mark.parametrize("d,n", [(1, 1), (2, -1), (2, 2)])
def test_twisted_trace_brute_force(d, n):
    # direct double computation: apply the flowed weights to the product-formula table
    c = F(3 * d)
    want = {}
    for (h, m, p), v in fermion_dims(d, 2).items():
        k = (h + n * m + F(d * n * n, 2) - c / 24, m + d * n)
        want[k] = want.get(k, 0) + (-1) ** p * v
    want = {k: v for k, v in want.items() if v}
    assert twisted_trace(d, n, "fermionic", 2).terms == want


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("n", [-2, -1, 1, 2])
def test_ellipticity(d, n):
    rep = ellipticity_check(d, n, 2)
    assert rep.status == "PASS", rep.to_text()
    assert rep.measured["bijection_pairs"] > 0
    assert rep.measured["unsubstituted_form_holds"] is False


def test_ellipticity_full_sector():
    rep = ellipticity_check(1, 1, F(3, 2), sector="full", gmax=1)
    assert rep.status == "PASS", rep.to_text()


def test_corrupted_dims_fail():
    dims = graded_dims(1, "fermionic", 2)
    dims.table[(F(1), 0, 0)] += 1
    rep = ellipticity_check(1, 1, 2, dims=dims)
    assert rep.status == "FAIL" and rep.counterexample


def test_shifted_central_charge_still_consistent():
    assert ellipticity_check(1, 1, 2, c=0).status == "PASS"
