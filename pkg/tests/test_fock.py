from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralflow.fock import (
    B, C, BETA, GAMMA, FockError, ModeRef, ParseError, State, basis, canonicalize,
    format_state, generator, grade, mode, mono_grade, parse_state, sort_with_sign,
)
from oracles import fermion_dims, koszul_sign

modes_st = st.builds(ModeRef, st.integers(0, 3), st.integers(1, 2), st.integers(-4, -1))


def test_canonical_order_is_family_index_n():
    s = canonicalize([mode("gamma", 1, -1), mode("c", 2, -1), mode("b", 1, -2)])
    (mono,) = list(s)
    assert [x.family for x in mono] == [B, C, GAMMA]


def test_fermion_swap_sign():
    assert canonicalize([mode("c", 1, -1), mode("b", 1, -1)]) == -canonicalize([mode("b", 1, -1), mode("c", 1, -1)])
    # bosons commute with everything
    assert canonicalize([mode("beta", 1, -1), mode("b", 1, -1)]) == canonicalize([mode("b", 1, -1), mode("beta", 1, -1)])


def test_square_zero_and_bosonic_powers():
    assert canonicalize([mode("b", 1, -1), mode("b", 1, -1)]) == 0
    s = canonicalize([mode("gamma", 1, -1)] * 3)
    assert len(s) == 1


@given(st.lists(modes_st, max_size=6))
def test_koszul_sign_matches_inversion_count(seq):
    sign, mono = sort_with_sign(seq)
    expected = koszul_sign(seq, lambda x: x.family <= C)
    if expected is None:
        assert sign == 0
    else:
        assert sign == expected
        assert list(mono) == sorted(seq)


def test_gradings():
    mono = (ModeRef(B, 1, -1), ModeRef(C, 1, -2), ModeRef(BETA, 1, -1), ModeRef(GAMMA, 1, -1))
    assert mono_grade(mono) == (Fraction(1, 2) + Fraction(3, 2) + 1, 0, 0)
    assert grade(generator("c", 1)) == {(Fraction(1, 2), 1, 1): 1}


@pytest.mark.parametrize("d,hmax", [(1, 0), (1, 1), (1, 3), (2, "1/2"), (2, 2), (3, "3/2")])
def test_fermionic_basis_matches_product_formula(d, hmax):
    from collections import Counter
    got = Counter(mono_grade(m) for m in basis(d, hmax, "fermionic"))
    assert dict(got) == fermion_dims(d, hmax)


def test_full_basis_regulator():
    # weight 0: products of gamma[i,-1] only, counted by g <= gmax
    zero = [m for m in basis(2, 0, "full", 0, 2)]
    assert len(zero) == 1 + 2 + 3
    assert all(m == () or all(x.family == GAMMA for x in m) for m in zero)


def test_state_arithmetic_and_zero():
    a, b = generator("b", 1), generator("c", 1)
    s = a + b * Fraction(1, 2)
    assert s - s == 0
    assert (s * 2).coeff(next(iter(b))) == 1
    assert State.zero() == 0 and not State.zero()
    assert hash(a + b) == hash(b + a)


def test_float_coefficients_rejected():
    with pytest.raises(TypeError):
        State.from_dict({(): 0.5})


def test_invalid_modes():
    with pytest.raises(FockError):
        canonicalize([mode("b", 1, 0)])
    with pytest.raises(FockError):
        canonicalize([mode("b", 3, -1)], rank=2)
    with pytest.raises(FockError):
        mode("d", 1, -1)


@given(st.lists(st.tuples(st.fractions(max_denominator=7), st.lists(modes_st, max_size=4)), max_size=4))
@settings(max_examples=60)
def test_format_parse_roundtrip(terms):
    s = State.zero()
    for coeff, seq in terms:
        s = s + canonicalize(seq, coeff)
    assert parse_state(format_state(s)) == s


def test_format_is_deterministic():
    s = generator("c", 1, -2) + generator("b", 1) * Fraction(-3, 2)
    assert format_state(s) == "-3/2 b[1,-1] |0>\n1 c[1,-2] |0>"
    assert format_state(State.zero()) == "0 |0>"


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse_state("1 b[1,-1] |0>\n2 q[1,-1] |0>")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        parse_state("1 b[1,0] |0>")
