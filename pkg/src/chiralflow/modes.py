"""Mode action, fields of composite states, and OPE extraction.

Everything reduces to the free-field (anti)commutators

    [gamma^i_(m), beta_j,(n)] = delta_ij delta_{m+n+1,0}
    {b_i,(m), c^j_(n)}        = delta_ij delta_{m+n+1,0}

and the iterate formula for ``(u_(m) v)_(n)`` with ``u`` a generator.
Internal helpers work on plain dicts ``{monomial: int | Fraction}``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, lcm
from typing import Callable, Iterable

from .fock import (
    B,
    BETA,
    C,
    GAMMA,
    TWICE_WEIGHT,
    ModeRef,
    State,
    mono_parity,
    mono_twice_weight,
)

# use the closed-form normally ordered product for two-mode states
FAST_PAIRS = True

_PARTNER = {B: C, C: B, BETA: GAMMA, GAMMA: BETA}
# value of the bracket [x_(m), partner_(-m-1)} for an annihilating x_(m)
_BRACKET = {B: 1, C: 1, GAMMA: 1, BETA: -1}


def sign_of(k: int) -> int:
    """(-1)^k as an int for any integer k (``(-1) ** k`` is a float for k < 0)."""
    return -1 if k & 1 else 1


@lru_cache(maxsize=None)
def binom(m: int, j: int) -> int:
    """Generalized binomial coefficient C(m, j) for any integer m, j >= 0."""
    if m >= 0:
        return comb(m, j)
    return sign_of(j) * comb(j - m - 1, j)


def _add_into(out: dict, mono, coeff) -> None:
    v = out.get(mono, 0) + coeff
    if v:
        out[mono] = v
    else:
        out.pop(mono, None)


@lru_cache(maxsize=None)
def _mode_on_mono(x: ModeRef, mono: tuple) -> tuple:
    """x applied to the monomial state; returns ((mono, int coeff), ...)."""
    f, i, n = x
    odd = f <= C
    if n <= -1:
        # creation: insert at the canonical position
        pos = 0
        nodd = 0
        for y in mono:
            if y > x or (y == x and not odd):
                break
            if y == x:
                return ()
            if y[0] <= C:
                nodd += 1
            pos += 1
        sign = -1 if (odd and nodd & 1) else 1
        return ((mono[:pos] + (x,) + mono[pos:], sign),)
    partner = (_PARTNER[f], i, -n - 1)
    value = _BRACKET[f]
    out: dict = {}
    nodd = 0
    for k, y in enumerate(mono):
        if y == partner:
            sign = -1 if (odd and nodd & 1) else 1
            _add_into(out, mono[:k] + mono[k + 1:], sign * value)
        if y[0] <= C:
            nodd += 1
    return tuple(out.items())


def _apply_mode_dict(x: ModeRef, terms: dict) -> dict:
    out: dict = {}
    for mono, c in terms.items():
        for m2, c2 in _mode_on_mono(x, mono):
            _add_into(out, m2, c * c2)
    return out


def apply_mode(x: ModeRef, s: State) -> State:
    """Action of a single free-field mode on a state."""
    return State.from_dict(_apply_mode_dict(ModeRef(*x), dict(s.items())))


@lru_cache(maxsize=None)
def _translate_mono(mono: tuple) -> tuple:
    from .fock import sort_with_sign

    out: dict = {}
    for k, (f, i, n) in enumerate(mono):
        sign, m2 = sort_with_sign(mono[:k] + (ModeRef(f, i, n - 1),) + mono[k + 1:])
        if sign:
            _add_into(out, m2, -n * sign)
    return tuple(out.items())


def _translate_dict(terms: dict) -> dict:
    out: dict = {}
    for mono, c in terms.items():
        for m2, c2 in _translate_mono(mono):
            _add_into(out, m2, c * c2)
    return out


def translate(s: State) -> State:
    """The translation operator: [d, v_(n)] = -n v_(n-1), d|0> = 0."""
    return State.from_dict(_translate_dict(dict(s.items())))


_tw = lru_cache(maxsize=None)(mono_twice_weight)


def _top_index(twice_weight_sum: int) -> int:
    # largest p with v_(p) t possibly nonzero: h_v + h_t - p - 1 >= 0
    return twice_weight_sum // 2 - 1


@lru_cache(maxsize=None)
def _field_mono(a: tuple, n: int, t: tuple) -> tuple:
    """a_(n) t for canonical monomials a, t, as ((mono, int coeff), ...)."""
    if not a:
        return ((t, 1),) if n == -1 else ()
    tw_t = _tw(t)
    if n > _top_index(_tw(a) + tw_t):
        return ()
    u = a[0]
    m = u[2]
    if len(a) == 1:
        # x_(-p-1)|0> has field d^p x / p!, whose (n) mode is C(p-n-1, p) x_(n-p)
        p = -m - 1
        coef = binom(p - n - 1, p)
        if not coef:
            return ()
        return tuple((m2, coef * c) for m2, c in _mode_on_mono(ModeRef(u[0], u[1], n - p), t))
    if len(a) == 2 and FAST_PAIRS:
        return _pair_field(a, n, t, tw_t)
    v = a[1:]
    tw_v = _tw(v)
    tw_u = TWICE_WEIGHT[u[0]]
    sign_vu = -1 if (u[0] <= C and mono_parity(v)) else 1
    out: dict = {}
    # sum_j (-1)^j C(m,j) u_(m-j) v_(n+j) t
    j = 0
    top_v = _top_index(tw_v + tw_t)
    while n + j <= top_v:
        coef = sign_of(j) * binom(m, j)
        for m1, c1 in _field_mono(v, n + j, t):
            for m2, c2 in _mode_on_mono(ModeRef(u[0], u[1], m - j), m1):
                _add_into(out, m2, coef * c1 * c2)
        j += 1
    # - sum_j (-1)^j C(m,j) (-1)^m p(u,v) v_(m+n-j) u_(j) t
    outer = -sign_of(m) * sign_vu
    for j in range(0, _top_index(tw_u + tw_t) + 1):
        coef = outer * sign_of(j) * binom(m, j)
        for m1, c1 in _mode_on_mono(ModeRef(u[0], u[1], j), t):
            for m2, c2 in _field_mono(v, m + n - j, m1):
                _add_into(out, m2, coef * c1 * c2)
    return tuple(out.items())


def _pair_field(a: tuple, n: int, t: tuple, tw_t: int) -> tuple:
    """Fast path for a = x_(-p-1) y_(-q-1)|0>, whose field is :(d^p x/p!)(d^q y/q!):.

    :AB:_(n) = sum_{k<0} A_(k) B_(n-k-1) + (-1)^{|x||y|} sum_{k>=0} B_(n-k-1) A_(k),
    with A_(k) = C(p-k-1, p) x_(k-p).  Annihilation modes only contribute
    when their partner occurs in t, so the sums run over those directly.
    """
    (f1, i1, m1), (f2, i2, m2) = a
    p, q = -m1 - 1, -m2 - 1
    pf1, pf2 = _PARTNER[f1], _PARTNER[f2]
    # annihilation indices r >= 0 of x (resp. y) that can act on t
    rx = {-z[2] - 1 for z in t if z[0] == pf1 and z[1] == i1}
    ry = {-z[2] - 1 for z in t if z[0] == pf2 and z[1] == i2}
    out: dict = {}
    # k <= -1: B_(l) with l = n - k - 1 is a creation mode when l - q <= -1
    ls = set(range(n, q)) | {r + q for r in ry if n - r - q - 1 <= -1}
    for l in sorted(ls):
        k = n - l - 1
        if k > -1:
            continue
        coef = binom(p - k - 1, p) * binom(q - l - 1, q)
        if not coef:
            continue
        xa = ModeRef(f1, i1, k - p)
        for mono1, c1 in _mode_on_mono(ModeRef(f2, i2, l - q), t):
            for mono2, c2 in _mode_on_mono(xa, mono1):
                _add_into(out, mono2, coef * c1 * c2)
    # k >= 0: A_(k) vanishes for k < p, and is an annihilator for k >= p
    sign = -1 if (f1 <= C and f2 <= C) else 1
    for r in sorted(rx):
        k = r + p
        l = n - k - 1
        coef = sign * binom(p - k - 1, p) * binom(q - l - 1, q)
        if not coef:
            continue
        yb = ModeRef(f2, i2, l - q)
        for mono1, c1 in _mode_on_mono(ModeRef(f1, i1, r), t):
            for mono2, c2 in _mode_on_mono(yb, mono1):
                _add_into(out, mono2, coef * c1 * c2)
    return tuple(out.items())


def _field_dict(a: dict, n: int, t: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mt, ct in t.items():
            c = ca * ct
            for m2, c2 in _field_mono(ma, n, mt):
                _add_into(out, m2, c * c2)
    return out


def field_coeff(a: State, n: int, t: State) -> State:
    """The mode a_(n) of the field Y(a, z) applied to t."""
    return State.from_dict(_field_dict(dict(a.items()), n, dict(t.items())))


def nop(a: State, b: State) -> State:
    """Normally ordered product a_(-1) b."""
    return field_coeff(a, -1, b)


def top_pole(a: State, b: State) -> int:
    """Upper bound on n with a_(n) b nonzero."""
    return _top_index(a.max_twice_weight() + b.max_twice_weight())


def ope_singular(a: State, b: State) -> dict[int, State]:
    """All nonzero a_(n) b with n >= 0."""
    out = {}
    for n in range(0, top_pole(a, b) + 1):
        v = field_coeff(a, n, b)
        if v:
            out[n] = v
    return out


def clear_caches() -> None:
    _mode_on_mono.cache_clear()
    _translate_mono.cache_clear()
    _field_mono.cache_clear()
    _tw.cache_clear()


class OpeTable:
    """Write-once memo of pairings a_(n) b keyed by (a, n, b)."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._table: dict = {}

    def __call__(self, a: State, n: int, b: State) -> State:
        if not self.enabled:
            return field_coeff(a, n, b)
        key = (a, n, b)
        hit = self._table.get(key)
        if hit is None:
            hit = self._table[key] = field_coeff(a, n, b)
        return hit

    def __len__(self) -> int:
        return len(self._table)


def mode_operator(a: State, n: int) -> Callable[[State], State]:
    """The operator t -> a_(n) t."""
    terms = dict(a.items())

    def op(t: State) -> State:
        return State.from_dict(_field_dict(terms, n, dict(t.items())))

    return op


def _integral(terms: dict) -> dict:
    """Rescale to integer coefficients (int arithmetic is much cheaper than Fraction)."""
    den = 1
    for c in terms.values():
        den = lcm(den, Fraction(c).denominator)
    return {m: int(c * den) for m, c in terms.items()}


def borcherds_commutator_check(
    a: State,
    m: int,
    b: State,
    n: int,
    window: Iterable[State],
) -> tuple[bool, State | None]:
    """Check [a_(m), b_(n)] = sum_j C(m,j) (a_(j) b)_(m+n-j) on every window state.

    Returns ``(ok, first failing state)``.
    """
    return borcherds_block(a, b, [(m, n)], window)


def borcherds_block(a: State, b: State, mn: Iterable[tuple[int, int]],
                    window: Iterable[State]) -> tuple[bool, State | None]:
    """The commutator identity for several (m, n) at once, sharing intermediate images."""
    sign = -1 if (a.parity() and b.parity()) else 1
    # the identity is bilinear, so integer rescalings of a and b are harmless
    ad, bd = _integral(dict(a.items())), _integral(dict(b.items()))
    pairings = {j: {mono: int(c) for mono, c in v.items()}
                for j, v in ope_singular(State.from_dict(ad), State.from_dict(bd)).items()}
    mn = list(mn)
    ms = sorted({m for m, _ in mn})
    ns = sorted({n for _, n in mn})
    for t in window:
        td = _integral(dict(t.items()))
        a_t = {m: _field_dict(ad, m, td) for m in ms}
        b_t = {n: _field_dict(bd, n, td) for n in ns}
        rhs_cache: dict = {}
        for m, n in mn:
            lhs = _field_dict(ad, m, b_t[n])
            for mono, c in _field_dict(bd, n, a_t[m]).items():
                _add_into(lhs, mono, -sign * c)
            rhs: dict = {}
            for j, ab in pairings.items():
                coef = binom(m, j)
                if not coef:
                    continue
                k = m + n - j
                if (j, k) not in rhs_cache:
                    rhs_cache[j, k] = _field_dict(ab, k, td)
                for mono, c in rhs_cache[j, k].items():
                    _add_into(rhs, mono, coef * c)
            if lhs != rhs:
                return False, t
    return True, None


def skew_symmetry_rhs(a: State, b: State, n: int) -> State:
    """(-1)^{|a||b|} sum_j (-1)^{n+1+j} d^j (b_(n+j) a) / j!  (equals a_(n) b)."""
    sign = -1 if (a.parity() and b.parity()) else 1
    total = State.zero()
    fact = 1
    for j in range(0, max(top_pole(b, a) - n, 0) + 1):
        if j:
            fact *= j
        term = field_coeff(b, n + j, a)
        for _ in range(j):
            term = translate(term)
        total = total + term * Fraction(sign * sign_of(n + 1 + j), fact)
    return total
