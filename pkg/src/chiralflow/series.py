"""Truncated bivariate character series and the spectral-flow substitution.

A :class:`BiSeries` is a finite sum of ``coeff * q^a y^b`` with ``a`` an exact
rational and ``b`` an integer.  Truncation is a half-plane
``a + slope*b <= cap``: graded traces start with slope 0, and the flow
substitution ``q^a y^b -> q^(a + n b + d n^2/2) y^(b + d n)`` tilts it.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .fock import iter_basis, mono_grade, mono_charge, mono_parity, mono_twice_weight
from .report import Report

Key = tuple  # (Fraction q-exponent, int y-exponent)


class BiSeries:
    """Exact truncated series in q (rational exponents) and y (integer exponents)."""

    __slots__ = ("_terms", "cap", "slope")

    def __init__(self, terms: Mapping[Key, object] | None = None, cap=None, slope: int = 0):
        self.cap = None if cap is None else Fraction(cap)
        self.slope = int(slope)
        clean: dict = {}
        for (a, b), c in (terms or {}).items():
            if isinstance(c, float):
                raise TypeError("floating-point coefficient in an exact series")
            key = (Fraction(a), int(b))
            v = clean.get(key, 0) + Fraction(c)
            if v:
                clean[key] = v
            else:
                clean.pop(key, None)
        self._terms = {k: v for k, v in clean.items() if self._keeps(k)}

    def _keeps(self, key: Key) -> bool:
        return self.cap is None or key[0] + self.slope * key[1] <= self.cap

    @classmethod
    def monomial(cls, a, b: int, coeff=1, cap=None, slope: int = 0) -> "BiSeries":
        return cls({(a, b): coeff}, cap, slope)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def coeff(self, a, b: int) -> Fraction:
        return self._terms.get((Fraction(a), int(b)), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (self._terms, self.cap, self.slope) == (other._terms, other.cap, other.slope)

    def __repr__(self) -> str:
        return f"BiSeries({len(self)} terms, cap={self.cap}, slope={self.slope})"

    # arithmetic -----------------------------------------------------------
    def _common(self, other: "BiSeries") -> int:
        if self.cap is None:
            return other.slope
        if other.cap is None or other.slope == self.slope:
            return self.slope
        raise ValueError("series truncated along different slopes")

    def valuation(self):
        """min of a + slope*b over the terms (None for the zero series)."""
        return min((a + self.slope * b for a, b in self._terms), default=None)

    def __add__(self, other: "BiSeries") -> "BiSeries":
        slope = self._common(other)
        caps = [c for c in (self.cap, other.cap) if c is not None]
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return BiSeries(out, min(caps) if caps else None, slope)

    def __neg__(self) -> "BiSeries":
        return self.scale(-1)

    def __sub__(self, other: "BiSeries") -> "BiSeries":
        return self + (-other)

    def scale(self, c) -> "BiSeries":
        c = Fraction(c)
        return BiSeries({k: v * c for k, v in self._terms.items()}, self.cap, self.slope)

    def __mul__(self, other) -> "BiSeries":
        if not isinstance(other, BiSeries):
            return self.scale(other)
        slope = self._common(other)
        # each factor is only known below its cap; the product is known
        # below min(cap1 + val2, cap2 + val1)
        caps = []
        for x, y in ((self, other), (other, self)):
            if x.cap is not None:
                v = BiSeries(y._terms, None, slope).valuation()
                if v is not None:
                    caps.append(x.cap + v)
        out: dict = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0) + c1 * c2
        return BiSeries(out, min(caps) if caps else None, slope)

    __rmul__ = __mul__

    def to_text(self) -> str:
        """One ``q^a y^b : coeff`` line per term, sorted by exponents."""
        return "\n".join(f"q^{a} y^{b} : {c}" for (a, b), c in self.items())


def flow_substitute(f: BiSeries, n: int, d: int) -> BiSeries:
    """S_n f(q, y) = q^(d n^2/2) y^(d n) f(q, q^n y)."""
    shift = Fraction(d * n * n, 2)
    out = {(a + n * b + shift, b + d * n): c for (a, b), c in f._terms.items()}
    if f.cap is None:
        return BiSeries(out)
    # a + t b <= C  <=>  a' + (t - n) b' <= C - d n^2/2 + t d n
    cap = f.cap - shift + f.slope * d * n
    return BiSeries(out, cap, f.slope - n)


# --- graded dimensions ----------------------------------------------------

@dataclass
class GradedDims:
    """Dimensions of the (weight, charge, parity) components up to ``hmax``."""

    rank: int
    sector: str
    hmax: Fraction
    table: dict = field(default_factory=dict)
    gmax: int = 0

    def __getitem__(self, key) -> int:
        return self.table.get(key, 0)

    def to_text(self) -> str:
        return "\n".join(f"h={h} m={m} p={p} : {n}" for (h, m, p), n in sorted(self.table.items()))


def graded_dims(d: int, sector: str = "fermionic", hmax=2, gmax: int = 1) -> GradedDims:
    """Count canonical monomials by grade.

    In the full sector the weight-zero gamma modes are regulated by their
    total count, summed over ``0..gmax``.
    """
    hmax = Fraction(hmax)
    counts = Counter(mono_grade(m) for m in iter_basis(d, hmax, sector, 0, gmax))
    return GradedDims(d, sector, hmax, dict(counts), gmax if sector == "full" else 0)


def trace_series(dims: GradedDims, c=None) -> BiSeries:
    """sum (-1)^p dim q^(h - c/24) y^m, capped at hmax - c/24."""
    c = Fraction(3 * dims.rank if c is None else c)
    shift = c / 24
    terms: dict = {}
    for (h, m, p), n in dims.table.items():
        k = (h - shift, m)
        terms[k] = terms.get(k, 0) + (-1 if p else 1) * n
    return BiSeries(terms, dims.hmax - shift)


def twisted_trace(d: int, n: int, sector: str = "fermionic", hmax=2, c=None, gmax: int = 1) -> BiSeries:
    """Trace with the flowed weights L0 + n J0 + d n^2/2 and J0 + d n.

    Enumerates monomials directly, without going through a dimension table.
    """
    hmax = Fraction(hmax)
    c = Fraction(3 * d if c is None else c)
    shift = Fraction(d * n * n, 2)
    terms: dict = {}
    for mono in iter_basis(d, hmax, sector, 0, gmax):
        h = Fraction(mono_twice_weight(mono), 2)
        m = mono_charge(mono)
        k = (h + n * m + shift - c / 24, m + d * n)
        terms[k] = terms.get(k, 0) + (-1 if mono_parity(mono) else 1)
    return BiSeries(terms, hmax - c / 24 - shift, -n)


# --- the character identity ---------------------------------------------

@lru_cache(maxsize=None)
def _operator_shift(d: int, hmax: Fraction) -> tuple:
    from .flow import measure_shift
    from .n2 import make_currents

    rep = measure_shift(make_currents(d), hmax, "fermionic")
    if not rep.ok:
        raise RuntimeError(f"grading shift of sigma could not be measured: {rep.notes}")
    m = rep.measured
    return m["a"], m["b"], m["parity_shift"]


def _flow_grade(grade: tuple, n: int, d: int, shift: tuple) -> tuple:
    """Image of (h, m, p) under the n-th power of the measured sigma shift."""
    a, b, ps = shift
    h, m, p = grade
    half = Fraction(d, 2)
    for _ in range(abs(n)):
        if n > 0:
            h, m = h + b * m + half, m + a
        else:
            m = m - a
            h = h - b * m - half
        p = (p + ps) % 2
    return h, m, p


def _unsubstituted_holds(twisted: BiSeries, f: BiSeries, n: int, d: int) -> bool:
    """Whether twisted == q^(d n^2/2) y^(d n) f(q, y) where both are known."""
    shift = Fraction(d * n * n, 2)
    moved = BiSeries({(a + shift, b + d * n): v for (a, b), v in f._terms.items()})
    cap = f.cap + shift

    def inside(k):
        return k[0] <= cap and twisted._keeps(k)

    keys = {k for k in twisted._terms if inside(k)} | {k for k in moved._terms if inside(k)}
    return all(twisted._terms.get(k) == moved._terms.get(k) for k in keys)


def ellipticity_check(d: int, n: int, hmax=2, dims: GradedDims | None = None, c=None,
                      sector: str = "fermionic", gmax: int = 1, shift: tuple | None = None) -> Report:
    """Compare the twisted trace with the flow-substituted trace term by term.

    Also checks that the grading shift of sigma, measured on states, maps
    each graded component inside the window onto one of equal dimension.
    """
    t0 = time.perf_counter()
    hmax = Fraction(hmax)
    if dims is None:
        dims = graded_dims(d, sector, hmax, gmax)
    rep = Report("ellipticity", d, {"hmax": hmax, "n": n, "sector": sector})
    lhs = twisted_trace(d, n, sector, hmax, c, gmax)
    rhs = flow_substitute(trace_series(dims, c), n, d)
    if (lhs.cap, lhs.slope) != (rhs.cap, rhs.slope):
        rep.fail("truncations differ", f"cap {lhs.cap}/{lhs.slope} vs {rhs.cap}/{rhs.slope}")
    diff = lhs - rhs
    if diff:
        (a, b), v = diff.items()[0]
        rep.fail("twisted trace differs from the substituted trace",
                 f"q^{a} y^{b} : twisted {lhs.coeff(a, b)} substituted {rhs.coeff(a, b)}")
    # operator route
    if shift is None:
        shift = _operator_shift(d, min(hmax, Fraction(3, 2)))
    pairs = 0
    for g, dim in sorted(dims.table.items()):
        img = _flow_grade(g, n, d, shift)
        if img[0] <= hmax:
            pairs += 1
            if dims[img] != dim:
                rep.fail("sigma shift does not preserve graded dimensions",
                         f"dim{g} = {dim} but dim{img} = {dims[img]}")
                break
    rep.measured = {"a": shift[0], "b": shift[1], "parity_shift": shift[2],
                    "terms": len(lhs), "bijection_pairs": pairs,
                    "unsubstituted_form_holds": _unsubstituted_holds(lhs, trace_series(dims, c), n, d)}
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep

