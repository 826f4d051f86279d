"""States of the rank-d bc-beta-gamma Fock module.

A state is a finite linear combination, with exact rational coefficients,
of canonically ordered monomials in creation modes applied to the vacuum.
Modes use the Borcherds index: the field of ``v`` is
``Y(v, z) = sum_n v_(n) z^(-n-1)`` and ``v_(n)`` is a creation mode on the
vacuum iff ``n <= -1``.
"""
from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple

B, C, BETA, GAMMA = 0, 1, 2, 3
FAMILY_NAMES = ("b", "c", "beta", "gamma")
_FAMILY_CODES = {name: code for code, name in enumerate(FAMILY_NAMES)}

# Conformal weights (doubled, to stay in integers): b, c -> 1/2, beta -> 1, gamma -> 0.
TWICE_WEIGHT = (1, 1, 2, 0)
CHARGE = (-1, 1, 0, 0)


class FockError(ValueError):
    """Invalid mode or state data."""


class ParseError(FockError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class ModeRef(NamedTuple):
    """A single mode ``family[index, n]``; tuple order is the canonical order."""

    family: int
    index: int
    n: int

    @property
    def name(self) -> str:
        return FAMILY_NAMES[self.family]

    @property
    def odd(self) -> bool:
        return self.family <= C

    def __str__(self) -> str:
        return f"{FAMILY_NAMES[self.family]}[{self.index},{self.n}]"


Monomial = tuple  # tuple[ModeRef, ...] in canonical order; () is the vacuum


def mode(family: str | int, index: int, n: int) -> ModeRef:
    if isinstance(family, str):
        try:
            family = _FAMILY_CODES[family]
        except KeyError:
            raise FockError(f"unknown mode family {family!r}") from None
    return ModeRef(family, index, n)


def is_odd(x: ModeRef) -> bool:
    return x[0] <= C


def mono_twice_weight(mono: Monomial) -> int:
    # each creation mode x_(n) carries weight h_x - 1 - n
    return sum(TWICE_WEIGHT[f] - 2 - 2 * n for f, _, n in mono)


def mono_weight(mono: Monomial) -> Fraction:
    return Fraction(mono_twice_weight(mono), 2)


def mono_charge(mono: Monomial) -> int:
    return sum(CHARGE[m[0]] for m in mono)


def mono_parity(mono: Monomial) -> int:
    return sum(1 for m in mono if m[0] <= C) & 1


def mono_grade(mono: Monomial) -> tuple[Fraction, int, int]:
    return mono_weight(mono), mono_charge(mono), mono_parity(mono)


def sort_with_sign(seq: Iterable[ModeRef]) -> tuple[int, Monomial]:
    """Sort modes into canonical order, returning ``(sign, monomial)``.

    The sign is the Koszul sign of the permutation restricted to odd modes;
    it is 0 when an odd mode occurs twice.
    """
    seq = list(seq)
    sign = 1
    # insertion sort; only odd/odd transpositions contribute a sign
    for i in range(1, len(seq)):
        x = seq[i]
        j = i - 1
        while j >= 0 and seq[j] > x:
            if x[0] <= C and seq[j][0] <= C:
                sign = -sign
            seq[j + 1] = seq[j]
            j -= 1
        seq[j + 1] = x
    for k in range(1, len(seq)):
        if seq[k] == seq[k - 1] and seq[k][0] <= C:
            return 0, ()
    return sign, tuple(seq)


def _check_mode(x: ModeRef, rank: int | None) -> None:
    if not 0 <= x[0] <= 3:
        raise FockError(f"bad family code in {x!r}")
    if x[1] < 1 or (rank is not None and x[1] > rank):
        raise FockError(f"index of {x} out of range for rank {rank}")
    if x[2] > -1:
        raise FockError(f"{x} is not a creation mode (need n <= -1)")


class State:
    """Immutable exact linear combination of canonical Fock monomials."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff:
                    clean[tuple(ModeRef(*m) for m in mono)] = coeff
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "State":
        # trusted constructor: canonical monomials, nonzero coefficients
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def from_dict(cls, terms: Mapping[Monomial, object]) -> "State":
        """Build from a map whose values may be int/Fraction and may vanish."""
        out = {}
        for m, c in terms.items():
            if isinstance(c, float):
                raise TypeError("floating-point coefficient in an exact state")
            if c:
                out[m] = Fraction(c)
        return cls._raw(out)

    @classmethod
    def vacuum(cls) -> "State":
        return cls._raw({(): Fraction(1)})

    @classmethod
    def zero(cls) -> "State":
        return cls._raw({})

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coeff(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, State):
            return self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other: "State") -> "State":
        if not isinstance(other, State):
            if other == 0:
                return self
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return State._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "State":
        return State._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "State") -> "State":
        return self + (-other)

    def __mul__(self, scalar) -> "State":
        if isinstance(scalar, State):
            return NotImplemented
        scalar = Fraction(scalar)
        if not scalar:
            return State.zero()
        return State._raw({m: c * scalar for m, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "State":
        return self * (1 / Fraction(scalar))

    def __repr__(self) -> str:
        return f"State({format_state(self)!r})"

    def __str__(self) -> str:
        return format_state(self)

    # grading helpers
    def components(self) -> dict[tuple[Fraction, int, int], "State"]:
        parts: dict = {}
        for m, c in self._terms.items():
            parts.setdefault(mono_grade(m), {})[m] = c
        return {g: State._raw(t) for g, t in parts.items()}

    def parity(self) -> int:
        """Parity of a parity-homogeneous state (0 for the zero state)."""
        ps = {mono_parity(m) for m in self._terms}
        if len(ps) > 1:
            raise FockError("state is not parity-homogeneous")
        return ps.pop() if ps else 0

    def max_twice_weight(self) -> int:
        return max((mono_twice_weight(m) for m in self._terms), default=0)

    def rank(self) -> int:
        return max((x[1] for m in self._terms for x in m), default=0)


def canonicalize(seq: Iterable[ModeRef], coeff=1, rank: int | None = None) -> State:
    """Reorder ``seq`` canonically, absorbing the Koszul sign into ``coeff``."""
    seq = [ModeRef(*x) for x in seq]
    for x in seq:
        _check_mode(x, rank)
    sign, mono = sort_with_sign(seq)
    if not sign:
        return State.zero()
    return State.from_dict({mono: sign * Fraction(coeff)})


def generator(family: str | int, index: int, n: int = -1) -> State:
    """The state ``x_(n)|0>`` for a single creation mode."""
    return canonicalize([mode(family, index, n)])


def grade(s: State) -> dict[tuple[Fraction, int, int], int]:
    """Number of monomials of ``s`` in each (weight, charge, parity) component."""
    return dict(Counter(mono_grade(m) for m in s))


# --- text format ---------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<mode>(?P<fam>beta|gamma|b|c)\[\s*(?P<i>-?\d+)\s*,\s*(?P<n>-?\d+)\s*\])"
    r"|(?P<vac>\|0>)|(?P<rat>[+-]?\d+(?:/\d+)?))"
)


def _parse_line(line: str, lineno: int) -> State | None:
    pos = 0
    text = line.rstrip()
    if not text.strip():
        return None
    m = _TOKEN.match(text, pos)
    if not m or m.group("rat") is None:
        col = len(text) - len(text.lstrip()) + 1
        raise ParseError("expected a rational coefficient", lineno, col)
    coeff = Fraction(m.group("rat"))
    pos = m.end()
    modes = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.group("rat") is not None:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError("expected a mode or '|0>'", lineno, col)
        pos = m.end()
        if m.group("vac"):
            break
        x = mode(m.group("fam"), int(m.group("i")), int(m.group("n")))
        if x.index < 1 or x.n > -1:
            raise ParseError(f"invalid creation mode {x}", lineno, m.start("mode") + 1)
        modes.append(x)
    if text[pos:].strip():
        raise ParseError("trailing characters after '|0>'", lineno, pos + 1)
    return canonicalize(modes, coeff)


def parse_state(text: str) -> State:
    """Parse the one-term-per-line format produced by :func:`format_state`."""
    total = State.zero()
    for lineno, line in enumerate(text.splitlines(), start=1):
        term = _parse_line(line, lineno)
        if term is not None:
            total = total + term
    return total


def _mono_key(mono: Monomial):
    return (mono_twice_weight(mono), len(mono), mono)


def format_term(mono: Monomial, coeff: Fraction) -> str:
    return " ".join([str(coeff), *(str(x) for x in mono), "|0>"])


def format_state(s: State) -> str:
    if not s:
        return "0 |0>"
    return "\n".join(format_term(m, s.coeff(m)) for m in sorted(s, key=_mono_key))


# --- basis enumeration ---------------------------------------------------

def creation_modes(rank: int, twice_hmax: int, sector: str = "fermionic") -> list[ModeRef]:
    """All creation modes of positive weight up to the bound, canonically sorted."""
    fams = (B, C) if sector == "fermionic" else (B, C, BETA, GAMMA)
    out = []
    for f in fams:
        for i in range(1, rank + 1):
            n = -1
            while True:
                tw = TWICE_WEIGHT[f] - 2 - 2 * n
                if tw > twice_hmax:
                    break
                if tw > 0:
                    out.append(ModeRef(f, i, n))
                n -= 1
    return sorted(out)


def iter_basis(
    rank: int,
    hmax,
    sector: str = "fermionic",
    gmin: int = 0,
    gmax: int = 1,
) -> Iterator[Monomial]:
    """Canonical monomials of weight <= hmax.

    ``sector='fermionic'`` uses only b, c modes.  ``sector='full'`` adds
    beta, gamma modes; weight-zero ``gamma[i,-1]`` factors are regulated by
    requiring their total count g to satisfy ``gmin <= g <= gmax``.
    """
    if sector not in ("fermionic", "full"):
        raise FockError(f"unknown sector {sector!r}")
    twice_hmax = int(Fraction(hmax) * 2)
    modes = creation_modes(rank, twice_hmax, sector)
    zero_modes = [ModeRef(GAMMA, i, -1) for i in range(1, rank + 1)] if sector == "full" else []
    if sector == "fermionic":
        gmin = gmax = 0

    def positive(start: int, budget: int) -> Iterator[tuple]:
        yield ()
        for k in range(start, len(modes)):
            x = modes[k]
            tw = TWICE_WEIGHT[x[0]] - 2 - 2 * x[2]
            if tw > budget:
                continue
            nxt = k + 1 if x[0] <= C else k
            for rest in positive(nxt, budget - tw):
                yield (x,) + rest

    def zero_part(start: int, left: int) -> Iterator[tuple]:
        yield ()
        if left == 0:
            return
        for k in range(start, len(zero_modes)):
            for rest in zero_part(k, left - 1):
                yield (zero_modes[k],) + rest

    zero_choices = [z for z in zero_part(0, gmax) if gmin <= len(z)]
    for pos in positive(0, twice_hmax):
        for z in zero_choices:
            yield tuple(sorted(pos + z))


def basis(rank: int, hmax, sector: str = "fermionic", gmin: int = 0, gmax: int = 1) -> list[Monomial]:
    return sorted(iter_basis(rank, hmax, sector, gmin, gmax), key=_mono_key)


def basis_states(rank: int, hmax, sector: str = "fermionic", gmax: int = 1) -> list[State]:
    return [State._raw({m: Fraction(1)}) for m in basis(rank, hmax, sector, 0, gmax)]
