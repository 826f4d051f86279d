"""Exact row reduction over the rationals, for spans of states and small solves."""
from __future__ import annotations

from fractions import Fraction

from .fock import State


class Span:
    """Incrementally built span of states, kept in reduced echelon form."""

    def __init__(self):
        self._rows: list[tuple[object, dict]] = []  # (pivot monomial, row)

    def _reduce(self, vec: dict) -> dict:
        vec = dict(vec)
        for pivot, row in self._rows:
            c = vec.get(pivot)
            if c:
                for k, v in row.items():
                    nv = vec.get(k, 0) - c * v
                    if nv:
                        vec[k] = nv
                    else:
                        vec.pop(k, None)
        return vec

    def add(self, s: State) -> bool:
        """Add ``s``; return True iff it enlarged the span."""
        vec = self._reduce(dict(s.items()))
        if not vec:
            return False
        pivot = min(vec, key=lambda m: (len(m), m))
        inv = 1 / Fraction(vec[pivot])
        row = {k: v * inv for k, v in vec.items()}
        for i, (p, r) in enumerate(self._rows):
            c = r.get(pivot)
            if c:
                nr = dict(r)
                for k, v in row.items():
                    nv = nr.get(k, 0) - c * v
                    if nv:
                        nr[k] = nv
                    else:
                        nr.pop(k, None)
                self._rows[i] = (p, nr)
        self._rows.append((pivot, row))
        return True

    def contains(self, s: State) -> bool:
        return not self._reduce(dict(s.items()))

    def __len__(self) -> int:
        return len(self._rows)


def solve_columns(columns: list[dict], target: dict):
    """Solve sum_i x_i columns[i] = target exactly, vectors given as dicts.

    Returns ``(solution, unique)``; ``solution`` is None when inconsistent.
    Free unknowns are set to zero.
    """
    n = len(columns)
    keys = set(target)
    for col in columns:
        keys |= set(col)
    rows = []
    for k in sorted(keys):
        rows.append([Fraction(col.get(k, 0)) for col in columns] + [Fraction(target.get(k, 0))])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[n] for row in rows[r:]):
        return None, False
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return x, len(pivots) == n
