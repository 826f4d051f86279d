"""Independent reference computations used by the tests.

Nothing here calls into the package's mode engine: these are textbook
formulas and brute-force enumerations written separately.
"""
from collections import Counter
from fractions import Fraction
from itertools import combinations


def koszul_sign(seq, odd):
    """Sign of sorting ``seq`` counted by inversions among odd entries (None if an odd entry repeats)."""
    odds = [x for x in seq if odd(x)]
    if len(set(odds)) != len(odds):
        return None
    inv = sum(1 for i, j in combinations(range(len(odds)), 2) if odds[i] > odds[j])
    return -1 if inv % 2 else 1


def fermion_dims(d, hmax):
    """(h, m, p) -> dim from prod_k (1 + y q^(k-1/2))^d (1 + y^-1 q^(k-1/2))^d."""
    twice = int(Fraction(hmax) * 2)
    table = Counter({(0, 0, 0): 1})
    for tw in range(1, twice + 1, 2):
        for charge in (1, -1):
            for _ in range(d):
                nxt = Counter()
                for (w, m, p), v in table.items():
                    nxt[(w, m, p)] += v
                    if w + tw <= twice:
                        nxt[(w + tw, m + charge, 1 - p)] += v
                table = nxt
    return {(Fraction(w, 2), m, p): v for (w, m, p), v in table.items()}

