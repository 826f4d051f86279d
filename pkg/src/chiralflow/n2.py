"""Free-field N=2 currents at central charge 3d, the volume states, and the twist.

Only J is fixed a priori (``J = sum_i c^i b_i``).  L, Q, G are built from a
small family of candidate formulas whose relative signs are resolved by
requiring the N=2 OPEs to close; the resolved signs live in
``data/n2_convention.txt`` (regenerate with ``python -m chiralflow.n2``).
"""
from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .fock import FAMILY_NAMES, State, basis, basis_states, format_state, generator, mono_charge, mono_twice_weight
from .modes import borcherds_block, clear_caches, field_coeff, nop, ope_singular, translate
from .report import Report

CURRENT_NAMES = ("L", "J", "Q", "G")
SIGN_NAMES = ("Q", "G", "L_beta_dgamma", "L_dc_b", "L_c_db")
DEFAULT_CANDIDATE = (1, 1, 1, 1, -1)
CONVENTION_FILE = "n2_convention.txt"


class N2ClosureError(RuntimeError):
    pass


@dataclass(frozen=True)
class CurrentSet:
    rank: int
    L: State
    J: State
    Q: State
    G: State
    omega_plus: State
    omega_minus: State
    signs: tuple = DEFAULT_CANDIDATE

    @property
    def central_charge(self) -> Fraction:
        return Fraction(3 * self.rank)

    def current(self, name: str) -> State:
        return {"L": self.L, "J": self.J, "Q": self.Q, "G": self.G,
                "omega_plus": self.omega_plus, "omega_minus": self.omega_minus}[name]


def _sum(states) -> State:
    total = State.zero()
    for s in states:
        total = total + s
    return total


def omega_states(d: int) -> tuple[State, State]:
    """Omega+ = c^1...c^d and its dual, normalized so Omega+_(d-1) Omega- = |0>.

    The dual is b_d ... b_1, i.e. (-1)^(d(d-1)/2) b_1 ... b_d in canonical order.
    """
    plus, minus = State.vacuum(), State.vacuum()
    for i in range(d, 0, -1):
        plus = nop(generator("c", i), plus)
    for i in range(1, d + 1):
        minus = nop(generator("b", i), minus)
    return plus, minus


def build_currents(d: int, signs=DEFAULT_CANDIDATE) -> CurrentSet:
    """Assemble the candidate currents for a given sign choice, unchecked."""
    if d < 1:
        raise ValueError("rank must be >= 1")
    sq, sg, sbg, sdc, scd = signs
    idx = range(1, d + 1)
    b = {i: generator("b", i) for i in idx}
    c = {i: generator("c", i) for i in idx}
    beta = {i: generator("beta", i) for i in idx}
    dgamma = {i: translate(generator("gamma", i)) for i in idx}
    J = _sum(nop(c[i], b[i]) for i in idx)
    Q = _sum(nop(beta[i], c[i]) for i in idx) * sq
    G = _sum(nop(b[i], dgamma[i]) for i in idx) * sg
    L = (_sum(nop(beta[i], dgamma[i]) for i in idx) * sbg
         + _sum(nop(translate(c[i]), b[i]) for i in idx) * Fraction(sdc, 2)
         + _sum(nop(c[i], translate(b[i])) for i in idx) * Fraction(scd, 2))
    op, om = omega_states(d)
    return CurrentSet(d, L, J, Q, G, op, om, tuple(signs))


def expected_ope(cs: CurrentSet, a: str, b: str) -> dict[int, State]:
    """N=2 structure constants at c = 3d, as {n: a_(n) b}."""
    d = cs.rank
    L, J, Q, G = cs.L, cs.J, cs.Q, cs.G
    vac = State.vacuum()
    dL, dJ, dQ, dG = translate(L), translate(J), translate(Q), translate(G)
    half = Fraction(1, 2)
    table = {
        ("L", "L"): {0: dL, 1: 2 * L, 3: vac * Fraction(3 * d, 2)},
        ("L", "J"): {0: dJ, 1: J},
        ("L", "Q"): {0: dQ, 1: Q * Fraction(3, 2)},
        ("L", "G"): {0: dG, 1: G * Fraction(3, 2)},
        ("J", "L"): {1: J},
        ("J", "J"): {1: vac * d},
        ("J", "Q"): {0: Q},
        ("J", "G"): {0: -G},
        ("Q", "L"): {0: dQ * half, 1: Q * Fraction(3, 2)},
        ("G", "L"): {0: dG * half, 1: G * Fraction(3, 2)},
        ("Q", "J"): {0: -Q},
        ("G", "J"): {0: G},
        ("Q", "Q"): {},
        ("G", "G"): {},
        ("Q", "G"): {0: L + dJ * half, 1: J, 2: vac * d},
        ("G", "Q"): {0: L - dJ * half, 1: -J, 2: vac * d},
    }
    return {n: v for n, v in table[(a, b)].items() if v}


def _window_dict(window) -> dict:
    if window is None:
        return {}
    return dict(window)


def check_gradings(cs: CurrentSet, hmax=2, sector="full", gmax=1) -> tuple[bool, str | None]:
    """L_0 and J_0 act on basis states by the combinatorial weight and charge."""
    for mono in basis(cs.rank, hmax, sector, 0, gmax):
        x = State.from_dict({mono: 1})
        h = Fraction(mono_twice_weight(mono), 2)
        m = mono_charge(mono)
        if field_coeff(cs.L, 1, x) != x * h:
            return False, f"L_(1) on {format_state(x)}"
        if field_coeff(cs.J, 0, x) != x * m:
            return False, f"J_(0) on {format_state(x)}"
    return True, None


def verify_n2_closure(cs: CurrentSet, window=None) -> Report:
    """Compare every OPE among L, J, Q, G with the N=2 table at c = 3d.

    ``window`` (a dict with ``hmax`` and optionally ``sector``, ``gmax``)
    additionally checks that L_(1), J_(0) reproduce the weight/charge grading.
    """
    t0 = time.perf_counter()
    rep = Report("n2_closure", cs.rank, _window_dict(window))
    for a, b in itertools.product(CURRENT_NAMES, repeat=2):
        got = ope_singular(cs.current(a), cs.current(b))
        want = expected_ope(cs, a, b)
        if got != want:
            bad = min(set(got) ^ set(want) | {n for n in got if got.get(n) != want.get(n)})
            rep.fail(f"{a}(z){b}(w): pole order {bad + 1} mismatch",
                     f"{a}_({bad}){b} = {format_state(got.get(bad, State.zero()))}")
    if window is not None and rep.ok:
        ok, where = check_gradings(cs, window.get("hmax", 2), window.get("sector", "full"),
                                   window.get("gmax", 1))
        if not ok:
            rep.fail("zero modes disagree with grading", where)
    rep.measured = {"central_charge": cs.central_charge,
                    "J_(1)J": field_coeff(cs.J, 1, cs.J).coeff(())}
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


def verify_omega_relations(cs: CurrentSet) -> Report:
    """The four properties of the volume states Omega+ and Omega-."""
    t0 = time.perf_counter()
    d = cs.rank
    rep = Report("omega_relations", d)
    op, om = cs.omega_plus, cs.omega_minus
    for sgn, omega, name in ((1, op, "omega_plus"), (-1, om, "omega_minus")):
        sing = ope_singular(cs.J, omega)
        if sing != {0: omega * (sgn * d)}:
            rep.fail(f"(1) J(z){name}(w) is not {sgn * d}{name}/(z-w)",
                     format_state(sing.get(0, State.zero())))
        if nop(cs.J, omega) != translate(omega) * sgn:
            rep.fail(f"(4) :J {name}: != {'+' if sgn > 0 else '-'}d {name}", format_state(nop(cs.J, omega)))
    for cur, omega, label in ((cs.Q, op, "Q(z)omega_plus(w)"), (cs.G, om, "G(z)omega_minus(w)")):
        sing = ope_singular(cur, omega)
        if sing:
            n = min(sing)
            rep.fail(f"(2) {label} is singular at order {n + 1}", format_state(sing[n]))
    sing = ope_singular(op, om)
    top = max(sing, default=None)
    if top != d - 1 or sing[top] != State.vacuum():
        rep.fail(f"(3) leading pole of omega_plus(z)omega_minus(w) is not 1/(z-w)^{d}",
                 format_state(sing.get(d - 1, State.zero())))
    rep.measured = {"top_pole_order": (top + 1) if top is not None else 0,
                    "lower_poles": sorted(n + 1 for n in sing if n != top)}
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


def twist(cs: CurrentSet, sign: int) -> State:
    """Topologically twisted Virasoro L + sign * (1/2) dJ."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return cs.L + translate(cs.J) * Fraction(sign, 2)


def verify_twist(cs: CurrentSet, sign: int) -> Report:
    t0 = time.perf_counter()
    rep = Report("topological_twist", cs.rank, {"sign": sign})
    Lt = twist(cs, sign)
    got = ope_singular(Lt, Lt)
    want = {0: translate(Lt), 1: 2 * Lt}
    if got != want:
        n = min(k for k in set(got) | set(want) if got.get(k) != want.get(k))
        rep.fail(f"twisted L(z)L(w) wrong at pole order {n + 1}", format_state(got.get(n, State.zero())))
    rep.measured = {"central_charge": 2 * field_coeff(Lt, 3, Lt).coeff(())}
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


def thread_count(default: int | None = None) -> int:
    """Worker cap from CHIRALFLOW_THREADS (defaults to the CPU count)."""
    raw = os.environ.get("CHIRALFLOW_THREADS")
    n = int(raw) if raw else (default or os.cpu_count() or 1)
    return max(1, n)


def borcherds_fields(cs: CurrentSet) -> list[tuple[str, State]]:
    """Generators b, c, beta, gamma followed by J, Q, G, L and Omega+-."""
    out = [(f"{fam}{i}", generator(fam, i)) for fam in FAMILY_NAMES for i in range(1, cs.rank + 1)]
    out += [(name, cs.current(name)) for name in ("J", "Q", "G", "L", "omega_plus", "omega_minus")]
    return out


def _borcherds_row(args) -> list[tuple[str, str, bool, str | None]]:
    a_name, a, fields, mn, window = args
    rows = []
    for b_name, b in fields:
        ok, bad = borcherds_block(a, b, mn, window)
        rows.append((a_name, b_name, ok, None if ok else format_state(bad)))
    return rows


def borcherds_suite(cs: CurrentSet, hmax=3, mrange: int = 2, sector: str = "full", gmax: int = 1,
                    threads: int | None = None, fields=None) -> Report:
    """Commutator formula [a_(m), b_(n)] for every ordered pair of fields, |m|, |n| <= mrange."""
    t0 = time.perf_counter()
    fields = fields if fields is not None else borcherds_fields(cs)
    window = basis_states(cs.rank, hmax, sector, gmax)
    rep = Report("borcherds", cs.rank, {"hmax": Fraction(hmax), "sector": sector, "mode_range": mrange,
                                        **({"gmax": gmax} if sector == "full" else {})})
    mn = [(m, n) for m in range(-mrange, mrange + 1) for n in range(-mrange, mrange + 1)]
    jobs = [(name, a, fields, mn, window) for name, a in fields]
    workers = min(threads or thread_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = [r for chunk in pool.map(_borcherds_row, jobs) for r in chunk]
    else:
        rows = [r for job in jobs for r in _borcherds_row(job)]
    for a_name, b_name, ok, bad in rows:
        if not ok:
            rep.fail(f"commutator formula fails for ({a_name}, {b_name})", bad)
    rep.measured = {"pairs": len(rows), "window_states": len(window), "modes_per_pair": len(mn)}
    clear_caches()  # the memo tables grow large on big windows
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


def closure_ok(cs: CurrentSet) -> bool:
    return verify_n2_closure(cs).ok and verify_omega_relations(cs).ok


def search_conventions(d: int = 1) -> list[tuple]:
    """All candidate sign choices passing closure and the Omega relations."""
    return [s for s in itertools.product((1, -1), repeat=len(SIGN_NAMES))
            if closure_ok(build_currents(d, s))]


def resolve_convention(ranks=(1, 2), tiebreak: bool = True) -> dict:
    """Search the sign space and pick a convention.

    Ties are broken in favour of conventions under which the flow operator
    satisfies sigma Q_(m) = Q_(m+1) sigma; if none does, every passing
    convention is recorded and the first in enumeration order is used.
    """
    passing = search_conventions(ranks[0])
    passing = [s for s in passing if all(closure_ok(build_currents(d, s)) for d in ranks[1:])]
    if not passing:
        raise N2ClosureError("no candidate sign convention closes the N=2 algebra")
    preferred = passing
    exponents = {}
    if tiebreak and len(passing) > 1:
        from .flow import intertwine_probe

        for s in passing:
            rel = intertwine_probe(build_currents(1, s), "Q", hmax=1, mrange=1)
            exponents[s] = rel.measured.get("e")
        preferred = [s for s in passing if exponents[s] == 1] or passing
    return {"chosen": preferred[0], "passing": passing, "exponents": exponents,
            "tie_broken": len(preferred) < len(passing)}


def _fmt_signs(s) -> str:
    return ",".join(f"{v:+d}" for v in s)


def convention_text(resolution: dict) -> str:
    chosen = resolution["chosen"]
    cs = build_currents(1, chosen)
    lines = [
        "# N=2 free-field sign convention; generated by `python -m chiralflow.n2`",
        "# order: " + " ".join(SIGN_NAMES),
        "signs " + _fmt_signs(chosen),
        "passing " + " ".join(_fmt_signs(s) for s in resolution["passing"]),
    ]
    if resolution["exponents"]:
        lines.append("flow_exponent_e " + " ".join(
            f"{_fmt_signs(s)}:{e:+d}" for s, e in resolution["exponents"].items()))
    for name in ("L", "J", "Q", "G", "omega_plus", "omega_minus"):
        lines.append(f"{name}\t" + " ; ".join(format_state(cs.current(name)).splitlines()))
    return "\n".join(lines) + "\n"


def _convention_path() -> Path:
    return Path(str(resources.files("chiralflow") / "data" / CONVENTION_FILE))


def load_convention() -> tuple | None:
    path = _convention_path()
    if not path.exists():
        return None
    for line in path.read_text().splitlines():
        if line.startswith("signs "):
            return tuple(int(v) for v in line.split()[1].split(","))
    return None


def make_currents(d: int, signs=None) -> CurrentSet:
    """Currents at rank d using the frozen convention; raises if closure fails."""
    if signs is None:
        signs = load_convention() or resolve_convention(tiebreak=False)["chosen"]
    cs = build_currents(d, signs)
    rep = verify_n2_closure(cs)
    if not rep.ok:
        raise N2ClosureError(f"rank {d} currents fail closure: {rep.notes[0]}")
    return cs


def q_g_generate(cs: CurrentSet, max_rounds: int = 4) -> bool:
    """Whether iterated OPEs starting from Q, G reach J and L."""
    from .linalg import Span

    span = Span()
    frontier = [cs.Q, cs.G]
    for s in frontier:
        span.add(s)
    members = list(frontier)
    for _ in range(max_rounds):
        new = []
        for a in members:
            for b in members:
                for v in ope_singular(a, b).values():
                    if span.add(v):
                        new.append(v)
        if not new:
            break
        members += new
    return span.contains(cs.J) and span.contains(cs.L)


def main() -> None:
    resolution = resolve_convention()
    path = _convention_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(convention_text(resolution))
    print(path.read_text(), end="")


if __name__ == "__main__":
    main()
