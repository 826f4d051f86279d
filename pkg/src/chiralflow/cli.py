"""Command-line driver: one subcommand per verification, JSON-lines reports.

Exit status is 0 when every report is PASS or MEASURED, 1 when any report
FAILs, and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import flow, n2, series
from .fock import FockError, format_state, generator, parse_state
from .modes import ope_singular
from .report import FAIL, MEASURED, Report

DEFAULTS = {"rank": 1, "hmax": "2", "kmax": 3, "gmax": 1, "n": 1, "mode_range": 2, "sector": None}
_INT_KEYS = {"rank", "kmax", "gmax", "n", "mode_range"}


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS and key not in ("format", "stable"):
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        if key in _INT_KEYS:
            value = int(value)
        elif key == "stable":
            value = value.lower() in ("1", "true", "yes", "on")
        out[key] = value
    return out


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rank", type=int)
    p.add_argument("--hmax", type=_fraction)
    p.add_argument("--kmax", type=int)
    p.add_argument("--gmax", type=int, help="gamma zero-mode regulator for the full sector")
    p.add_argument("--sector", choices=("fermionic", "full"))
    p.add_argument("-n", type=int, dest="n", help="spectral-flow power")
    p.add_argument("--mode-range", type=int, dest="mode_range")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--text", dest="format", action="store_const", const="text")
    p.add_argument("--stable", action="store_true", default=None, help="omit timing fields")
    p.add_argument("--config", help="key = value file overriding the defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="algebra self-checks")
    p.add_argument("suite", choices=("n2", "omega", "borcherds", "twist"))
    _common(p)

    p = sub.add_parser("flow", help="spectral-flow operator checks")
    p.add_argument("suite", choices=("constancy", "inverse", "intertwine", "transparency",
                                     "locality", "shift", "apply"))
    p.add_argument("--state", help="state text for 'apply' (terms separated by ';')")
    p.add_argument("--inverse", action="store_true", help="apply tau instead of sigma")
    p.add_argument("--literal", action="store_true", help="use the parity factor (-1)^F0 at every rank")
    _common(p)

    p = sub.add_parser("ope", help="singular OPE of two states")
    p.add_argument("a")
    p.add_argument("b")
    _common(p)

    p = sub.add_parser("character", help="graded dimensions and traces")
    p.add_argument("suite", choices=("dims", "trace", "twisted", "ellipticity"))
    p.add_argument("--central-charge", type=_fraction, dest="c")
    _common(p)
    return parser


def _settings(args: argparse.Namespace) -> argparse.Namespace:
    merged = dict(DEFAULTS, format="json", stable=False)
    if args.config:
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None or key not in merged:
            merged[key] = value
    merged["hmax"] = Fraction(merged["hmax"])
    return argparse.Namespace(**merged)


def resolve_state(text: str, rank: int) -> "State":
    """A current name (L, J, Q, G, omega_plus, omega_minus), a generator
    such as ``b1`` or ``gamma2``, or state text with terms separated by ';'."""
    names = ("L", "J", "Q", "G", "omega_plus", "omega_minus")
    if text in names:
        return n2.make_currents(rank).current(text)
    for fam in ("beta", "gamma", "b", "c"):
        if text.startswith(fam) and text[len(fam):].isdigit():
            return generator(fam, int(text[len(fam):]))
    return parse_state(text.replace(";", "\n"))


def _run_verify(a) -> list[Report]:
    cs = n2.make_currents(a.rank)
    if a.suite == "n2":
        return [n2.verify_n2_closure(cs, {"hmax": a.hmax, "sector": a.sector or "full", "gmax": a.gmax})]
    if a.suite == "omega":
        return [n2.verify_omega_relations(cs)]
    if a.suite == "twist":
        return [n2.verify_twist(cs, 1), n2.verify_twist(cs, -1)]
    return [n2.borcherds_suite(cs, a.hmax, a.mode_range, a.sector or "full", a.gmax)]


def _run_flow(a) -> list[Report]:
    cs = n2.make_currents(a.rank)
    sector = a.sector or "full"
    sigma = flow.sigma_kernel(cs, literal=a.literal)
    tau = flow.tau_kernel(cs, literal=a.literal)
    if a.suite == "constancy":
        return [flow.constancy_check(k, a.rank, a.hmax, a.kmax, sector, a.gmax) for k in (sigma, tau)]
    if a.suite == "inverse":
        return [flow.inverse_check(cs, a.hmax, sector, a.gmax, sigma, tau)]
    if a.suite == "intertwine":
        return [flow.intertwining_report(cs, a.hmax, a.mode_range, sector, a.gmax)]
    if a.suite == "transparency":
        return [flow.bosonic_transparency_check(cs, a.hmax, a.mode_range, a.gmax, sigma)]
    if a.suite == "shift":
        return [flow.measure_shift(cs, a.hmax, a.sector or "fermionic", a.gmax, sigma)]
    if a.suite == "locality":
        d, J = a.rank, cs.J
        return [flow.exp_locality_check(x, y, N, d, a.hmax, a.sector or "fermionic", a.gmax)
                for x, y, N in ((-J, -J, d), (J, J, d), (-J, J, -d))]
    if not a.state:
        raise UsageError("flow apply needs --state")
    s = resolve_state(a.state, a.rank)
    kernel = tau if a.inverse else sigma
    rep = Report(f"apply_{kernel.direction}", a.rank, status=MEASURED)
    rep.measured = {"input": format_state(s).splitlines(),
                    "output": format_state(flow.flow_coeff(kernel, 0, s)).splitlines()}
    return [rep]


def _run_ope(a) -> list[Report]:
    x, y = resolve_state(a.a, a.rank), resolve_state(a.b, a.rank)
    rep = Report("ope", a.rank, status=MEASURED)
    rep.measured = {"poles": {str(n + 1): format_state(v).splitlines()
                              for n, v in sorted(ope_singular(x, y).items())}}
    return [rep]


def _run_character(a) -> tuple[list[Report], list[str]]:
    sector = a.sector or "fermionic"
    extra: list[str] = []
    if a.suite == "ellipticity":
        return [series.ellipticity_check(a.rank, a.n, a.hmax, c=a.c, sector=sector, gmax=a.gmax)], extra
    rep = Report(a.suite, a.rank, {"hmax": a.hmax, "sector": sector}, status=MEASURED)
    if a.suite == "dims":
        dims = series.graded_dims(a.rank, sector, a.hmax, a.gmax)
        extra = dims.to_text().splitlines()
        rep.measured = {"components": len(dims.table), "total": sum(dims.table.values())}
    else:
        if a.suite == "trace":
            f = series.trace_series(series.graded_dims(a.rank, sector, a.hmax, a.gmax), a.c)
        else:
            rep.window["n"] = a.n
            f = series.twisted_trace(a.rank, a.n, sector, a.hmax, a.c, a.gmax)
        extra = f.to_text().splitlines()
        rep.measured = {"terms": len(f), "cap": f.cap, "slope": f.slope}
    rep.measured["lines"] = extra
    return [rep], extra


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        a = _settings(args)
        if a.rank < 1:
            raise UsageError("--rank must be >= 1")
        extra: list[str] = []
        if a.command == "verify":
            reports = _run_verify(a)
        elif a.command == "flow":
            reports = _run_flow(a)
        elif a.command == "ope":
            reports = _run_ope(a)
        else:
            reports, extra = _run_character(a)
    except (UsageError, FockError, OSError, ValueError) as exc:
        parser.exit(2, f"chiralflow: error: {exc}\n")
    for rep in reports:
        if a.format == "text":
            if rep.measured and "lines" in rep.measured:
                rep.measured.pop("lines")
            print(rep.to_text(a.stable), file=out)
            for line in extra:
                print(line, file=out)
        else:
            print(rep.to_json(a.stable), file=out)
    return 1 if any(r.status == FAIL for r in reports) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
