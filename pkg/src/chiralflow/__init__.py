"""Exact free-field computations for the rank-d bc-beta-gamma system, its N=2
currents, the spectral-flow operators sigma and tau, and graded characters."""
from .fock import (
    FockError,
    ModeRef,
    ParseError,
    State,
    basis,
    basis_states,
    canonicalize,
    format_state,
    generator,
    grade,
    mode,
    parse_state,
)
from .modes import apply_mode, field_coeff, nop, ope_singular, top_pole, translate
from .n2 import CurrentSet, build_currents, make_currents, verify_n2_closure, verify_omega_relations
from .report import FAIL, MEASURED, PASS, Report

__version__ = "0.1.0"
