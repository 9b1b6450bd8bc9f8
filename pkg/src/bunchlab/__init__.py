"""Bunched-implication proof checking, tiling reductions and finite frame semantics."""

from .syntax import (
    COMMUTATIVE, NONCOMMUTATIVE, ParseError, Sequent, bunch_canonical, bunch_depth,
    parse_bunch, parse_formula, parse_sequent, print_bunch, print_formula, print_sequent,
)
from .calculus import (
    Proof, check_proof, comma_growth_derivation, multiplicative_length, parse_proof,
    print_proof,
)
from .search import Budget, prove_bounded
from .tiling import TileSet, compile_phi, search_periodic, tiles_region
from .frames import (
    Frame, Model, build_truncated_model, complex_algebra_check, countermodel_search,
    eval_abstract, evaluate, extract_tiling, validate_frame,
)
from .acm import Machine, accepts_bounded, encode, soundness_proof

__version__ = "0.1.0"
