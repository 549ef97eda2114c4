"""Cancellation of Z in diagram categories of abelian groups, checked exactly."""

from .linalg import IntMatrix, hnf, snf, solve_in_row_lattice, left_kernel_basis
from .groups import (
    Lattice,
    GroupInvariants,
    AmbientFunctional,
    lattice_from_generators,
    member,
    quotient_invariants,
    pair_iso_decide,
    kernel_of_functional,
)
from .diagrams import Poset, InclusionDiagram, build_chain_diagram, kernel_chain, parse_chain
from .iso import decide_iso, IsoVerdict
from .kripke import parse_formula, forces, countermodel_search, classical_tautology

__all__ = [
    "IntMatrix", "hnf", "snf", "solve_in_row_lattice", "left_kernel_basis",
    "Lattice", "GroupInvariants", "AmbientFunctional", "lattice_from_generators", "member",
    "quotient_invariants", "pair_iso_decide", "kernel_of_functional",
    "Poset", "InclusionDiagram", "build_chain_diagram", "kernel_chain", "parse_chain",
    "decide_iso", "IsoVerdict",
    "parse_formula", "forces", "countermodel_search", "classical_tautology",
]

__version__ = "0.1.0"
