"""Fractional factorial designs from orthogonality constraints.

Constraints on a counting function become homogeneous integer systems whose
nonnegative solutions are the admissible fractions. The package builds those
systems, solves them (Hilbert bases, bounded enumeration), walks fibers with
moves and analyses the results.
"""

from .constraints import (
    ConstraintSystem,
    build_margin_system,
    build_strata_system,
    oa_constraints,
    sudoku_constraints,
    sudoku_spec,
)
from .design import DesignError, DesignSpec, regular_fraction
from .lattice import BudgetExhausted, enumerate_bounded, graver_basis, hilbert_basis
from .moves import move_basis, walk

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "ConstraintSystem",
    "DesignError",
    "DesignSpec",
    "build_margin_system",
    "build_strata_system",
    "enumerate_bounded",
    "graver_basis",
    "hilbert_basis",
    "move_basis",
    "oa_constraints",
    "regular_fraction",
    "sudoku_constraints",
    "sudoku_spec",
    "walk",
]
