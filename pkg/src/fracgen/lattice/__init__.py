from .kernel import kernel_basis, unit_kernel_basis
from .solver import (
    BudgetExhausted,
    LiftState,
    canonical_sort,
    enumerate_bounded,
    fiber_graver,
    graver_basis,
    hilbert_basis,
    minimal_elements,
    project_and_lift,
)

__all__ = [
    "BudgetExhausted",
    "LiftState",
    "canonical_sort",
    "enumerate_bounded",
    "fiber_graver",
    "graver_basis",
    "hilbert_basis",
    "kernel_basis",
    "minimal_elements",
    "project_and_lift",
    "unit_kernel_basis",
]
