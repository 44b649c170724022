from .bernstein import (
    BasisMatrices,
    ControlPoints,
    DomainError,
    PolynomialCoeffs,
    basis_transform,
    bernstein_basis,
    bernstein_basis_many,
    closest_parameter,
    coeffs_from_control_points,
    control_points_from_coeffs,
    derivative_matrix,
    evaluate,
)
from .hull import HullBounds, hull_bounds, in_convex_hull
from .reference import ReferenceSystem, build_reference, reference_state_at, shift_block

__all__ = [
    "BasisMatrices",
    "ControlPoints",
    "DomainError",
    "HullBounds",
    "PolynomialCoeffs",
    "ReferenceSystem",
    "basis_transform",
    "bernstein_basis",
    "bernstein_basis_many",
    "build_reference",
    "closest_parameter",
    "coeffs_from_control_points",
    "control_points_from_coeffs",
    "derivative_matrix",
    "evaluate",
    "hull_bounds",
    "in_convex_hull",
    "reference_state_at",
    "shift_block",
]
