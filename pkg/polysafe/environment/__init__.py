from .cells import Cell, Environment, ValidationIssue, ValidationReport, overlap, validate
from .io import EnvironmentFormatError, environment_from_dict, environment_to_dict, load, save
from .polytope import ChebyshevError, Polytope, chebyshev_center, contains

__all__ = [
    "Cell",
    "ChebyshevError",
    "Environment",
    "EnvironmentFormatError",
    "Polytope",
    "ValidationIssue",
    "ValidationReport",
    "chebyshev_center",
    "contains",
    "environment_from_dict",
    "environment_to_dict",
    "load",
    "overlap",
    "save",
    "validate",
]
