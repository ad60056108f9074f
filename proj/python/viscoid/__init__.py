"""Viscoelastic string with memory: simulation, connecting operator and q identification."""

from ._core import (
    ConfigError,
    Error,
    FormatError,
    NumericalFailure,
    StructuralError,
    ValidationError,
    forward,
    identify,
    mass_matrix,
    resolvent,
    synthesize,
    verify,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "NumericalFailure",
    "StructuralError",
    "ValidationError",
    "forward",
    "identify",
    "mass_matrix",
    "resolvent",
    "synthesize",
    "verify",
]
