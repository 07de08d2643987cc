"""Numerical simulator for synthetic gauge potentials acting on
stationary-light dark-state polaritons in a four-beam EIT medium."""

__version__ = "0.1.0"

from .model import (
    HBAR,
    DerivedConsts,
    GridSpec,
    PhysParams,
    derive_constants,
    validate_params,
)

__all__ = [
    "HBAR",
    "DerivedConsts",
    "GridSpec",
    "PhysParams",
    "derive_constants",
    "validate_params",
]
