"""lightray: boundary-data probing and light-ray-transform recovery of
time-dependent vector and scalar potentials of a hyperbolic Schrodinger-type
equation on a space-time cylinder."""

from .grids import SpaceTimeGrid, ComplexField
from .bumps import FieldRecipe, BumpFactor, SeparableTerm
from .potentials import (
    VectorPotential,
    ScalarPotential,
    GaugeFunction,
    gauge_apply,
    divergence_project,
    divergence_residual,
    make_test_potential,
)

__all__ = [
    "SpaceTimeGrid",
    "ComplexField",
    "FieldRecipe",
    "BumpFactor",
    "SeparableTerm",
    "VectorPotential",
    "ScalarPotential",
    "GaugeFunction",
    "gauge_apply",
    "divergence_project",
    "divergence_residual",
    "make_test_potential",
]

__version__ = "0.1.0"
