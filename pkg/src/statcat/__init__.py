"""Exact finite statistical models: conditionals, sufficiency, completeness,
equivalence certificates, canonical topologies and parametrisations."""

__version__ = "0.1.0"

from .errors import StatcatError
from .inference import check_equivalence, is_complete, is_sufficient
from .measure import FiniteSpace, MeasurableMap, RationalMeasure, SigmaAlgebra
from .morphisms import FiniteModel, classify_morphism, find_reverse_kernel, induce_morphism

__all__ = [
    "FiniteModel",
    "FiniteSpace",
    "MeasurableMap",
    "RationalMeasure",
    "SigmaAlgebra",
    "StatcatError",
    "check_equivalence",
    "classify_morphism",
    "find_reverse_kernel",
    "induce_morphism",
    "is_complete",
    "is_sufficient",
]
