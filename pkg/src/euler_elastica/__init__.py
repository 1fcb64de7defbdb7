"""Optimal planar elasticae: exponential map, cut times and a boundary value solver."""

from .expmap import Elastica, exp_endpoint, exp_trajectory, jacobian
from .solver import BoundaryProblem, SolveOptions, SolveReport, solve
from .strata import (CanonicalCoords, Config, Covector, DomainLabel, Stratum,
                     TargetClass, classify_domain, classify_stratum,
                     classify_target)

__all__ = [
    "BoundaryProblem", "CanonicalCoords", "Config", "Covector", "DomainLabel",
    "Elastica", "SolveOptions", "SolveReport", "Stratum", "TargetClass",
    "classify_domain", "classify_stratum", "classify_target", "exp_endpoint",
    "exp_trajectory", "jacobian", "solve",
]
__version__ = "0.1.0"
