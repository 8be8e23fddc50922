from .data import (
    DEGENERATE,
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    Dataset,
    EstimationResult,
    MDPModel,
    Observation,
)
from .forward import ConvexForwardModel, LinearForwardModel, as_convex, canonicalize
from .objectives import Basis, Linear, ObjectiveSpec, PowerTerm, Quadratic
from .space import (
    FixedComponent,
    L1Sphere,
    LInfSphere,
    LinearCost,
    NormToPrior,
    ParameterSpace,
    Polyhedron,
    Zero,
    validate_parameter,
)

__all__ = [
    "Basis",
    "ConvexForwardModel",
    "DEGENERATE",
    "Dataset",
    "EstimationResult",
    "FixedComponent",
    "INFEASIBLE",
    "ITERATION_LIMIT",
    "L1Sphere",
    "LInfSphere",
    "Linear",
    "LinearCost",
    "LinearForwardModel",
    "MDPModel",
    "NormToPrior",
    "OPTIMAL",
    "ObjectiveSpec",
    "Observation",
    "ParameterSpace",
    "Polyhedron",
    "PowerTerm",
    "Quadratic",
    "Zero",
    "as_convex",
    "canonicalize",
    "validate_parameter",
]
