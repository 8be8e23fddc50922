"""Exception hierarchy shared by every estimator and solver."""


class InvOptError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(InvOptError, ValueError):
    pass


class TooLarge(InvOptError, ValueError):
    """Instance exceeds the size an enumeration oracle accepts."""


class SolverError(InvOptError):
    pass


class Infeasible(SolverError):
    pass


class Unbounded(SolverError):
    pass


class IterationLimit(SolverError):
    pass


class ForwardUnbounded(Unbounded):
    pass


class ObservationInfeasible(InvOptError):
    """An observed decision violates the known forward constraints."""


class InverseInfeasible(InvOptError):
    """No admissible parameter renders the observation optimal."""


class InfeasibleTheta(InverseInfeasible):
    pass


class BigMViolation(InvOptError):
    """A big-M constant was too small for the linearized complementarity."""

    def __init__(self, message, big_m=None):
        super().__init__(message)
        self.big_m = big_m


class NoCandidateFacet(InverseInfeasible):
    pass


class TargetUnattainable(InverseInfeasible):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class CompletionInfeasible(InverseInfeasible):
    pass


class UnsupportedCombination(InvOptError, ValueError):
    pass


class UnsupportedObjective(UnsupportedCombination):
    pass


class NormalizationRequired(InvOptError, ValueError):
    pass


class EmptyNet(InvOptError, ValueError):
    pass


class InfeasiblePaths(InvOptError, ValueError):
    pass


class DegenerateRange(InvOptError, ValueError):
    pass


class DecompositionInfeasible(InvOptError, ValueError):
    pass


class DegenerateThetaWarning(UserWarning):
    """The estimate (or the admissible set) contains the trivial parameter 0."""
