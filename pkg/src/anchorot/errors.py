"""Exception hierarchy shared by all anchorot modules."""


class AnchorError(Exception):
    """Base class for all anchorot errors."""


class ValidationError(AnchorError):
    """Input data failed a structural or numerical validity check."""


class NonSquareError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class NegativeWeightError(ValidationError):
    pass


class WeightSumError(ValidationError):
    """Weights deviate from unit mass by more than the repair tolerance."""


class InvalidExponentError(ValidationError):
    """Ground-cost exponent outside the supported set {1, 2}."""


class MethodExponentMismatchError(ValidationError):
    """The sweep evaluator only supports exponent p = 1."""


class InvalidParamsError(ValidationError):
    pass


class DisconnectedError(ValidationError):
    """Graph is not connected; geodesic costs would be infinite."""

    def __init__(self, component_count: int):
        self.component_count = component_count
        super().__init__(f"graph has {component_count} connected components")


class DegenerateVarianceError(AnchorError):
    """Correlation is undefined because one sequence is constant."""


class ParseError(AnchorError):
    """A matrix or graph file could not be parsed.

    ``location`` is a line number (CSV/edge lists) or byte offset (binary).
    """

    def __init__(self, message: str, location: int | None = None):
        self.location = location
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
