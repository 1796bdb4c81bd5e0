"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`GraphFilterError`. Errors that describe bad input also derive from
:class:`ValueError`; errors that describe a numerical breakdown derive from
:class:`NumericalError` so the CLI can map them to a distinct exit code.
"""


class GraphFilterError(Exception):
    """Base class for all library errors."""


class InputError(GraphFilterError, ValueError):
    """Invalid arguments or malformed data."""


class NumericalError(GraphFilterError, ArithmeticError):
    """A computation could not be carried out reliably."""


# graph-core
class DimensionMismatch(InputError):
    pass


class IsolatedVertex(InputError):
    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} has zero degree; normalized Laplacian undefined")
        self.vertex = vertex


class AsymmetricInput(InputError):
    pass


class DuplicateEdge(InputError):
    pass


class NormTargetInfeasible(NumericalError):
    def __init__(self, target: float, achieved: float | None, reason: str = ""):
        msg = f"cannot reach perturbation norm {target:g}"
        if achieved is not None:
            msg += f" (achieved {achieved:g})"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.target = target
        self.achieved = achieved


# linalg
class NoConvergence(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class NotSymmetric(InputError):
    pass


# filters
class NoScalarResponse(InputError):
    pass


class NoSpatialForm(InputError):
    pass


class WrongVariant(InputError):
    pass


class PoleAtLambda(NumericalError):
    pass


class PoleAtEigenvalue(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class DecayFlagMissing(InputError):
    pass


class QuadratureUnderResolved(InputError):
    pass


# stability
class PerturbationTooLarge(InputError):
    pass


class DegeneracyConstructionFailed(NumericalError):
    pass


# io
class MalformedRow(InputError):
    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line
