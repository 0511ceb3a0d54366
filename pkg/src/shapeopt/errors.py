"""Exception hierarchy.

Two families matter to callers: ``InputError`` subclasses signal a violated
precondition or malformed input (the CLI maps them to exit code 2), while
``NumericalError`` subclasses signal that a well-posed computation failed to
converge or produced garbage (exit code 3).
"""


class ShapeOptError(Exception):
    """Base class for every error raised by this package."""


class InputError(ShapeOptError, ValueError):
    """Malformed input or a violated precondition."""


class NumericalError(ShapeOptError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input."""


# geometry
class NonConvexInput(InputError):
    pass


class DegenerateInput(InputError):
    pass


class NegativeEpsilon(InputError):
    pass


class NonPositiveScale(InputError):
    pass


class InfeasibleVolume(InputError):
    pass


class NonConvergence(NumericalError):
    pass


class EmptySelection(NumericalError):
    pass


# expressions
class ExprError(InputError):
    pass


class ExprSyntaxError(ExprError):
    """Parse failure; ``offset`` is the 1-based position of the bad character."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ExprError):
    pass


class MissingBinding(ExprError):
    pass


class NonFiniteResult(NumericalError):
    pass


# finite elements
class EllipticityViolation(InputError):
    pass


class MeshQualityFailure(NumericalError):
    pass


class SolverNonConvergence(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


# functionals / optimizer
class InvalidProfile(InputError):
    pass


class UnsupportedDirection(InputError):
    pass


class ObjectiveFailure(NumericalError):
    """Objective evaluation failed mid-run; ``partial`` holds the result so far."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
