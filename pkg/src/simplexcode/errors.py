"""Exception types raised across the package."""


class SimplexCodeError(Exception):
    """Base class for all errors raised by simplexcode."""


class DimensionMismatch(SimplexCodeError, ValueError):
    pass


class LengthMismatch(SimplexCodeError, ValueError):
    pass


class EmptyInput(SimplexCodeError, ValueError):
    pass


# geometry
class DegenerateSimplex(SimplexCodeError, ValueError):
    pass


class NonUniqueTriangulation(SimplexCodeError, ValueError):
    pass


class NotGeneralPosition(SimplexCodeError, ValueError):
    pass


class OutsideHull(SimplexCodeError, ValueError):
    pass


class GeneralPositionFailure(SimplexCodeError, RuntimeError):
    pass


# simplex core / oracle
class InfeasibleCode(SimplexCodeError, ValueError):
    """A coefficient vector is not on the probability simplex."""


class Infeasible(SimplexCodeError, ValueError):
    pass


class EnumerationBudgetExceeded(SimplexCodeError, ValueError):
    pass


# encoder / training
class NonFiniteIterate(SimplexCodeError, FloatingPointError):
    pass


class TrajectoryMismatch(SimplexCodeError, ValueError):
    pass


class InsufficientData(SimplexCodeError, ValueError):
    pass


class NonFiniteLoss(SimplexCodeError, FloatingPointError):
    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss in epoch {epoch}")


# clustering
class NotSymmetric(SimplexCodeError, ValueError):
    pass


class NoConvergence(SimplexCodeError, RuntimeError):
    pass


class DegenerateGraph(SimplexCodeError, RuntimeError):
    pass


class DegenerateGraphWarning(UserWarning):
    pass


# IDX files
class BadMagic(SimplexCodeError, ValueError):
    pass


class TruncatedFile(SimplexCodeError, ValueError):
    pass


class CountMismatch(SimplexCodeError, ValueError):
    pass
