"""Exception hierarchy shared by all modules."""


class TransversalError(Exception):
    """Base class for every error raised by the package."""


class PreconditionError(TransversalError, ValueError):
    pass


# algebra
class ZeroPolynomial(TransversalError, ValueError):
    pass


class ZeroDenominator(TransversalError, ValueError):
    pass


class DegenerateMoebius(TransversalError, ValueError):
    pass


class NonConvergence(TransversalError, ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


# ratmap
class MultiplicityMismatch(TransversalError):
    pass


class OrbitHitsInfinity(TransversalError, ArithmeticError):
    pass


class NewtonDivergence(TransversalError, ArithmeticError):
    pass


class DimensionMismatch(TransversalError):
    pass


# relations
class AmbiguousCollision(TransversalError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class HorizonExhausted(TransversalError, UserWarning):
    """Raised (or warned) when an orbit question cannot be settled within the horizon."""


# qdiff
class RelationNotRealized(TransversalError, ValueError):
    pass


class NearPole(TransversalError, ArithmeticError):
    pass


class CriticalValue(TransversalError, ArithmeticError):
    pass


class PreimageAtPoleOfQ(TransversalError, ArithmeticError):
    pass


class PreimageAtInfinity(TransversalError, ArithmeticError):
    pass


# transversality
class UncertifiableRank(TransversalError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonRepelling(TransversalError, ValueError):
    pass


class ChartSolveFailure(TransversalError, ArithmeticError):
    pass


# lattes
class ValidationFailure(TransversalError):
    pass
