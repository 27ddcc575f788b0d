"""Exception hierarchy shared by all modules."""


class LatticeError(Exception):
    """Base class for every error raised by lattc."""


class SingularBasis(LatticeError, ValueError):
    pass


class UnknownLattice(LatticeError, ValueError):
    pass


class DomainError(LatticeError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class EnumerationTooLarge(LatticeError):
    pass


class NumericFailure(LatticeError):
    """Base for failures of a numerical procedure (CLI exit code 3)."""


class NonConvergence(NumericFailure):
    pass


class QuadratureFailure(NumericFailure):
    pass


class DegenerateNome(NumericFailure):
    pass


class CoincidentPoints(LatticeError, ValueError):
    pass


class MaxIterations(NumericFailure):
    pass


class Underflow(NumericFailure):
    pass
