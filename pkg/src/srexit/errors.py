"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class SRExitError(Exception):
    """Base class for all errors raised by srexit."""


class DomainError(SRExitError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(SRExitError, ArithmeticError):
    """A series, quadrature or root search failed to reach its tolerance."""


class DegenerateParameterError(ConvergenceError):
    """Integer-parameter extrapolation did not settle."""


class SymmetryError(ConvergenceError):
    """A quantity that must be real came out with a sizeable imaginary part."""


class NoSignChangeError(ConvergenceError):
    """The eigenvalue search could not find a sign change of the Dirichlet condition."""


class CensoringError(SRExitError, ValueError):
    """Censored Monte Carlo paths make the requested estimate unreliable."""
