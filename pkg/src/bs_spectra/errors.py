"""Exception types raised by bs_spectra."""


class BSError(Exception):
    """Base class for all library errors."""


class BadParameter(BSError, ValueError):
    """An argument is outside its admissible range."""


class NonIntegrable(BSError, ArithmeticError):
    """Adaptive quadrature did not converge (typically V is not in H^-1)."""


class UndefinedIntegral(BSError, ArithmeticError):
    """The real-space integral of a potential is not defined."""


class GridMismatch(BSError, ValueError):
    """A grid function is missing its grid or lives on a different grid."""


class SpectrumPoint(BSError, ValueError):
    """The spectral parameter lies on (or within 1e-14 of) [0, inf)."""


class EigenFailure(BSError, ArithmeticError):
    """A dense or iterative eigensolver failed to converge."""


class NearPole(BSError, ArithmeticError):
    """I - A_V(z) is numerically singular; z is (close to) a bound state."""


class BisectionStall(BSError, ArithmeticError):
    """Bisection on an eigenvalue curve lost its bracket."""
