"""Exception hierarchy shared by all isospec modules."""


class IsospecError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(IsospecError, ValueError):
    """Invalid family parameters (e.g. alpha <= -1 for Laguerre)."""


class DomainError(IsospecError, ValueError):
    """Abscissa outside the natural domain of a family."""


class InadmissibleGamma(IsospecError, ValueError):
    """The deformation parameter violates the family's admissibility bound."""


class NotApplicable(IsospecError, ValueError):
    """An identity check does not apply to the requested family or index."""


class NumericalFailure(IsospecError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class ConvergenceError(NumericalFailure):
    """Adaptive quadrature exhausted its evaluation budget."""


class NonFiniteError(NumericalFailure):
    """An integrand or evaluated quantity came out NaN or infinite."""


class DenominatorVanishes(NumericalFailure):
    """The deformation denominator crosses zero on the working grid."""
