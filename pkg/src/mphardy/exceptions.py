"""Exception types raised by the numerical kernels."""


class HardyError(ValueError):
    """Base class for all domain errors in this package."""


class CoincidentPoints(HardyError):
    """Two particle positions coincide where a kernel is singular."""


class CoincidentAtoms(CoincidentPoints):
    """Two atoms of a weighted measure share a position."""


class DegenerateOrbitals(HardyError):
    """Slater orbitals are linearly dependent (repeated centers)."""


class DomainError(HardyError):
    """A constant was requested outside its range of validity."""


class AllRejected(HardyError):
    """Every Monte Carlo sample fell on a singular set."""


class DenominatorNearZero(HardyError):
    """A ratio estimator's denominator is indistinguishable from zero."""


class ZeroDensityInit(HardyError):
    """Metropolis chain started where the target density vanishes."""


class NonConvergent(HardyError):
    """Quadrature refinements did not agree to the requested tolerance."""


class NotAntisymmetric(HardyError):
    """A trial function failed the particle-exchange sign test."""


class NotOdd(HardyError):
    """A trial function failed the parity test u(-x) = -u(x)."""


class SingularField(HardyError):
    """A vector field produced non-finite values near the evaluation point."""
