"""Exception and warning hierarchy for bandedge.

Every exception derives from :class:`BandedgeError` and from the builtin
exception that best describes it, so callers can catch either.
"""


class BandedgeError(Exception):
    """Base class for all bandedge errors."""


class DomainError(BandedgeError, ValueError):
    """Argument outside the domain of a function (NaN/Inf, Re(u) <= 0, t < 0)."""


class ConvergenceError(BandedgeError, RuntimeError):
    """An iterative method exhausted its iteration budget."""


class DivergenceError(BandedgeError, RuntimeError):
    """Quadrature panel estimates failed to decrease."""


class PoleError(BandedgeError, ZeroDivisionError):
    """A closed-form transform was evaluated on one of its poles."""


class ResidueIdentityError(BandedgeError, RuntimeError):
    """The residues of the quartic violate sum R = 0 or sum R z = 1."""


class DistinctnessError(BandedgeError, ValueError):
    """Two roots of the quartic coincide to working precision."""


class RegimeError(BandedgeError, ValueError):
    """Lorentzian regime tag inconsistent with the reservoir parameters."""


class PositivityError(BandedgeError, ValueError):
    """A qubit state violates 0 <= rho11 <= 1 or |rho10|^2 <= rho11 (1 - rho11)."""


class InstabilityError(BandedgeError, RuntimeError):
    """The Volterra marching scheme ran away (|G| > 10)."""


class ConfigurationError(BandedgeError, ValueError):
    """Run configuration failed validation."""


class AccuracyWarning(UserWarning):
    """A numerical routine did not reach its requested tolerance."""


class NearMultipleRootWarning(UserWarning):
    """Two polynomial roots are closer than the distinctness threshold."""


class ContractivityWarning(UserWarning):
    """A survival amplitude with |G| > 1 was passed to the state map."""
