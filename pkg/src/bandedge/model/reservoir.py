"""Reservoir models: spectral densities, correlation functions, Laplace-domain propagators.

Two reservoirs are modelled:
- SpecialReservoir: J(ω) = 2A (ω-ω₀)^{1/2} Θ(ω-ω₀) / (a² + (ω-ω₀)²), a band edge at ω₀
- LorentzianReservoir: J_L(ω) = γλ² / (2π((ω-ω₀)² + λ²)), the damped Jaynes-Cummings bath

Correlation functions and propagators are expressed in the interaction picture,
i.e. in the detuning variable x = ω - ω₀.
"""

import logging
import math
import warnings
from collections.abc import Callable
from enum import Enum
from functools import partial

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from bandedge.core.errors import AccuracyWarning, DomainError, PoleError
from bandedge.numerics.specfun import oscillatory_halfline_quad

logger = logging.getLogger(__name__)


class Regime(Enum):
    """Coupling regime of a Lorentzian reservoir."""

    WEAK = "weak"
    STRONG = "strong"
    BOUNDARY = "boundary"


class SpecialReservoir(BaseModel):
    """Band-edge reservoir parameters (A in frequency^(5/2), a and ω₀ in frequency)."""

    model_config = ConfigDict(frozen=True)

    A: float = Field(gt=0, allow_inf_nan=False, description="Coupling amplitude")
    a: float = Field(gt=0, allow_inf_nan=False, description="Spectral width")
    omega0: float = Field(gt=0, allow_inf_nan=False, description="Qubit frequency")


class LorentzianReservoir(BaseModel):
    """Lorentzian reservoir with γ = 1/τ_R and λ = 1/τ_B."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(gt=0, allow_inf_nan=False, description="Coupling rate 1/tau_R")
    lambda_: float = Field(gt=0, allow_inf_nan=False, description="Spectral width 1/tau_B")
    omega0: float = Field(gt=0, allow_inf_nan=False, description="Qubit frequency")

    @classmethod
    def from_times(cls, tau_B: float, tau_R: float, omega0: float) -> "LorentzianReservoir":
        """Build from the bath correlation time τ_B and the relaxation time τ_R."""
        if tau_B <= 0 or tau_R <= 0:
            raise DomainError(f"Invalid time scales: tau_B={tau_B}, tau_R={tau_R}")
        return cls(gamma=1.0 / tau_R, lambda_=1.0 / tau_B, omega0=omega0)

    @property
    def regime(self) -> Regime:
        """Weak coupling iff λ > 2γ, strong iff λ < 2γ, boundary within 1e-12 λ."""
        if abs(self.lambda_ - 2.0 * self.gamma) <= 1e-12 * self.lambda_:
            return Regime.BOUNDARY
        return Regime.WEAK if self.lambda_ > 2.0 * self.gamma else Regime.STRONG


class ShiftedProfile:
    """Spectral density Λ(x) = J(ω₀ + x) in the detuning variable.

    The constructor checks Λ ≥ 0 on a sample grid and that ∫Λ converges.
    """

    def __init__(self, func: Callable[[float], float], lower: float = 0.0):
        """Initialize and validate the profile.

        Args:
            func: Λ(x), defined for x ≥ lower
            lower: Lower end of the support, 0 or -inf

        Raises:
            DomainError: If Λ is negative on the sample grid or not summable
        """
        if not (lower == 0.0 or lower == -math.inf):
            raise DomainError(f"Invalid profile support: lower={lower}. Must be 0 or -inf")
        self.func = func
        self.lower = lower
        self._check_non_negative()
        self.total = self._integrate_total()

    def __call__(self, x: float) -> float:
        return float(self.func(x))

    def _check_non_negative(self) -> None:
        samples = np.concatenate(([0.0], np.geomspace(1e-6, 1e6, 121)))
        if self.lower == -math.inf:
            samples = np.concatenate((-samples[::-1], samples))
        values = np.array([self.func(float(x)) for x in samples])
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("Spectral profile must be finite and non-negative")

    def _integrate_total(self) -> float:
        if self.lower == 0.0:
            total, error = integrate.quad(
                lambda u: 2.0 * u * self.func(u * u), 0.0, np.inf, epsabs=0.0, epsrel=1e-10,
                limit=200,
            )
        else:
            total, error = integrate.quad(
                self.func, -np.inf, np.inf, epsabs=0.0, epsrel=1e-10, limit=200
            )
        if not math.isfinite(total) or error > 1e-8 * max(abs(total), 1e-300):
            raise DomainError(f"Spectral profile is not summable (integral {total}, error {error})")
        return float(total)


def spectral_density(r: SpecialReservoir, omega: float | npt.ArrayLike) -> float | npt.NDArray:
    """Band-edge spectral density J(ω), zero at and below ω₀.

    Args:
        r: Reservoir parameters
        omega: Frequency (scalar or array), ω ≥ 0

    Returns:
        J(ω) ≥ 0, scalar for scalar input
    """
    x = np.asarray(omega, dtype=float) - r.omega0
    xp = np.clip(x, 0.0, None)
    value = np.where(x > 0, 2.0 * r.A * np.sqrt(xp) / (r.a**2 + xp**2), 0.0)
    if np.ndim(omega) == 0:
        return float(value)
    return value


def spectral_peak(r: SpecialReservoir) -> tuple[float, float]:
    """Location and height of the absolute maximum of J.

    Returns:
        (ω_M, J_max) = (ω₀ + a/√3, 3^{3/4} A / (2 a^{3/2}))
    """
    omega_m = r.omega0 + r.a / math.sqrt(3.0)
    j_max = 3.0**0.75 * r.A / (2.0 * r.a**1.5)
    return omega_m, j_max


def lorentzian_spectral_density(
    r: LorentzianReservoir, omega: float | npt.ArrayLike
) -> float | npt.NDArray:
    """Lorentzian spectral density J_L(ω) = γλ² / (2π((ω-ω₀)² + λ²))."""
    x = np.asarray(omega, dtype=float) - r.omega0
    value = r.gamma * r.lambda_**2 / (2.0 * math.pi * (x**2 + r.lambda_**2))
    if np.ndim(omega) == 0:
        return float(value)
    return value


def _special_lambda(r: SpecialReservoir, x: float) -> float:
    if x <= 0.0:
        return 0.0
    return 2.0 * r.A * math.sqrt(x) / (r.a**2 + x * x)


def _lorentzian_lambda(r: LorentzianReservoir, x: float) -> float:
    return r.gamma * r.lambda_**2 / (2.0 * math.pi * (x * x + r.lambda_**2))


def shifted_profile(r: SpecialReservoir) -> ShiftedProfile:
    """Band-edge profile Λ(x) = 2A√x / (a² + x²) on [0, ∞)."""
    return ShiftedProfile(partial(_special_lambda, r), lower=0.0)


def lorentzian_profile(r: LorentzianReservoir) -> ShiftedProfile:
    """Lorentzian profile on the full line."""
    return ShiftedProfile(partial(_lorentzian_lambda, r), lower=-math.inf)


def total_coupling(r: SpecialReservoir) -> float:
    """∫J dω = f(0) = π√(2/a) A."""
    return math.pi * math.sqrt(2.0 / r.a) * r.A


def correlation_function(r: SpecialReservoir, tau: float, tol: float = 1e-10) -> complex:
    """Bath correlation function f(τ) = ∫₀^∞ Λ(x) e^{-ixτ} dx.

    Args:
        r: Reservoir parameters
        tau: Time lag (any sign)
        tol: Absolute quadrature tolerance

    Returns:
        f(τ); f(-τ) is the complex conjugate

    Warns:
        AccuracyWarning: If the quadrature misses tol
    """
    if tol <= 0:
        raise DomainError(f"Invalid tol: {tol}")
    result = oscillatory_halfline_quad(partial(_special_lambda, r), float(tau), tol)
    return result.value


def lorentzian_correlation(
    r: LorentzianReservoir, tau: float | npt.ArrayLike
) -> float | npt.NDArray:
    """Lorentzian correlation function f_L(τ) = (γλ/2) e^{-λ|τ|}."""
    value = 0.5 * r.gamma * r.lambda_ * np.exp(-r.lambda_ * np.abs(np.asarray(tau, dtype=float)))
    if np.ndim(tau) == 0:
        return float(value)
    return value


def _complex_quad(
    func: Callable[[float], complex],
    lower: float,
    upper: float,
    tol: float,
    points: list[float] | None = None,
) -> tuple[complex, float]:
    """Integrate a complex function of a real variable, real and imaginary parts separately."""
    kwargs: dict[str, object] = {"epsabs": tol, "epsrel": tol, "limit": 200}
    if points and math.isfinite(lower) and math.isfinite(upper):
        kwargs["points"] = points
    re, err_re = integrate.quad(lambda x: func(x).real, lower, upper, **kwargs)
    im, err_im = integrate.quad(lambda x: func(x).imag, lower, upper, **kwargs)
    return complex(re, im), abs(err_re) + abs(err_im)


def stieltjes_transform(profile: ShiftedProfile, p: complex, tol: float) -> tuple[complex, float]:
    """∫ Λ(x) / (x - p) dx for Im p > 0, with pole subtraction near x = Re p.

    Returns:
        (value, absolute error estimate)
    """
    x_p, eta = p.real, p.imag
    width = 10.0 * eta
    alpha = max(profile.lower, x_p - width)
    beta = x_p + width

    def kernel(x: float) -> complex:
        return profile(x) / (x - p)

    part_tol = tol / 8.0
    if beta <= profile.lower:
        return _complex_quad(kernel, profile.lower, np.inf, part_tol)

    x_c = min(max(x_p, alpha), beta)
    lam_c = profile(x_c)

    def subtracted(x: float) -> complex:
        return (profile(x) - lam_c) / (x - p)

    inner = [x_c] if alpha < x_c < beta else None
    value, error = _complex_quad(subtracted, alpha, beta, part_tol, points=inner)
    value += lam_c * (np.log(beta - p) - np.log(alpha - p))

    right, err_right = _complex_quad(kernel, beta, np.inf, part_tol)
    value += right
    error += err_right
    if alpha > profile.lower:
        left, err_left = _complex_quad(kernel, profile.lower, alpha, part_tol)
        value += left
        error += err_left
    return complex(value), error


def laplace_propagator(profile: ShiftedProfile, u: complex, tol: float = 1e-10) -> complex:
    """G̃(u) = [u - i·S(Λ)(-iu)]^{-1} by quadrature of the Stieltjes transform.

    Args:
        profile: Spectral profile in the detuning variable
        u: Laplace variable, Re(u) > 0
        tol: Quadrature tolerance

    Returns:
        G̃(u)

    Raises:
        DomainError: If Re(u) ≤ 0 or u is not finite
    """
    u = complex(u)
    if not (math.isfinite(u.real) and math.isfinite(u.imag)) or u.real <= 0:
        raise DomainError(f"laplace_propagator requires Re(u) > 0, got {u}")
    if tol <= 0:
        raise DomainError(f"Invalid tol: {tol}")

    stieltjes, error = stieltjes_transform(profile, 1j * u, tol)
    if error > tol * max(1.0, abs(stieltjes)):
        message = f"Stieltjes quadrature at u={u} reached error {error:.3e}"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=2)
    return complex(1.0 / (u - 1j * stieltjes))


def _principal_sqrt(u: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    u_arr = np.asarray(u, dtype=np.complex128)
    if not np.all(np.isfinite(u_arr)):
        raise DomainError(f"Non-finite Laplace variable: {u}")
    on_cut = (u_arr.imag == 0) & (u_arr.real <= 0)
    if np.any(on_cut):
        raise DomainError("Laplace variable on the branch cut (-inf, 0]")
    return np.sqrt(u_arr)


def self_energy_closed_form(
    r: SpecialReservoir, u: complex | npt.ArrayLike
) -> complex | npt.NDArray:
    """Memory-kernel transform Σ(u) = π√2 A / (a^{1/2} (√u + i a^{1/2}) (√u + a^{1/2}))."""
    s = _principal_sqrt(u)
    root_a = math.sqrt(r.a)
    value = math.pi * math.sqrt(2.0) * r.A / (root_a * (s + 1j * root_a) * (s + root_a))
    if np.ndim(u) == 0:
        return complex(value)
    return value


def laplace_propagator_closed_form(
    r: SpecialReservoir, u: complex | npt.ArrayLike
) -> complex | npt.NDArray:
    """Closed-form G̃(u) as a rational function of the principal √u.

    Args:
        r: Reservoir parameters
        u: Laplace variable (scalar or array), off the cut (-inf, 0]

    Returns:
        G̃(u), scalar for scalar input

    Raises:
        DomainError: If u lies on the cut or is not finite
        PoleError: If u is (numerically) a pole
    """
    s = _principal_sqrt(u)
    root_a = math.sqrt(r.a)
    numerator = root_a * (1j * root_a + s) * (root_a + s)
    terms = (
        np.full_like(s, math.pi * math.sqrt(2.0) * r.A),
        1j * r.a**1.5 * s**2,
        (1 + 1j) * r.a * s**3,
        root_a * s**4,
    )
    denominator = terms[0] + terms[1] + terms[2] + terms[3]
    scale = np.maximum.reduce([np.abs(term) for term in terms])
    if np.any(np.abs(denominator) < 1e-14 * scale):
        raise PoleError(f"Closed-form propagator evaluated at a pole: u={u}")
    value = numerator / denominator
    if np.ndim(u) == 0:
        return complex(value)
    return value
