"""Damped Jaynes-Cummings propagator for the Lorentzian reservoir."""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from bandedge.core.errors import DomainError, PoleError, RegimeError
from bandedge.model.reservoir import LorentzianReservoir, Regime


@dataclass(frozen=True)
class LorentzianPropagatorParams:
    """Reservoir, coupling regime and the rate d (weak) or d̂ (strong)."""

    reservoir: LorentzianReservoir
    regime: Regime
    rate: float

    def __post_init__(self) -> None:
        if self.regime != self.reservoir.regime:
            raise RegimeError(
                f"Regime {self.regime.value} inconsistent with reservoir "
                f"(lambda={self.reservoir.lambda_}, gamma={self.reservoir.gamma}): "
                f"classified as {self.reservoir.regime.value}"
            )
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValueError(f"Invalid rate: {self.rate}")


def propagator_params(
    r: LorentzianReservoir, regime: Regime | None = None
) -> LorentzianPropagatorParams:
    """Classify the reservoir and compute d = √(λ²-2γλ) or d̂ = √(2γλ-λ²).

    Args:
        r: Lorentzian reservoir
        regime: Optional expected regime; must agree with the classifier

    Returns:
        LorentzianPropagatorParams

    Raises:
        RegimeError: If regime disagrees with the classifier
    """
    actual = r.regime
    if regime is not None and regime != actual:
        raise RegimeError(f"Requested {regime.value} regime but reservoir is {actual.value}")
    if actual == Regime.BOUNDARY:
        rate = 0.0
    else:
        rate = math.sqrt(abs(r.lambda_**2 - 2.0 * r.gamma * r.lambda_))
    return LorentzianPropagatorParams(reservoir=r, regime=actual, rate=rate)


def propagator_L(
    p: LorentzianPropagatorParams, t: float | npt.ArrayLike
) -> float | npt.NDArray[np.float64]:
    """G_L(t) in the weak (hyperbolic), strong (oscillatory) or boundary (confluent) form.

    Raises:
        DomainError: If a time is negative or not finite
    """
    times = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise DomainError(f"Times must be finite and non-negative, got {t}")
    lam = p.reservoir.lambda_
    half = 0.5 * times

    if p.regime == Regime.WEAK:
        d = p.rate
        # e^{-λt/2}[cosh(dt/2) + (λ/d) sinh(dt/2)] without overflowing cosh
        grow = np.exp((d - lam) * half)
        decay = np.exp(-(d + lam) * half)
        values = 0.5 * ((1 + lam / d) * grow + (1 - lam / d) * decay)
    elif p.regime == Regime.STRONG:
        d_hat = p.rate
        values = np.exp(-lam * half) * (np.cos(d_hat * half) + lam / d_hat * np.sin(d_hat * half))
    else:
        values = np.exp(-lam * half) * (1.0 + lam * half)

    if np.ndim(t) == 0:
        return float(values)
    return np.asarray(values, dtype=float)


def zero_times(p: LorentzianPropagatorParams, n_max: int) -> list[float]:
    """Zeros t_n = (2/d̂)(nπ - arctan(d̂/λ)), n = 1..n_max, of the strong-coupling G_L.

    Raises:
        RegimeError: If the regime is not strong
        ValueError: If n_max < 1
    """
    if p.regime != Regime.STRONG:
        raise RegimeError(f"G_L has no zeros in the {p.regime.value} regime")
    if n_max < 1:
        raise ValueError(f"Invalid n_max: {n_max}")
    d_hat = p.rate
    phase = math.atan(d_hat / p.reservoir.lambda_)
    return [2.0 / d_hat * (n * math.pi - phase) for n in range(1, n_max + 1)]


def laplace_propagator_L(
    r: LorentzianReservoir, u: complex | npt.ArrayLike
) -> complex | npt.NDArray[np.complex128]:
    """Laplace transform G̃_L(u) = (u+λ) / (u² + λu + γλ/2).

    Raises:
        PoleError: If u is (numerically) a pole
    """
    u_arr = np.asarray(u, dtype=np.complex128)
    lam = r.lambda_
    denominator = u_arr * u_arr + lam * u_arr + 0.5 * r.gamma * lam
    scale = np.abs(u_arr) ** 2 + lam * np.abs(u_arr) + 0.5 * r.gamma * lam
    if np.any(np.abs(denominator) < 1e-14 * scale):
        raise PoleError(f"Lorentzian transform evaluated at a pole: u={u}")
    values = (u_arr + lam) / denominator
    if np.ndim(u) == 0:
        return complex(values)
    return values
