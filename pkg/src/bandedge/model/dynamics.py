"""Reduced density matrix of the qubit from the propagator G(t)."""

import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from bandedge.core.errors import ContractivityWarning, DomainError, PositivityError
from bandedge.model.exact import AsymptoticSummary, asymptotic_propagator

logger = logging.getLogger(__name__)

POSITIVITY_SLACK = 1e-12


@dataclass(frozen=True)
class QubitState:
    """Excited-state population ρ₁₁ and coherence ρ₁₀; ρ₀₀ and ρ₀₁ are derived."""

    rho11: float
    rho10: complex

    def __post_init__(self) -> None:
        if not (np.isfinite(self.rho11) and np.isfinite(self.rho10)):
            raise PositivityError(f"Non-finite state: rho11={self.rho11}, rho10={self.rho10}")
        if not -POSITIVITY_SLACK <= self.rho11 <= 1 + POSITIVITY_SLACK:
            raise PositivityError(f"Population rho11={self.rho11} outside [0, 1]")
        bound = self.rho11 * (1.0 - self.rho11)
        if abs(self.rho10) ** 2 > bound + POSITIVITY_SLACK:
            raise PositivityError(
                f"|rho10|^2 = {abs(self.rho10) ** 2:.6e} exceeds rho11 (1 - rho11) = {bound:.6e}"
            )

    @property
    def rho00(self) -> float:
        return 1.0 - self.rho11

    @property
    def rho01(self) -> complex:
        return complex(self.rho10).conjugate()

    def as_matrix(self) -> npt.NDArray[np.complex128]:
        """Density matrix in the basis (|1>, |0>)."""
        return np.array(
            [[self.rho11, self.rho10], [self.rho01, self.rho00]], dtype=np.complex128
        )


def evolve(initial: QubitState, G: complex, omega0: float, t: float) -> QubitState:
    """ρ₁₁ = ρ₁₁(0)|G|², ρ₁₀ = ρ₁₀(0) e^{-iω₀t} G.

    Args:
        initial: State at t = 0
        G: Propagator value at t
        omega0: Qubit frequency
        t: Time

    Returns:
        State at t

    Warns:
        ContractivityWarning: If |G| > 1 (the value is not clamped)

    Raises:
        PositivityError: If the evolved state is unphysical
    """
    G = complex(G)
    if abs(G) > 1.0 + POSITIVITY_SLACK:
        message = f"Propagator not contractive at t={t}: |G| = {abs(G):.12f}"
        logger.warning(message)
        warnings.warn(message, ContractivityWarning, stacklevel=2)
    rho11 = initial.rho11 * abs(G) ** 2
    rho10 = complex(initial.rho10) * np.exp(-1j * omega0 * t) * G
    return QubitState(rho11=float(rho11), rho10=complex(rho10))


def asymptotic_state(
    initial: QubitState, summary: AsymptoticSummary, omega0: float, t: float
) -> QubitState:
    """Long-time state from the power law.

    ρ₁₁ ~ ρ₁₁(0)|D|² t^{-3} and ρ₁₀ ~ -ρ₁₀(0) e^{-iω₀t} D t^{-3/2}.
    Valid only for t ≫ τ; the asymptotic form is not a state at short times.

    Raises:
        DomainError: If t is not positive or |D| t^{-3/2} > 1
    """
    if not math.isfinite(t) or t <= 0:
        raise DomainError(f"asymptotic_state requires t > 0, got {t}")
    magnitude = abs(summary.D) * t**-1.5
    if magnitude > 1.0:
        raise DomainError(
            f"asymptotic_state requires t ≫ τ = {summary.tau:.3e}: "
            f"|D| t^(-3/2) = {magnitude:.3e} > 1 at t = {t}"
        )
    return evolve(initial, complex(asymptotic_propagator(summary, t)), omega0, t)


@dataclass(frozen=True)
class Trajectory:
    """Time grid with propagator samples and the derived states."""

    times: npt.NDArray[np.float64]
    G_values: npt.NDArray[np.complex128]
    states: tuple[QubitState, ...]
    omega0: float
    initial: QubitState
    label: str = field(default="")

    def __post_init__(self) -> None:
        n = len(self.times)
        if len(self.G_values) != n or len(self.states) != n:
            raise ValueError("Trajectory arrays must have equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("Trajectory times must be strictly increasing")

    def coherence(self, interaction_picture: bool = False) -> npt.NDArray[np.complex128]:
        """ρ₁₀(t); with interaction_picture the e^{-iω₀t} phase is removed."""
        values = np.array([s.rho10 for s in self.states], dtype=np.complex128)
        if interaction_picture:
            values = values * np.exp(1j * self.omega0 * self.times)
        return values

    def population(self) -> npt.NDArray[np.float64]:
        """ρ₁₁(t)."""
        return np.array([s.rho11 for s in self.states], dtype=float)


def build_trajectory(
    initial: QubitState,
    times: Sequence[float] | npt.ArrayLike,
    G_values: Sequence[complex] | npt.ArrayLike,
    omega0: float,
    label: str = "",
) -> Trajectory:
    """Evolve the initial state along a grid of propagator values."""
    t_arr = np.asarray(times, dtype=float)
    g_arr = np.asarray(G_values, dtype=np.complex128)
    if t_arr.shape != g_arr.shape:
        raise ValueError(f"times {t_arr.shape} and G_values {g_arr.shape} differ in shape")
    states = tuple(
        evolve(initial, complex(g), omega0, float(t)) for t, g in zip(t_arr, g_arr, strict=True)
    )
    return Trajectory(
        times=t_arr, G_values=g_arr, states=states, omega0=omega0, initial=initial, label=label
    )
