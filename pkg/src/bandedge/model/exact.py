"""Closed-form propagator of the band-edge reservoir.

The Laplace transform G̃(u) is a rational function of s = √u whose denominator is
the monic quartic

    Q(z) = z⁴ + (1+i) a^{1/2} z³ + i a z² + π √(2/a) A.

Partial fractions in s give G̃ = Σ R(z_l) / (√u - z_l), which inverts to

    G(t) = Σ R(z_l) z_l e^{z_l² t} erfc(-z_l √t).

Evaluated through the principal-branch primitive e^w Γ(1/2, w) this splits into a
continuum part, decaying as a t^{-3/2} power law, and a pole part from the roots
with Re z > 0. One of those roots always lies on the ray arg z = π/4: a real
bound state inside the gap below the band edge.
"""

import logging
import math
from dataclasses import dataclass
from typing import overload

import numpy as np
import numpy.typing as npt

from bandedge.core.errors import DistinctnessError, DomainError, ResidueIdentityError
from bandedge.model.reservoir import SpecialReservoir
from bandedge.numerics.specfun import (
    SQRT_PI,
    polynomial_residual,
    quartic_roots,
    root_residual_bound,
    scaled_upper_gamma_half,
)

logger = logging.getLogger(__name__)

Times = float | npt.ArrayLike


def quartic_coefficients(r: SpecialReservoir) -> tuple[complex, complex, complex, complex]:
    """Coefficients (c0, c1, c2, c3) of the monic quartic Q(z)."""
    root_a = math.sqrt(r.a)
    c0 = complex(math.pi * math.sqrt(2.0 / r.a) * r.A)
    return c0, 0j, 1j * r.a, (1 + 1j) * root_a


def residue(r: SpecialReservoir, z: complex) -> complex:
    """R(z) = (1-i)(a^{1/2}+z)(i a^{1/2}+z) / [2z((1+i)a + 3a^{1/2}z + 2(1-i)z²)]."""
    root_a = math.sqrt(r.a)
    numerator = (1 - 1j) * (root_a + z) * (1j * root_a + z)
    denominator = 2 * z * ((1 + 1j) * r.a + 3 * root_a * z + 2 * (1 - 1j) * z * z)
    return complex(numerator / denominator)


@dataclass(frozen=True)
class QuarticSolution:
    """Roots of Q(z) and the residues R(z_l), validated at construction."""

    roots: tuple[complex, complex, complex, complex]
    residues: tuple[complex, complex, complex, complex]
    reservoir: SpecialReservoir

    def __post_init__(self) -> None:
        if len(self.roots) != 4 or len(self.residues) != 4:
            raise ValueError("QuarticSolution needs exactly 4 roots and 4 residues")

        coeffs = quartic_coefficients(self.reservoir)
        for z in self.roots:
            residual = abs(complex(polynomial_residual(coeffs, z)))
            bound = root_residual_bound(coeffs, z)
            if residual > bound:
                raise ResidueIdentityError(
                    f"Root residual {residual:.3e} at z = {z} exceeds {bound:.3e}"
                )

        scale = max(abs(z) for z in self.roots)
        min_distance = min(
            abs(self.roots[i] - self.roots[j]) for i in range(4) for j in range(i + 1, 4)
        )
        if min_distance <= 1e-8 * scale:
            raise DistinctnessError(
                f"Quartic roots are not distinct: min pairwise distance {min_distance:.3e}"
            )

        residues = np.array(self.residues)
        moments = residues * np.array(self.roots)
        sum_r = abs(residues.sum())
        sum_rz = abs(moments.sum() - 1.0)
        if sum_r > 1e-10 * max(1.0, float(np.max(np.abs(residues)))):
            raise ResidueIdentityError(f"Residue identity sum R = 0 violated by {sum_r:.3e}")
        if sum_rz > 1e-10 * max(1.0, float(np.max(np.abs(moments)))):
            raise ResidueIdentityError(f"Residue identity sum R z = 1 violated by {sum_rz:.3e}")

    @property
    def identity_residuals(self) -> tuple[float, float]:
        """(|Σ R|, |Σ R z - 1|)."""
        residues = np.array(self.residues)
        moments = residues * np.array(self.roots)
        return float(abs(residues.sum())), float(abs(moments.sum() - 1.0))

    @property
    def root_residuals(self) -> tuple[float, ...]:
        """|Q(z_l)| for each root."""
        coeffs = quartic_coefficients(self.reservoir)
        return tuple(abs(complex(polynomial_residual(coeffs, z))) for z in self.roots)


@dataclass(frozen=True)
class AsymptoticSummary:
    """Time scale τ, decoherence factor D and the bound-state terms."""

    tau: float
    D: complex
    bound_state_amplitude: complex
    bound_state_frequency: float

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise ValueError(f"Invalid tau: {self.tau}")


@dataclass(frozen=True)
class BoundState:
    """Root on the ray arg z = π/4, a stationary state at u = i r²."""

    root: complex
    amplitude: complex
    frequency: float


def solve_quartic(r: SpecialReservoir) -> QuarticSolution:
    """Find the roots of Q(z) and their residues.

    Args:
        r: Reservoir parameters

    Returns:
        Validated QuarticSolution

    Raises:
        ResidueIdentityError: If a residue identity fails
        DistinctnessError: If two roots coincide
    """
    roots = quartic_roots(*quartic_coefficients(r))
    residues = [residue(r, z) for z in roots]
    solution = QuarticSolution(
        roots=(roots[0], roots[1], roots[2], roots[3]),
        residues=(residues[0], residues[1], residues[2], residues[3]),
        reservoir=r,
    )
    logger.debug(
        "Quartic solved for A=%s a=%s: roots=%s identity residuals=%s",
        r.A,
        r.a,
        roots,
        solution.identity_residuals,
    )
    return solution


def _as_times(t: Times) -> npt.NDArray[np.float64]:
    times = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise DomainError(f"Times must be finite and non-negative, got {t}")
    return times


def _unwrap(value: npt.NDArray[np.complex128], t: Times) -> complex | npt.NDArray[np.complex128]:
    if np.ndim(t) == 0:
        return complex(value)
    return value


@overload
def continuum_part(sol: QuarticSolution, t: float) -> complex: ...


@overload
def continuum_part(sol: QuarticSolution, t: npt.ArrayLike) -> npt.NDArray[np.complex128]: ...


def continuum_part(sol: QuarticSolution, t: Times) -> complex | npt.NDArray[np.complex128]:
    """Branch-cut contribution (1/√π) Σ s_l R_l z_l e^{w}Γ(1/2, w), w = z_l² t.

    s_l = +1 for Re z_l < 0 and -1 otherwise. Decays as +D t^{-3/2}.
    """
    times = _as_times(t)
    total = np.zeros(times.shape, dtype=np.complex128)
    for z, res in zip(sol.roots, sol.residues, strict=True):
        sign = 1.0 if z.real < 0 else -1.0
        total += sign * res * z * scaled_upper_gamma_half(z * z * times)
    return _unwrap(total / SQRT_PI, t)


@overload
def pole_part(sol: QuarticSolution, t: float) -> complex: ...


@overload
def pole_part(sol: QuarticSolution, t: npt.ArrayLike) -> npt.NDArray[np.complex128]: ...


def pole_part(sol: QuarticSolution, t: Times) -> complex | npt.NDArray[np.complex128]:
    """Pole contribution Σ_{Re z_l > 0} 2 R_l z_l e^{z_l² t}."""
    times = _as_times(t)
    total = np.zeros(times.shape, dtype=np.complex128)
    for z, res in zip(sol.roots, sol.residues, strict=True):
        if z.real >= 0:
            total += 2.0 * res * z * np.exp(z * z * times)
    return _unwrap(total, t)


@overload
def propagator(sol: QuarticSolution, t: float) -> complex: ...


@overload
def propagator(sol: QuarticSolution, t: npt.ArrayLike) -> npt.NDArray[np.complex128]: ...


def propagator(sol: QuarticSolution, t: Times) -> complex | npt.NDArray[np.complex128]:
    """Exact propagator G(t) = Σ R_l z_l e^{z_l² t} erfc(-z_l √t).

    Args:
        sol: Quartic solution
        t: Time (scalar or array), t ≥ 0

    Returns:
        G(t); exactly 1 at t = 0

    Raises:
        DomainError: If a time is negative or not finite
    """
    times = _as_times(t)
    values = np.asarray(continuum_part(sol, times) + pole_part(sol, times), dtype=np.complex128)
    values = np.where(times == 0, 1.0 + 0j, values)
    return _unwrap(values, t)


def principal_branch_propagator(sol: QuarticSolution, t: Times) -> complex | npt.NDArray:
    """(1/√π) Σ R_l z_l e^{w}Γ(1/2, w) with every w = z_l² t on the principal sheet.

    Kept for comparison only: it equals 1 at t = 0 but does not solve the
    convolution equation when a root has Re z > 0.
    """
    times = _as_times(t)
    total = np.zeros(times.shape, dtype=np.complex128)
    for z, res in zip(sol.roots, sol.residues, strict=True):
        total += res * z * scaled_upper_gamma_half(z * z * times)
    return _unwrap(total / SQRT_PI, t)


def bound_state(sol: QuarticSolution) -> BoundState | None:
    """Root with Re z > 0 and Re z² = 0, if any.

    Returns:
        The bound state (amplitude 2Rz, frequency shift r² = Im z²) or None
    """
    for z, res in zip(sol.roots, sol.residues, strict=True):
        if z.real > 0 and abs((z * z).real) <= 1e-9 * abs(z) ** 2:
            return BoundState(root=z, amplitude=2.0 * res * z, frequency=float((z * z).imag))
    return None


def trapped_population(sol: QuarticSolution) -> float:
    """Long-time limit of |G|², the fraction of excitation trapped by the bound state."""
    state = bound_state(sol)
    return 0.0 if state is None else abs(state.amplitude) ** 2


def asymptotics(sol: QuarticSolution) -> AsymptoticSummary:
    """Time scale τ = max_l |z_l|^{-2} and decoherence factor D = (1/(2√π)) Σ R_l z_l^{-2}."""
    tau = max(abs(z) ** -2 for z in sol.roots)
    D = sum(res / (z * z) for z, res in zip(sol.roots, sol.residues, strict=True)) / (2 * SQRT_PI)
    state = bound_state(sol)
    return AsymptoticSummary(
        tau=float(tau),
        D=complex(D),
        bound_state_amplitude=0j if state is None else state.amplitude,
        bound_state_frequency=0.0 if state is None else state.frequency,
    )


def asymptotic_propagator(summary: AsymptoticSummary, t: Times) -> complex | npt.NDArray:
    """Power law -D t^{-3/2}, valid for t ≫ τ.

    Raises:
        DomainError: If t ≤ 0
    """
    times = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(times)) or np.any(times <= 0):
        raise DomainError(f"Asymptotic law needs t > 0, got {t}")
    values = -summary.D * times**-1.5
    if np.ndim(t) == 0:
        return complex(values)
    return np.asarray(values, dtype=np.complex128)
