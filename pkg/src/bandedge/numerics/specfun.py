"""Special functions and quadrature primitives.

Provides:
- The scaled upper incomplete Gamma function e^w Γ(1/2, w) via the Faddeeva function
- A series / continued-fraction reference evaluation of the same function
- Monic quartic root finding (Aberth-Ehrlich with companion-matrix fallback)
- Oscillatory half-line quadrature of ∫₀^∞ P(x) e^{-ixτ} dx
"""

import logging
import math
import sys
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import overload

import numpy as np
import numpy.typing as npt
from scipy import integrate, special

from bandedge.core.errors import (
    AccuracyWarning,
    ConvergenceError,
    DivergenceError,
    DomainError,
    NearMultipleRootWarning,
)
from bandedge.core.logging import log_numerics
from bandedge.core.metrics import current_metrics

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)

ComplexArray = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a quadrature with its diagnostics."""

    value: complex
    abs_error_estimate: float
    evaluations: int
    converged: bool

    def __post_init__(self) -> None:
        if self.abs_error_estimate < 0:
            raise ValueError(f"Invalid abs_error_estimate: {self.abs_error_estimate}")
        if self.evaluations <= 0:
            raise ValueError(f"Invalid evaluations: {self.evaluations}")


@overload
def scaled_upper_gamma_half(w: complex, sqrt_w: complex | None = None) -> complex: ...


@overload
def scaled_upper_gamma_half(
    w: npt.ArrayLike, sqrt_w: npt.ArrayLike | None = None
) -> ComplexArray: ...


def scaled_upper_gamma_half(
    w: complex | npt.ArrayLike, sqrt_w: complex | npt.ArrayLike | None = None
) -> complex | ComplexArray:
    """Evaluate e^w Γ(1/2, w) = √π e^w erfc(√w) without forming the factors.

    The product is computed as √π·wofz(i√w), which stays finite where e^w and
    erfc(√w) separately overflow or underflow.

    Args:
        w: Complex argument (scalar or array)
        sqrt_w: Square root of w selecting the sheet of Γ(1/2, ·). Defaults to
            the principal root (Re √w ≥ 0).

    Returns:
        The scaled upper incomplete Gamma value, scalar for scalar input

    Raises:
        DomainError: If any argument is NaN or infinite
    """
    scalar = np.ndim(w) == 0 and (sqrt_w is None or np.ndim(sqrt_w) == 0)
    w_arr = np.asarray(w, dtype=np.complex128)
    if not np.all(np.isfinite(w_arr)):
        raise DomainError(f"Non-finite argument to scaled_upper_gamma_half: {w}")

    if sqrt_w is None:
        root = np.sqrt(w_arr)
    else:
        root = np.asarray(sqrt_w, dtype=np.complex128)
        if not np.all(np.isfinite(root)):
            raise DomainError(f"Non-finite sheet selector: {sqrt_w}")
        if not np.allclose(root * root, w_arr, rtol=1e-8, atol=1e-300):
            raise DomainError("sqrt_w does not square to w")

    value = SQRT_PI * special.wofz(1j * root)
    if scalar:
        return complex(value)
    return np.asarray(value, dtype=np.complex128)


def scaled_upper_gamma_half_reference(
    w: complex, accuracy: float = 1e-15, max_iteration: int = 5000
) -> complex:
    """Reference evaluation of e^w Γ(1/2, w) on the principal branch.

    Uses the power series of γ(1/2, w) for |w| ≤ 4 and the Legendre continued
    fraction (modified Lentz) otherwise. Independent of the Faddeeva route.

    Args:
        w: Complex argument, not on the negative real axis when |w| > 4
        accuracy: Relative convergence target
        max_iteration: Term / iteration budget

    Returns:
        e^w Γ(1/2, w)

    Raises:
        DomainError: If w is not finite
        ConvergenceError: If the budget is exhausted
    """
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError(f"Non-finite argument: {w}")
    if w == 0:
        return complex(SQRT_PI)

    a = 0.5
    root = complex(np.sqrt(w))

    if abs(w) <= 4.0:
        # e^w γ(1/2, w) = √w Σ wⁿ / (a (a+1) ... (a+n))
        ap = a
        del_ = 1.0 / a + 0j
        sum_ = del_
        for _ in range(max_iteration):
            ap += 1.0
            del_ *= w / ap
            sum_ += del_
            if abs(del_) < abs(sum_) * accuracy:
                return complex(SQRT_PI * np.exp(w) - root * sum_)
        raise ConvergenceError("Series for the incomplete Gamma function did not converge")

    tiny = sys.float_info.min / sys.float_info.epsilon
    b = w + 1.0 - a
    c = 1.0 / tiny + 0j
    d = 1.0 / b
    h = d
    for i in range(1, max_iteration + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < accuracy:
            return complex(root * h)
    raise ConvergenceError("Continued fraction for the incomplete Gamma function did not converge")


def polynomial_residual(
    coeffs: Sequence[complex], z: complex | npt.ArrayLike
) -> complex | ComplexArray:
    """Horner-evaluate the monic quartic z⁴ + c3 z³ + c2 z² + c1 z + c0.

    Args:
        coeffs: (c0, c1, c2, c3)
        z: Evaluation point(s)

    Returns:
        Q(z), scalar for scalar input
    """
    c0, c1, c2, c3 = (complex(c) for c in coeffs)
    z_arr = np.asarray(z, dtype=np.complex128)
    value = (((z_arr + c3) * z_arr + c2) * z_arr + c1) * z_arr + c0
    if np.ndim(z) == 0:
        return complex(value)
    return np.asarray(value, dtype=np.complex128)


def _sort_roots(roots: ComplexArray) -> list[complex]:
    """Order roots by argument in (-π, π], ties by modulus."""
    keyed = []
    for z in roots:
        angle = math.atan2(z.imag, z.real)
        if angle <= -math.pi:
            angle = math.pi
        keyed.append((round(angle, 12), abs(z), complex(z)))
    keyed.sort(key=lambda item: (item[0], item[1]))
    return [item[2] for item in keyed]


def root_residual_bound(coeffs: Sequence[complex], z: complex) -> float:
    """Acceptance bound for |Q(z)| at a computed root z of the monic quartic.

    The bound is 1e-10 |Q(0)|, raised to the rounding level 8·eps·Σ|c_k||z|^k of
    Horner evaluation where that is larger. When |c0| is small against |z|⁴, Q at
    the double nearest to the exact root already exceeds 1e-10 |c0|.

    Args:
        coeffs: (c0, c1, c2, c3)
        z: Computed root

    Returns:
        Largest admissible |Q(z)|
    """
    c0, c1, c2, c3 = (abs(complex(c)) for c in coeffs)
    m = abs(complex(z))
    rounding = 8.0 * np.finfo(np.float64).eps * ((((m + c3) * m + c2) * m + c1) * m + c0)
    return max(1e-10 * c0, float(rounding), sys.float_info.min)


def _newton_polish(coeffs: npt.NDArray[np.complex128], roots: ComplexArray) -> ComplexArray:
    """Newton steps in extended precision, rounded back to the nearest double."""
    wide = coeffs.astype(np.clongdouble)
    deriv = np.polyder(wide)
    eps = np.finfo(np.longdouble).eps
    polished = roots.copy()
    for i, z in enumerate(roots):
        zw = np.clongdouble(z)
        pz = np.polyval(wide, zw)
        for _ in range(6):
            dpz = np.polyval(deriv, zw)
            if dpz == 0:
                break
            candidate = zw - pz / dpz
            pc = np.polyval(wide, candidate)
            if abs(pc) >= abs(pz):
                break
            step = abs(candidate - zw)
            zw, pz = candidate, pc
            if step <= eps * abs(zw):
                break
        polished[i] = complex(zw)
    return polished


def _aberth(coeffs: npt.NDArray[np.complex128], max_iter: int) -> tuple[ComplexArray, int, bool]:
    """Aberth-Ehrlich simultaneous iteration for a monic polynomial.

    Returns:
        (roots, iterations used, converged)
    """
    n = coeffs.size - 1
    deriv = np.polyder(coeffs)
    lowest_first = tuple(complex(c) for c in coeffs[:0:-1])
    radius = 1.0 + float(np.max(np.abs(coeffs[1:])))

    # Offset angle breaks the symmetry of real-coefficient inputs
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)

    for iteration in range(1, max_iter + 1):
        converged = True
        for i in range(n):
            zi = z[i]
            pv = np.polyval(coeffs, zi)
            if abs(pv) <= 1e-3 * root_residual_bound(lowest_first, zi):
                continue
            dpv = np.polyval(deriv, zi)
            sum_term = np.sum(1.0 / (zi - np.delete(z, i)))
            denom = dpv - pv * sum_term
            if denom == 0:
                converged = False
                continue
            delta = pv / denom
            if abs(delta) > 1e-15 * max(1.0, abs(zi)):
                converged = False
            z[i] = zi - delta
        if converged:
            return z, iteration, True
    return z, max_iter, False


def quartic_roots(
    c0: complex, c1: complex, c2: complex, c3: complex, max_iter: int = 500
) -> list[complex]:
    """Find the four roots of z⁴ + c3 z³ + c2 z² + c1 z + c0.

    Args:
        c0: Constant coefficient
        c1: Linear coefficient
        c2: Quadratic coefficient
        c3: Cubic coefficient
        max_iter: Iteration budget of the simultaneous iteration

    Returns:
        The 4 roots sorted by argument in (-π, π], ties by modulus

    Raises:
        DomainError: If a coefficient is not finite
        ConvergenceError: If no method reaches the residual bound
    """
    coeffs = np.array([1.0, c3, c2, c1, c0], dtype=np.complex128)
    if not np.all(np.isfinite(coeffs)):
        raise DomainError(f"Non-finite quartic coefficients: {coeffs[1:]}")

    lowest_first = (complex(c0), complex(c1), complex(c2), complex(c3))

    def excess(candidates: ComplexArray) -> float:
        """Largest |Q(z)| relative to its acceptance bound."""
        return max(
            abs(complex(np.polyval(coeffs, z))) / root_residual_bound(lowest_first, z)
            for z in candidates
        )

    roots, iterations, converged = _aberth(coeffs, max_iter)
    roots = _newton_polish(coeffs, roots)
    worst = excess(roots)
    method = "aberth"

    if not converged or worst > 1.0:
        logger.debug(
            "Aberth iteration insufficient (converged=%s, residual/bound=%.3e); "
            "using companion matrix",
            converged,
            worst,
        )
        roots = _newton_polish(coeffs, np.roots(coeffs).astype(np.complex128))
        worst = excess(roots)
        method = "companion"
        if worst > 1.0:
            raise ConvergenceError(
                f"Quartic root finder did not converge: residual is {worst:.3e} times "
                f"its bound after {iterations} iterations"
            )

    log_numerics(logger, f"quartic_roots.{method}", evaluations=iterations, error_estimate=worst)

    scale = float(np.max(np.abs(roots)))
    min_distance = min(
        abs(roots[i] - roots[j]) for i in range(4) for j in range(i + 1, 4)
    )
    if min_distance < 1e-6 * scale:
        message = f"Near-multiple quartic roots: min pairwise distance {min_distance:.3e}"
        logger.warning(message)
        warnings.warn(message, NearMultipleRootWarning, stacklevel=2)

    return _sort_roots(roots)


def _quad_part(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    tol: float,
    weight: str | None = None,
    wvar: float | None = None,
) -> tuple[float, float]:
    """Run scipy quad with full output, translating divergence into DivergenceError."""
    kwargs: dict[str, object] = {"full_output": 1, "limit": 200}
    if weight is None:
        kwargs.update(epsabs=tol, epsrel=min(tol, 1e-10))
    else:
        # The Fourier integrator only honours epsabs
        kwargs.update(weight=weight, wvar=wvar, epsabs=tol, limlst=200)
    out = integrate.quad(func, lower, upper, **kwargs)
    value, error = float(out[0]), float(out[1])
    if len(out) > 3:
        message = str(out[3])
        if "divergent" in message:
            raise DivergenceError(f"Quadrature on [{lower}, {upper}] diverges: {message}")
        logger.debug("quad reported: %s", message.splitlines()[0] if message else "")
    return value, abs(error)


def oscillatory_halfline_quad(
    profile: Callable[[float], float], frequency: float, tol: float = 1e-10
) -> QuadratureResult:
    """Compute ∫₀^∞ P(x) e^{-ixτ} dx for an integrable profile P.

    The first panel [0, min(π/(4|τ|), 1)] is integrated in u = √x, which removes a
    √x edge. The tail uses the Fourier-weighted semi-infinite integrator. The
    imaginary part carries sign(τ), so the τ → -τ result is the exact complex
    conjugate.

    Args:
        profile: Real function P(x) on [0, ∞)
        frequency: τ in e^{-ixτ}
        tol: Absolute error target

    Returns:
        QuadratureResult; converged is False when the error estimate exceeds tol

    Raises:
        DomainError: If frequency or tol is not finite
        DivergenceError: If a panel is reported divergent
    """
    if not math.isfinite(frequency) or not (tol > 0 and math.isfinite(tol)):
        raise DomainError(f"Invalid quadrature arguments: frequency={frequency}, tol={tol}")

    evaluations = 0

    def counted(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return float(profile(x))

    def edge(u: float) -> float:
        return 2.0 * u * counted(u * u)

    tau = abs(frequency)
    if tau == 0.0:
        value, error = _quad_part(edge, 0.0, np.inf, tol)
        result = QuadratureResult(complex(value), error, max(evaluations, 1), error <= tol)
        return _finish(result, frequency, tol)

    panel = min(math.pi / (4.0 * tau), 1.0)
    root_panel = math.sqrt(panel)
    part_tol = tol / 4.0

    edge_re, err_re = _quad_part(
        lambda u: edge(u) * math.cos(tau * u * u), 0.0, root_panel, part_tol
    )
    edge_im, err_im = _quad_part(
        lambda u: edge(u) * math.sin(tau * u * u), 0.0, root_panel, part_tol
    )
    tail_re, terr_re = _quad_part(counted, panel, np.inf, part_tol, weight="cos", wvar=tau)
    tail_im, terr_im = _quad_part(counted, panel, np.inf, part_tol, weight="sin", wvar=tau)

    sign = 1.0 if frequency > 0 else -1.0
    value = complex(edge_re + tail_re, -sign * (edge_im + tail_im))
    error = err_re + err_im + terr_re + terr_im
    result = QuadratureResult(value, error, max(evaluations, 1), error <= tol)
    return _finish(result, frequency, tol)


def _finish(result: QuadratureResult, frequency: float, tol: float) -> QuadratureResult:
    """Report a quadrature to metrics and warn when accuracy was not reached."""
    metrics = current_metrics()
    if metrics is not None:
        metrics.record_quadrature(result.converged)
    if not (math.isfinite(result.value.real) and math.isfinite(result.value.imag)):
        raise DivergenceError(f"Quadrature at frequency {frequency} produced {result.value}")
    if not result.converged:
        message = (
            f"Oscillatory quadrature at frequency {frequency} reached error "
            f"{result.abs_error_estimate:.3e} > tol {tol:.3e}"
        )
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)
    return result
