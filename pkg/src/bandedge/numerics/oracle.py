"""Independent numerical routes to the propagator.

- volterra_solve marches Ġ(t) = -∫₀^t f(t-s) G(s) ds, G(0) = 1, with trapezoidal
  convolution and a trapezoidal time step
- laplace_invert inverts a Laplace transform G̃(u) on a deformed contour (fixed
  Talbot) or on the Bromwich line with alternating-series acceleration
"""

import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass
from functools import partial
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, field_validator, model_validator

from bandedge.core.errors import AccuracyWarning, DomainError, InstabilityError
from bandedge.core.logging import log_numerics
from bandedge.model.reservoir import (
    LorentzianReservoir,
    SpecialReservoir,
    correlation_function,
    lorentzian_correlation,
)

logger = logging.getLogger(__name__)

Kernel = Callable[[float], complex | float]
Transform = Callable[[complex], complex]

INSTABILITY_BOUND = 10.0


class VolterraConfig(BaseModel):
    """Volterra marching configuration."""

    step: float = Field(gt=0, description="Output time step")
    horizon: float = Field(gt=0, description="Last time point")
    kernel_tol: float = Field(default=1e-10, gt=0, description="Kernel quadrature tolerance")
    richardson: tuple[float, ...] = Field(
        default=(), description="Error exponents eliminated by step halving, in order"
    )

    @field_validator("richardson")
    @classmethod
    def validate_exponents(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Validate Richardson exponents are positive."""
        if any(p <= 0 for p in v):
            raise ValueError(f"Invalid richardson exponents: {v}. Must be positive")
        return v

    @model_validator(mode="after")
    def validate_step(self) -> "VolterraConfig":
        """Validate step resolves the horizon."""
        if self.step > self.horizon / 100:
            raise ValueError(
                f"Invalid step: {self.step} exceeds horizon/100 = {self.horizon / 100}"
            )
        return self


class InversionConfig(BaseModel):
    """Numerical Laplace inversion configuration."""

    method: Literal["cohen", "talbot"] = Field(default="cohen", description="Contour")
    contour_nodes: int = Field(default=64, ge=16, description="Nodes (talbot) or 2x terms (cohen)")
    shift: float = Field(default=0.01, gt=0, description="Talbot contour shift")
    abscissa: float = Field(
        default=24.0, gt=0, description="Bromwich line parameter: Re u = abscissa / (2t)"
    )

    @field_validator("contour_nodes")
    @classmethod
    def validate_even(cls, v: int) -> int:
        """Validate node count is even."""
        if v % 2:
            raise ValueError(f"Invalid contour_nodes: {v}. Must be even")
        return v


@dataclass(frozen=True)
class VolterraSolution:
    """Propagator samples from the Volterra marcher."""

    times: npt.NDArray[np.float64]
    values: npt.NDArray[np.complex128]
    error_estimate: float
    kernel_accuracy_reached: bool


@dataclass(frozen=True)
class InversionResult:
    """Inverted values with the node-halving error estimate."""

    values: npt.NDArray[np.complex128]
    error_estimate: npt.NDArray[np.float64]


def special_kernel(r: SpecialReservoir, tol: float = 1e-10) -> Kernel:
    """Correlation function of the band-edge reservoir as a Volterra kernel."""
    return partial(correlation_function, r, tol=tol)


def lorentzian_kernel(r: LorentzianReservoir) -> Kernel:
    """Correlation function (γλ/2) e^{-λ|τ|} as a Volterra kernel."""
    return partial(lorentzian_correlation, r)


def _tabulate_kernel(
    kernel: Kernel, step: float, n: int
) -> tuple[npt.NDArray[np.complex128], bool]:
    """Kernel values f(j h), j = 0..n, and whether every quadrature met its tolerance."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AccuracyWarning)
        values = np.array([complex(kernel(j * step)) for j in range(n + 1)], dtype=np.complex128)
    missed = sum(1 for w in caught if issubclass(w.category, AccuracyWarning))
    for w in caught:
        if not issubclass(w.category, AccuracyWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if not np.all(np.isfinite(values)):
        raise InstabilityError("Kernel produced non-finite values")
    if missed:
        message = f"{missed} of {n + 1} kernel quadratures missed their tolerance"
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)
    return values, missed == 0


def _march(f: npt.NDArray[np.complex128], h: float, n: int) -> npt.NDArray[np.complex128]:
    """Trapezoidal marching on n steps of size h; f holds f(j h) for j = 0..n."""
    G = np.empty(n + 1, dtype=np.complex128)
    G[0] = 1.0
    integral_prev = 0j
    denom = 1.0 + 0.25 * h * h * f[0]
    for m in range(n):
        # Convolution at t_{m+1} without the implicit G_{m+1} term
        known = h * (0.5 * f[m + 1] * G[0] + np.dot(f[m:0:-1], G[1 : m + 1]))
        G[m + 1] = (G[m] - 0.5 * h * (integral_prev + known)) / denom
        integral_prev = known + 0.5 * h * f[0] * G[m + 1]
        if abs(G[m + 1]) > INSTABILITY_BOUND:
            raise InstabilityError(
                f"|G| = {abs(G[m + 1]):.3e} exceeds {INSTABILITY_BOUND} at t = {(m + 1) * h}; "
                "reduce the step"
            )
    return G


def volterra_solve(kernel: Kernel, cfg: VolterraConfig) -> VolterraSolution:
    """Solve Ġ = -(f * G), G(0) = 1, on {0, step, ..., horizon}.

    Without Richardson exponents the result is the plain step solution and the
    error estimate is max|G_h - G_2h| / 3 on shared nodes. With exponents
    (p_1, ..., p_k) the step is halved k times and the error terms h^{p_j} are
    eliminated in order; the estimate is the last tableau correction.

    Args:
        kernel: f(τ) for τ ≥ 0
        cfg: Volterra configuration

    Returns:
        VolterraSolution on the output grid

    Raises:
        InstabilityError: If |G| exceeds 10
    """
    k = len(cfg.richardson)
    n_out = int(round(cfg.horizon / cfg.step))
    fine_step = cfg.step / 2**k
    n_fine = n_out * 2**k
    times = cfg.step * np.arange(n_out + 1)

    f_fine, accurate = _tabulate_kernel(kernel, fine_step, n_fine)

    if k == 0:
        G_h = _march(f_fine, cfg.step, n_out)
        n_half = n_out // 2
        G_2h = _march(f_fine[::2], 2 * cfg.step, n_half)
        error = float(np.max(np.abs(G_h[: 2 * n_half + 1 : 2] - G_2h))) / 3.0
        values = G_h
    else:
        # Row i is the run with step fine_step * 2^i, sampled on the output grid
        table = [
            _march(f_fine[:: 2**i], fine_step * 2**i, n_fine // 2**i)[:: 2 ** (k - i)]
            for i in range(k + 1)
        ]
        previous = table[0]
        for p in cfg.richardson:
            factor = 2.0**p
            previous = table[0]
            table = [
                (factor * table[i] - table[i + 1]) / (factor - 1.0) for i in range(len(table) - 1)
            ]
        values = table[0]
        error = float(np.max(np.abs(values - previous)))

    log_numerics(
        logger, "volterra_solve", evaluations=n_fine + 1, error_estimate=error, converged=accurate
    )
    return VolterraSolution(
        times=times,
        values=np.asarray(values, dtype=np.complex128),
        error_estimate=error,
        kernel_accuracy_reached=accurate,
    )


def _talbot(transform: Transform, t: float, half_nodes: int, shift: float) -> complex:
    """Two-sided fixed Talbot sum for a complex-valued original."""
    rho = 2.0 * half_nodes / (5.0 * t)
    k = np.arange(-(half_nodes - 1), half_nodes)
    theta = k * math.pi / half_nodes
    nonzero = theta != 0
    cot = np.zeros_like(theta)
    cot[nonzero] = 1.0 / np.tan(theta[nonzero])
    sigma = np.zeros_like(theta)
    sigma[nonzero] = theta[nonzero] / np.sin(theta[nonzero]) ** 2 - cot[nonzero]

    nodes = shift + rho * theta * (cot + 1j)
    nodes[~nonzero] = shift + rho
    values = np.array([complex(transform(complex(p))) for p in nodes], dtype=np.complex128)
    weights = np.exp(t * nodes) * (1.0 + 1j * sigma)
    return complex(np.dot(weights, values) / (5.0 * t))


def _cohen(transform: Transform, t: float, terms: int, abscissa: float) -> complex:
    """Bromwich-line trapezoid with Cohen-Villegas-Zagier alternating-series acceleration."""
    c = abscissa / (2.0 * t)
    ks = np.arange(1, terms + 1)
    upper = c + 1j * math.pi * ks / t
    lower = np.conj(upper)
    a = np.array(
        [
            0.5 * (complex(transform(complex(p))) + complex(transform(complex(q))))
            for p, q in zip(upper, lower, strict=True)
        ],
        dtype=np.complex128,
    )
    head = complex(transform(complex(c)))

    d = (3.0 + math.sqrt(8.0)) ** terms
    d = 0.5 * (d + 1.0 / d)
    b = -1.0
    cc = -d
    s = 0j
    for k in range(terms):
        cc = b - cc
        s += cc * a[k]
        b = 2.0 * (k + terms) * (k - terms) * b / ((2 * k + 1) * (k + 1))

    return complex(math.exp(abscissa / 2.0) / t * (0.5 * head - s / d))


def invert_with_estimate(
    transform: Transform, t: float | npt.ArrayLike, cfg: InversionConfig | None = None
) -> InversionResult:
    """Invert a Laplace transform and estimate the error from a 3/4-node rerun.

    Args:
        transform: G̃(u), analytic right of the contour
        t: Time(s) > 0
        cfg: Inversion configuration

    Returns:
        InversionResult

    Raises:
        DomainError: If a time is not positive
    """
    cfg = cfg or InversionConfig()
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(times)) or np.any(times <= 0):
        raise DomainError(f"Laplace inversion needs t > 0, got {t}")

    half = cfg.contour_nodes // 2
    coarse = max(2, (3 * half) // 4)

    def evaluate(time: float, nodes: int) -> complex:
        if cfg.method == "talbot":
            return _talbot(transform, time, nodes, cfg.shift)
        return _cohen(transform, time, nodes, cfg.abscissa)

    values = np.array([evaluate(float(s), half) for s in times], dtype=np.complex128)
    estimate = np.array(
        [abs(v - evaluate(float(s), coarse)) for s, v in zip(times, values, strict=True)]
    )

    bad = estimate > 1e-8 * np.maximum(1.0, np.abs(values))
    if np.any(bad):
        message = (
            f"Laplace inversion ({cfg.method}) error estimate {float(np.max(estimate)):.3e} "
            f"above target at t = {times[bad].tolist()}"
        )
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=2)
    return InversionResult(values=values, error_estimate=estimate)


def laplace_invert(
    transform: Transform, t: float | npt.ArrayLike, cfg: InversionConfig | None = None
) -> complex | npt.NDArray[np.complex128]:
    """Invert a Laplace transform at t > 0.

    The fixed Talbot contour p(θ) = shift + rθ(cot θ + i), r = 2M/(5t), suits
    transforms whose singularities lie on or near the negative real axis. The
    Bromwich-line method ("cohen") suits singularities anywhere in Re u ≤ 0.
    No node lies on the negative real axis.

    Returns:
        The original at t, scalar for scalar input

    Warns:
        AccuracyWarning: If the error estimate exceeds 1e-8 max(1, |f|)
    """
    result = invert_with_estimate(transform, t, cfg)
    if np.ndim(t) == 0:
        return complex(result.values[0])
    return result.values
