"""Unit tests for the Volterra and Laplace-inversion oracles."""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import special

from bandedge.core.errors import DomainError, InstabilityError
from bandedge.model.exact import QuarticSolution, asymptotics, propagator, solve_quartic
from bandedge.model.lorentzian import laplace_propagator_L, propagator_L, propagator_params
from bandedge.model.reservoir import (
    LorentzianReservoir,
    SpecialReservoir,
    laplace_propagator_closed_form,
)
from bandedge.numerics.oracle import (
    InversionConfig,
    VolterraConfig,
    invert_with_estimate,
    laplace_invert,
    lorentzian_kernel,
    special_kernel,
    volterra_solve,
)
from bandedge.numerics.specfun import SQRT_PI, scaled_upper_gamma_half


def test_volterra_config_validation() -> None:
    """Test the step must resolve the horizon and exponents must be positive."""
    with pytest.raises(ValidationError, match="horizon/100"):
        VolterraConfig(step=0.5, horizon=10.0)
    with pytest.raises(ValidationError, match="richardson"):
        VolterraConfig(step=0.01, horizon=10.0, richardson=(2.0, -1.0))
    with pytest.raises(ValidationError):
        VolterraConfig(step=0.0, horizon=10.0)


def test_inversion_config_validation() -> None:
    """Test node counts must be even and at least 16."""
    with pytest.raises(ValidationError, match="even"):
        InversionConfig(contour_nodes=33)
    with pytest.raises(ValidationError):
        InversionConfig(contour_nodes=8)
    with pytest.raises(ValidationError):
        InversionConfig(method="euler")  # type: ignore[arg-type]


def test_inversion_default_is_bromwich_line() -> None:
    """Test InversionConfig defaults to the cohen method."""
    assert InversionConfig().method == "cohen"
    assert laplace_invert(lambda u: 1.0 / (u + 1.0), 2.0) == pytest.approx(math.exp(-2.0), abs=1e-8)


def test_volterra_constant_kernel_second_order() -> None:
    """Test f ≡ 1 gives G = cos t with error ratio ≈ 4 on step halving."""
    errors = []
    for step in (0.05, 0.025):
        sol = volterra_solve(lambda tau: 1.0, VolterraConfig(step=step, horizon=10.0))
        errors.append(float(np.max(np.abs(sol.values - np.cos(sol.times)))))
    ratio = errors[0] / errors[1]
    assert 3.5 <= ratio <= 4.5


def test_volterra_solution_grid() -> None:
    """Test the output grid, G(0) = 1 and the step-doubling error estimate."""
    sol = volterra_solve(lambda tau: 1.0, VolterraConfig(step=0.05, horizon=10.0))
    assert len(sol.times) == 201
    assert sol.times[-1] == pytest.approx(10.0)
    assert sol.values[0] == 1.0
    assert sol.kernel_accuracy_reached
    actual = float(np.max(np.abs(sol.values - np.cos(sol.times))))
    assert sol.error_estimate == pytest.approx(actual, rel=0.3)


def test_volterra_richardson_improves_accuracy() -> None:
    """Test eliminating h² and h⁴ reduces the error on f ≡ 1."""
    plain = volterra_solve(lambda tau: 1.0, VolterraConfig(step=0.05, horizon=10.0))
    extrapolated = volterra_solve(
        lambda tau: 1.0, VolterraConfig(step=0.05, horizon=10.0, richardson=(2.0, 4.0))
    )
    np.testing.assert_allclose(extrapolated.times, plain.times)
    plain_error = np.max(np.abs(plain.values - np.cos(plain.times)))
    extrapolated_error = np.max(np.abs(extrapolated.values - np.cos(extrapolated.times)))
    assert extrapolated_error < 1e-3 * plain_error


def test_volterra_lorentzian(strong_lorentzian: LorentzianReservoir) -> None:
    """Test the Volterra route reproduces G_L to 1e-6."""
    horizon = 10.0
    cfg = VolterraConfig(step=horizon / 1000, horizon=horizon, richardson=(2.0, 4.0))
    sol = volterra_solve(lorentzian_kernel(strong_lorentzian), cfg)
    expected = propagator_L(propagator_params(strong_lorentzian), sol.times)
    assert np.max(np.abs(sol.values - expected)) <= 1e-6
    assert sol.error_estimate < 1e-6


def test_volterra_instability() -> None:
    """Test a growing solution raises InstabilityError."""
    with pytest.raises(InstabilityError, match="reduce the step"):
        volterra_solve(lambda tau: -100.0, VolterraConfig(step=0.01, horizon=1.0))


def test_volterra_non_finite_kernel() -> None:
    """Test a NaN kernel is reported as an instability."""
    with pytest.raises(InstabilityError, match="non-finite"):
        volterra_solve(lambda tau: float("nan"), VolterraConfig(step=0.01, horizon=1.0))


@pytest.mark.parametrize(
    ("transform", "original"),
    [
        (lambda u: 1.0 / u, lambda t: 1.0),
        (lambda u: 1.0 / (u + 1.0), lambda t: math.exp(-t)),
        (lambda u: 1.0 / np.sqrt(u), lambda t: 1.0 / math.sqrt(math.pi * t)),
        (
            lambda u: 1.0 / (np.sqrt(u) * (np.sqrt(u) + 1.0)),
            lambda t: scaled_upper_gamma_half(t).real / SQRT_PI,
        ),
    ],
)
def test_talbot_known_pairs(transform, original) -> None:
    """Test fixed Talbot on transforms singular on the non-positive real axis."""
    cfg = InversionConfig(method="talbot")
    for t in (0.1, 1.0, 5.0, 20.0):
        value = laplace_invert(transform, t, cfg)
        assert abs(value - original(t)) <= 1e-8 * max(1.0, abs(original(t)))


def test_erfc_pair_matches_scipy() -> None:
    """Test e^t erfc(√t) obtained by inversion against scipy.special.erfcx."""
    cfg = InversionConfig(method="talbot")
    t = 2.5
    value = laplace_invert(lambda u: 1.0 / (np.sqrt(u) * (np.sqrt(u) + 1.0)), t, cfg)
    assert abs(value - special.erfcx(math.sqrt(t))) <= 1e-8


def test_cohen_inverts_exact_transform(reference_solution: QuarticSolution) -> None:
    """Test Bromwich inversion of G̃(u) reproduces the closed form at 0.1τ to 10τ."""
    tau = asymptotics(reference_solution).tau
    times = tau * np.array([0.1, 1.0, 5.0, 10.0])
    reservoir = reference_solution.reservoir
    result = invert_with_estimate(
        lambda u: laplace_propagator_closed_form(reservoir, u),
        times,
        InversionConfig(method="cohen"),
    )
    assert np.max(np.abs(result.values - propagator(reference_solution, times))) <= 1e-6
    assert result.error_estimate.shape == (4,)


def test_cohen_inverts_lorentzian(strong_lorentzian: LorentzianReservoir) -> None:
    """Test Bromwich inversion of G̃_L(u) against the closed-form G_L."""
    params = propagator_params(strong_lorentzian)
    times = np.array([0.2, 1.0, 4.0])
    values = laplace_invert(
        lambda u: laplace_propagator_L(strong_lorentzian, u), times, InversionConfig(method="cohen")
    )
    assert np.max(np.abs(values - propagator_L(params, times))) <= 1e-6


def test_inversion_rejects_non_positive_time() -> None:
    """Test t ≤ 0 raises DomainError."""
    with pytest.raises(DomainError):
        laplace_invert(lambda u: 1.0 / u, 0.0)
    with pytest.raises(DomainError):
        laplace_invert(lambda u: 1.0 / u, np.array([1.0, -2.0]))


def test_special_kernel_matches_correlation_at_zero(reference_reservoir: SpecialReservoir) -> None:
    """Test the band-edge kernel at τ = 0 equals the total coupling π√(2/a) A."""
    kernel = special_kernel(reference_reservoir)
    assert complex(kernel(0.0)).real == pytest.approx(math.pi * math.sqrt(2.0) * 0.8, rel=1e-9)


@pytest.mark.slow
def test_volterra_special_reservoir(reference_solution: QuarticSolution) -> None:
    """Test the Volterra route reproduces the closed-form G(t) on [0, 10τ]."""
    tau = asymptotics(reference_solution).tau
    cfg = VolterraConfig(step=0.02 * tau, horizon=10.0 * tau, richardson=(1.5, 2.0))
    sol = volterra_solve(special_kernel(reference_solution.reservoir), cfg)
    assert np.max(np.abs(sol.values - propagator(reference_solution, sol.times))) <= 1e-4


@pytest.mark.slow
def test_three_routes_agree_random_parameters() -> None:
    """Test closed form, Bromwich inversion and Volterra agree for random (A, a)."""
    rng = np.random.default_rng(23)
    for A, a in np.exp(rng.uniform(math.log(0.1), math.log(10.0), (5, 2))):
        reservoir = SpecialReservoir(A=float(A), a=float(a), omega0=1.0)
        sol = solve_quartic(reservoir)
        tau = asymptotics(sol).tau
        times = tau * np.array([0.1, 1.0, 5.0, 10.0])
        exact = propagator(sol, times)

        inverted = laplace_invert(
            lambda u, r=reservoir: laplace_propagator_closed_form(r, u),
            times,
            InversionConfig(method="cohen"),
        )
        cfg = VolterraConfig(step=0.02 * tau, horizon=10.0 * tau, richardson=(1.5, 2.0))
        marched = volterra_solve(special_kernel(reservoir), cfg)
        volterra = np.interp(times, marched.times, marched.values.real) + 1j * np.interp(
            times, marched.times, marched.values.imag
        )

        assert np.max(np.abs(exact - inverted)) <= 1e-6
        assert np.max(np.abs(exact - volterra)) <= 1e-4
        assert np.max(np.abs(volterra - inverted)) <= 1e-4
