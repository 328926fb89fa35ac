"""Unit tests for the closed-form band-edge propagator."""

import cmath
import math

import numpy as np
import pytest

from bandedge.core.errors import DistinctnessError, DomainError, ResidueIdentityError
from bandedge.model.exact import (
    QuarticSolution,
    asymptotic_propagator,
    asymptotics,
    bound_state,
    continuum_part,
    pole_part,
    principal_branch_propagator,
    propagator,
    quartic_coefficients,
    residue,
    solve_quartic,
    trapped_population,
)
from bandedge.model.reservoir import SpecialReservoir
from bandedge.numerics.oracle import special_kernel
from bandedge.numerics.specfun import polynomial_residual, root_residual_bound

PUBLISHED_ROOTS = [-1.282 + 0.716j, -1.150 - 1.150j, 0.716 - 1.282j, 0.717 + 0.717j]


def test_quartic_coefficients(reference_reservoir: SpecialReservoir) -> None:
    """Test the monic quartic coefficients at A = 0.8, a = 1."""
    c0, c1, c2, c3 = quartic_coefficients(reference_reservoir)
    assert c0 == pytest.approx(math.pi * math.sqrt(2.0) * 0.8)
    assert c1 == 0
    assert c2 == 1j
    assert c3 == 1 + 1j


def test_reference_roots(reference_solution: QuarticSolution) -> None:
    """Test the roots match the reference values to 2e-3 per component."""
    for expected in PUBLISHED_ROOTS:
        closest = min(reference_solution.roots, key=lambda z: abs(z - expected))
        assert abs(closest.real - expected.real) <= 2e-3
        assert abs(closest.imag - expected.imag) <= 2e-3


def test_reference_constants(reference_solution: QuarticSolution) -> None:
    """Test τ ≈ 0.974 and |D| ≈ 0.112."""
    summary = asymptotics(reference_solution)
    assert summary.tau == pytest.approx(0.974, abs=2e-3)
    assert abs(summary.D) == pytest.approx(0.112, abs=2e-3)


def test_residue_identities_random_parameters() -> None:
    """Test Σ R = 0 and Σ R z = 1 for random (A, a) in (0.01, 100)²."""
    rng = np.random.default_rng(5)
    for A, a in np.exp(rng.uniform(math.log(0.01), math.log(100.0), (50, 2))):
        sol = solve_quartic(SpecialReservoir(A=float(A), a=float(a), omega0=1.0))
        sum_r, sum_rz = sol.identity_residuals
        assert sum_r <= 1e-10
        assert sum_rz <= 1e-10
        coeffs = quartic_coefficients(sol.reservoir)
        for z in sol.roots:
            assert abs(polynomial_residual(coeffs, z)) <= root_residual_bound(coeffs, z)


def test_root_scaling_law(reference_solution: QuarticSolution) -> None:
    """Test roots for (A s^{5/2}, a s) are s^{1/2} times the roots for (A, a)."""
    s = 4.0
    scaled = solve_quartic(SpecialReservoir(A=0.8 * s**2.5, a=s, omega0=0.5))
    for z in reference_solution.roots:
        assert min(abs(w - math.sqrt(s) * z) for w in scaled.roots) < 1e-10


def test_residue_formula_matches_partial_fractions(reference_solution: QuarticSolution) -> None:
    """Test Σ R_l / (s - z_l) reproduces the rational transform in s = √u."""
    r = reference_solution.reservoir
    for s in (0.7 + 0.2j, 2.0 - 1.0j):
        pairs = zip(reference_solution.roots, reference_solution.residues, strict=True)
        partial_sum = sum(res / (s - z) for z, res in pairs)
        root_a = math.sqrt(r.a)
        numerator = root_a * (1j * root_a + s) * (root_a + s)
        denominator = root_a * polynomial_residual(quartic_coefficients(r), s)
        assert abs(partial_sum - numerator / denominator) < 1e-12
    assert residue(r, reference_solution.roots[0]) == reference_solution.residues[0]


def test_corrupted_residue_rejected(reference_solution: QuarticSolution) -> None:
    """Test a perturbed residue violates Σ R = 0."""
    residues = list(reference_solution.residues)
    residues[0] += 1e-6
    with pytest.raises(ResidueIdentityError, match="sum R = 0"):
        QuarticSolution(
            roots=reference_solution.roots,
            residues=tuple(residues),  # type: ignore[arg-type]
            reservoir=reference_solution.reservoir,
        )


def test_root_residual_bound_scales_with_small_c0() -> None:
    """Test roots with |c0| < 1 meet 1e-10 |c0| and a 3e-11 shift is rejected."""
    r = SpecialReservoir(A=0.019307, a=100.0, omega0=1.0)
    sol = solve_quartic(r)
    coeffs = quartic_coefficients(r)
    assert abs(coeffs[0]) < 1e-2

    smallest = min(range(4), key=lambda i: abs(sol.roots[i]))
    z = sol.roots[smallest]
    assert abs(polynomial_residual(coeffs, z)) <= 1e-10 * abs(coeffs[0])
    assert root_residual_bound(coeffs, z) == pytest.approx(1e-10 * abs(coeffs[0]))
    for root in sol.roots:
        assert abs(polynomial_residual(coeffs, root)) <= root_residual_bound(coeffs, root)

    roots = list(sol.roots)
    roots[smallest] += 3e-11
    with pytest.raises(ResidueIdentityError, match="Root residual"):
        QuarticSolution(
            roots=tuple(roots),  # type: ignore[arg-type]
            residues=sol.residues,
            reservoir=r,
        )


def test_repeated_root_rejected(reference_solution: QuarticSolution) -> None:
    """Test coincident roots raise DistinctnessError."""
    z = reference_solution.roots[0]
    with pytest.raises(DistinctnessError):
        QuarticSolution(
            roots=(z, z, reference_solution.roots[2], reference_solution.roots[3]),
            residues=reference_solution.residues,
            reservoir=reference_solution.reservoir,
        )


def test_propagator_initial_value(reference_solution: QuarticSolution) -> None:
    """Test G(0) = 1 exactly and continuity as t → 0."""
    assert propagator(reference_solution, 0.0) == 1.0
    split = continuum_part(reference_solution, 0.0) + pole_part(reference_solution, 0.0)
    assert abs(split - 1.0) < 1e-12
    assert abs(propagator(reference_solution, 1e-10) - 1.0) < 1e-4


def test_propagator_vectorized(reference_solution: QuarticSolution) -> None:
    """Test array times give the same values as scalar times."""
    times = np.array([0.0, 0.5, 2.0, 7.5])
    values = propagator(reference_solution, times)
    assert values.shape == (4,)
    for t, v in zip(times, values, strict=True):
        assert v == pytest.approx(propagator(reference_solution, float(t)), abs=1e-15)


def test_propagator_rejects_negative_time(reference_solution: QuarticSolution) -> None:
    """Test negative or non-finite times raise DomainError."""
    with pytest.raises(DomainError):
        propagator(reference_solution, -1.0)
    with pytest.raises(DomainError):
        propagator(reference_solution, np.array([0.0, float("nan")]))


def test_contractivity_random_parameters() -> None:
    """Test |G(t)| ≤ 1 + 1e-9 on [0, 20τ] for random parameter sets."""
    rng = np.random.default_rng(9)
    for A, a in np.exp(rng.uniform(math.log(0.1), math.log(10.0), (10, 2))):
        sol = solve_quartic(SpecialReservoir(A=float(A), a=float(a), omega0=1.0))
        times = np.linspace(0.0, 20.0 * asymptotics(sol).tau, 1000)
        assert np.max(np.abs(propagator(sol, times))) <= 1.0 + 1e-9


@pytest.mark.slow
def test_propagator_satisfies_integro_differential_equation(
    reference_reservoir: SpecialReservoir, reference_solution: QuarticSolution
) -> None:
    """Test dG/dt = -(f * G)(t) on [0.1τ, 5τ]."""
    kernel = special_kernel(reference_reservoir)
    tau = asymptotics(reference_solution).tau
    nodes, weights = np.polynomial.legendre.leggauss(64)
    h = 1e-3
    for t in (0.1 * tau, tau, 2.0 * tau, 5.0 * tau):
        stencil = propagator(reference_solution, t + h * np.array([-2.0, -1.0, 1.0, 2.0]))
        derivative = (stencil[0] - 8.0 * stencil[1] + 8.0 * stencil[2] - stencil[3]) / (12.0 * h)
        s = 0.5 * t * (nodes + 1.0)
        f = np.array([kernel(t - x) for x in s])
        convolution = 0.5 * t * np.sum(weights * f * propagator(reference_solution, s))
        assert abs(derivative + convolution) <= 1e-3


def test_bound_state(reference_solution: QuarticSolution) -> None:
    """Test a root sits on arg z = π/4 and traps a finite population."""
    state = bound_state(reference_solution)
    assert state is not None
    assert cmath.phase(state.root) == pytest.approx(math.pi / 4, abs=1e-9)
    assert state.frequency == pytest.approx(abs(state.root) ** 2, rel=1e-9)
    assert abs(state.amplitude) == pytest.approx(0.665, abs=0.01)
    assert trapped_population(reference_solution) == pytest.approx(abs(state.amplitude) ** 2)


def test_long_time_modulus_approaches_bound_state(reference_solution: QuarticSolution) -> None:
    """Test |G(t)| → |2 R z| of the bound state."""
    state = bound_state(reference_solution)
    assert state is not None
    tau = asymptotics(reference_solution).tau
    assert abs(propagator(reference_solution, 200.0 * tau)) == pytest.approx(
        abs(state.amplitude), abs=1e-3
    )


def test_continuum_power_law(reference_solution: QuarticSolution) -> None:
    """Test t^{3/2} G_c(t) → D at 50τ and 100τ."""
    summary = asymptotics(reference_solution)
    for factor, allowed in ((50.0, 0.05), (100.0, 0.02)):
        t = factor * summary.tau
        scaled = continuum_part(reference_solution, t) * t**1.5
        assert abs(scaled - summary.D) / abs(summary.D) <= allowed


def test_asymptotic_propagator(reference_solution: QuarticSolution) -> None:
    """Test the power law -D t^{-3/2} and its domain."""
    summary = asymptotics(reference_solution)
    assert asymptotic_propagator(summary, 4.0) == pytest.approx(-summary.D / 8.0)
    values = asymptotic_propagator(summary, np.array([1.0, 4.0]))
    assert values.shape == (2,)
    with pytest.raises(DomainError):
        asymptotic_propagator(summary, 0.0)


def test_principal_branch_differs_from_exact(reference_solution: QuarticSolution) -> None:
    """Test the all-principal-branch sum equals 1 at t = 0 but misses the pole terms later."""
    assert abs(principal_branch_propagator(reference_solution, 0.0) - 1.0) < 1e-12
    exact = propagator(reference_solution, 5.0)
    difference = principal_branch_propagator(reference_solution, 5.0) - exact
    assert abs(difference) > 1e-3
