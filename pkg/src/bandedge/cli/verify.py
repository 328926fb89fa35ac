"""Verification suite behind the ``verify`` command.

Each check is registered on a RunMetrics instance and returns a CheckResult
with the measured deviation and the allowed deviation.
"""

import logging
import math
import warnings
from functools import partial
from typing import Any

import numpy as np
import numpy.typing as npt

from bandedge.core.config import OracleConfig, RunConfig
from bandedge.core.errors import PositivityError, ResidueIdentityError
from bandedge.core.metrics import CheckResult, CheckStatus, RunMetrics, compare
from bandedge.model.dynamics import QubitState, asymptotic_state, build_trajectory
from bandedge.model.exact import (
    QuarticSolution,
    asymptotics,
    continuum_part,
    propagator,
    quartic_coefficients,
    solve_quartic,
)
from bandedge.model.lorentzian import (
    laplace_propagator_L,
    propagator_L,
    propagator_params,
    zero_times,
)
from bandedge.model.reservoir import (
    LorentzianReservoir,
    Regime,
    SpecialReservoir,
    laplace_propagator_closed_form,
)
from bandedge.numerics.oracle import (
    InversionConfig,
    VolterraConfig,
    laplace_invert,
    lorentzian_kernel,
    special_kernel,
    volterra_solve,
)
from bandedge.numerics.specfun import (
    root_residual_bound,
    scaled_upper_gamma_half,
    scaled_upper_gamma_half_reference,
)

logger = logging.getLogger(__name__)

PUBLISHED_ROOTS = (-1.282 + 0.716j, -1.150 - 1.150j, 0.716 - 1.282j, 0.717 + 0.717j)
PUBLISHED_TAU = 0.974
PUBLISHED_D_MODULUS = 0.112
ORACLE_TIMES_IN_TAU = (0.1, 1.0, 5.0, 10.0)
IDENTITY_TOL = 1e-10
SEED = 20240521


def _identity_residuals(
    sol: QuarticSolution, residues: npt.NDArray[np.complex128]
) -> tuple[float, float]:
    roots = np.array(sol.roots)
    return float(abs(residues.sum())), float(abs((residues * roots).sum() - 1.0))


def _log_uniform(
    rng: np.random.Generator, lo: float, hi: float, size: int
) -> npt.NDArray[np.float64]:
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def _max_abs(values: npt.ArrayLike) -> float:
    return float(np.max(np.abs(np.asarray(values))))


def inversion_config(oracle: OracleConfig) -> InversionConfig:
    """Inversion settings from the oracle section of the run configuration."""
    return InversionConfig(
        method=oracle.inversion_method,
        contour_nodes=oracle.inversion_nodes,
        shift=oracle.inversion_shift,
    )


class VerificationSuite:
    """Residue, oracle, physicality and numerics checks for one configuration.

    Args:
        config: Run configuration (reservoir parameters and tolerances)
        metrics: Metrics collector the checks are registered on
        quick: Skip the Volterra checks and reduce random sample sizes
        corrupt_residue: Test hook that perturbs one residue before the identity check
    """

    def __init__(
        self,
        config: RunConfig,
        metrics: RunMetrics,
        quick: bool = False,
        corrupt_residue: bool = False,
    ):
        self.config = config
        self.metrics = metrics
        self.quick = quick
        self.corrupt_residue = corrupt_residue
        self.reservoir = SpecialReservoir(
            A=config.reservoir.A, a=config.reservoir.a, omega0=config.reservoir.omega0
        )
        lc = config.lorentzian
        self.lorentzian = {
            "strong": LorentzianReservoir(
                gamma=lc.gamma_strong, lambda_=lc.lambda_strong, omega0=config.reservoir.omega0
            ),
            "weak": LorentzianReservoir(
                gamma=lc.gamma_weak, lambda_=lc.lambda_weak, omega0=config.reservoir.omega0
            ),
        }
        self._solution: QuarticSolution | None = None
        self._register()

    @property
    def solution(self) -> QuarticSolution:
        if self._solution is None:
            self._solution = solve_quartic(self.reservoir)
        return self._solution

    def _inversion_config(self) -> InversionConfig:
        return inversion_config(self.config.oracle)

    def _register(self) -> None:
        checks = [
            ("residue_identities", self.check_residue_identities),
            ("root_residuals", self.check_root_residuals),
            ("random_residue_identities", self.check_random_residue_identities),
        ]
        if self.reservoir.A == 0.8 and self.reservoir.a == 1.0:
            checks.append(("reference_constants", self.check_reference_constants))
        checks += [
            ("oracle_inversion", self.check_oracle_inversion),
            ("lorentzian_inversion", self.check_lorentzian_inversion),
            ("lorentzian_zeros", self.check_lorentzian_zeros),
            ("contractivity", self.check_contractivity),
            ("positivity", self.check_positivity),
            ("continuum_power_law", self.check_continuum_power_law),
            ("scaled_gamma", self.check_scaled_gamma),
            ("volterra_order", self.check_volterra_order),
        ]
        if not self.quick:
            checks += [
                ("oracle_volterra", self.check_oracle_volterra),
                ("lorentzian_volterra", self.check_lorentzian_volterra),
            ]
        for name, func in checks:
            self.metrics.register_check(name, func)

    def run(self) -> dict[str, Any]:
        """Run every registered check.

        Returns:
            Report from RunMetrics.run_checks
        """
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return self.metrics.run_checks()

    def check_residue_identities(self) -> CheckResult:
        """Σ R = 0 and Σ R z = 1 at the configured parameters."""
        sol = self.solution
        residues = np.array(sol.residues, dtype=np.complex128)
        if self.corrupt_residue:
            residues[0] += 1e-6
        sum_r, sum_rz = _identity_residuals(sol, residues)
        try:
            QuarticSolution(
                roots=sol.roots,
                residues=(residues[0], residues[1], residues[2], residues[3]),
                reservoir=sol.reservoir,
            )
        except ResidueIdentityError as e:
            return CheckResult(
                name="residue_identities",
                status=CheckStatus.FAIL,
                measured=max(sum_r, sum_rz),
                allowed=IDENTITY_TOL,
                message=str(e),
                details={"sum_R": sum_r, "sum_Rz_minus_1": sum_rz},
            )
        return compare(
            "residue_identities",
            max(sum_r, sum_rz),
            IDENTITY_TOL,
            sum_R=sum_r,
            sum_Rz_minus_1=sum_rz,
        )

    def check_root_residuals(self) -> CheckResult:
        """|Q(z_l)| against root_residual_bound; 1 means the bound is met exactly."""
        sol = self.solution
        coeffs = quartic_coefficients(self.reservoir)
        ratios = [
            residual / root_residual_bound(coeffs, z)
            for z, residual in zip(sol.roots, sol.root_residuals, strict=True)
        ]
        return compare(
            "root_residuals", max(ratios), 1.0, residuals=list(sol.root_residuals)
        )

    def check_random_residue_identities(self) -> CheckResult:
        """Residue identities for random (A, a) in (0.01, 100)²."""
        rng = np.random.default_rng(SEED)
        count = 10 if self.quick else 50
        worst = 0.0
        A_values = _log_uniform(rng, 0.01, 100.0, count)
        a_values = _log_uniform(rng, 0.01, 100.0, count)
        for A, a in zip(A_values, a_values, strict=True):
            sol = solve_quartic(SpecialReservoir(A=float(A), a=float(a), omega0=1.0))
            worst = max(worst, *sol.identity_residuals)
        return compare("random_residue_identities", worst, IDENTITY_TOL, samples=count)

    def check_reference_constants(self) -> CheckResult:
        """Roots, τ and |D| against the reference values at A = 0.8, a = 1."""
        sol = self.solution
        summary = asymptotics(sol)
        root_dev = max(
            min(max(abs(z.real - p.real), abs(z.imag - p.imag)) for z in sol.roots)
            for p in PUBLISHED_ROOTS
        )
        tau_dev = abs(summary.tau - PUBLISHED_TAU)
        d_dev = abs(abs(summary.D) - PUBLISHED_D_MODULUS)
        return compare(
            "reference_constants",
            max(root_dev, tau_dev, d_dev),
            2e-3,
            roots=root_dev,
            tau=tau_dev,
            D=d_dev,
        )

    def _oracle_times(self) -> npt.NDArray[np.float64]:
        tau = asymptotics(self.solution).tau
        return tau * np.array(ORACLE_TIMES_IN_TAU)

    def check_oracle_inversion(self) -> CheckResult:
        """Closed form against numerical inversion of G̃(u) at 0.1τ, τ, 5τ and 10τ."""
        times = self._oracle_times()
        exact = propagator(self.solution, times)
        inverted = laplace_invert(
            partial(laplace_propagator_closed_form, self.reservoir), times, self._inversion_config()
        )
        return compare(
            "oracle_inversion",
            _max_abs(exact - inverted),
            self.config.oracle.inversion_tol,
            times=times.tolist(),
        )

    def check_lorentzian_inversion(self) -> CheckResult:
        """G_L against numerical inversion of G̃_L(u) in both regimes."""
        worst = 0.0
        for reservoir in self.lorentzian.values():
            params = propagator_params(reservoir)
            times = np.array([0.1, 1.0, 5.0, 10.0]) / reservoir.lambda_
            inverted = laplace_invert(
                partial(laplace_propagator_L, reservoir), times, self._inversion_config()
            )
            worst = max(worst, _max_abs(np.asarray(propagator_L(params, times)) - inverted))
        return compare("lorentzian_inversion", worst, self.config.oracle.inversion_tol)

    def check_lorentzian_zeros(self) -> CheckResult:
        """|G_L(t_n)| at the strong-coupling zeros, n = 1..5."""
        reservoir = self.lorentzian["strong"]
        if reservoir.regime != Regime.STRONG:
            return CheckResult(
                name="lorentzian_zeros",
                status=CheckStatus.PASS,
                message=f"Skipped: strong set is in the {reservoir.regime.value} regime",
            )
        params = propagator_params(reservoir)
        zeros = zero_times(params, 5)
        return compare(
            "lorentzian_zeros", _max_abs(propagator_L(params, zeros)), 1e-10, zeros=zeros
        )

    def check_contractivity(self) -> CheckResult:
        """max(|G| - 1) on [0, 20τ] for the configured and random parameter sets."""
        rng = np.random.default_rng(SEED + 1)
        count = 3 if self.quick else 10
        reservoirs = [self.reservoir] + [
            SpecialReservoir(A=float(A), a=float(a), omega0=1.0)
            for A, a in zip(
                _log_uniform(rng, 0.1, 10.0, count),
                _log_uniform(rng, 0.1, 10.0, count),
                strict=True,
            )
        ]
        worst = 0.0
        for reservoir in reservoirs:
            sol = solve_quartic(reservoir)
            times = np.linspace(0.0, 20.0 * asymptotics(sol).tau, 1000)
            worst = max(worst, float(np.max(np.abs(propagator(sol, times)))) - 1.0)
        return compare("contractivity", max(worst, 0.0), 1e-9, parameter_sets=len(reservoirs))

    def check_positivity(self) -> CheckResult:
        """Positivity and unit trace along the exact trajectory for random initial states."""
        rng = np.random.default_rng(SEED + 2)
        count = 10 if self.quick else 100
        sol = self.solution
        times = np.linspace(0.0, 10.0 * asymptotics(sol).tau, 400)
        G = propagator(sol, times)
        worst = 0.0
        for _ in range(count):
            rho11 = float(rng.uniform(0.0, 1.0))
            modulus = math.sqrt(rho11 * (1.0 - rho11)) * float(rng.uniform(0.0, 1.0))
            rho10 = modulus * complex(np.exp(1j * rng.uniform(0.0, 2.0 * math.pi)))
            try:
                trajectory = build_trajectory(
                    QubitState(rho11=rho11, rho10=rho10), times, G, self.reservoir.omega0
                )
            except PositivityError as e:
                return CheckResult(
                    name="positivity",
                    status=CheckStatus.FAIL,
                    measured=float("inf"),
                    allowed=0.0,
                    message=str(e),
                )
            populations = trajectory.population()
            excess = np.abs(trajectory.coherence()) ** 2 - populations * (1.0 - populations)
            trace = np.array([s.rho00 + s.rho11 for s in trajectory.states])
            worst = max(worst, float(np.max(excess)), _max_abs(trace - 1.0))
        return compare("positivity", max(worst, 0.0), 1e-12, initial_states=count)

    def check_continuum_power_law(self) -> CheckResult:
        """t^{3/2} G_c(t) → D, and ρ₁₁(2t)/ρ₁₁(t) = 1/8 under the power law."""
        summary = asymptotics(self.solution)
        deviations = {}
        for factor in (50.0, 100.0):
            t = factor * summary.tau
            scaled = complex(continuum_part(self.solution, t)) * t**1.5
            deviations[factor] = abs(scaled - summary.D) / abs(summary.D)

        initial = QubitState(
            rho11=self.config.initial.rho11_0,
            rho10=complex(self.config.initial.rho10_0_re, self.config.initial.rho10_0_im),
        )
        t = 100.0 * summary.tau
        omega0 = self.reservoir.omega0
        ratio = (
            asymptotic_state(initial, summary, omega0, 2.0 * t).rho11
            / asymptotic_state(initial, summary, omega0, t).rho11
        )
        # 5% at 50τ, 2% at 100τ
        measured = max(0.4 * deviations[50.0], deviations[100.0], abs(8.0 * ratio - 1.0))
        return compare(
            "continuum_power_law",
            measured,
            0.02,
            deviation_50tau=deviations[50.0],
            deviation_100tau=deviations[100.0],
            population_ratio=ratio,
        )

    def check_scaled_gamma(self) -> CheckResult:
        """Faddeeva route against the series/continued-fraction reference at 35 points."""
        worst = 0.0
        for modulus in (0.1, 0.9, 3.0, 6.0, 40.0):
            for angle in np.linspace(-0.75 * math.pi, 0.75 * math.pi, 7):
                w = modulus * complex(np.exp(1j * angle))
                fast = complex(scaled_upper_gamma_half(w))
                reference = scaled_upper_gamma_half_reference(w)
                worst = max(worst, abs(fast - reference) / abs(reference))
        return compare("scaled_gamma", worst, 1e-10)

    def check_volterra_order(self) -> CheckResult:
        """Error ratio of step halving on Ġ = -Ω² ∫G, whose solution is cos(Ωt)."""
        omega = 1.0

        def constant_kernel(_: float) -> float:
            return omega * omega

        errors = []
        for step in (0.01, 0.005):
            sol = volterra_solve(constant_kernel, VolterraConfig(step=step, horizon=10.0))
            errors.append(_max_abs(sol.values - np.cos(omega * sol.times)))
        ratio = errors[0] / errors[1]
        return compare("volterra_order", abs(ratio - 4.0), 0.5, ratio=ratio)

    def check_oracle_volterra(self) -> CheckResult:
        """Volterra solution with the band-edge kernel against the closed form on [0, 10τ]."""
        tau = asymptotics(self.solution).tau
        oracle = self.config.oracle
        cfg = VolterraConfig(
            step=oracle.volterra_step * tau,
            horizon=10.0 * tau,
            kernel_tol=oracle.kernel_tol,
            richardson=(1.5, 2.0),
        )
        sol = volterra_solve(special_kernel(self.reservoir, oracle.kernel_tol), cfg)
        exact = propagator(self.solution, sol.times)
        times = self._oracle_times()
        inverted = laplace_invert(
            partial(laplace_propagator_closed_form, self.reservoir), times, self._inversion_config()
        )
        sampled = np.interp(times, sol.times, sol.values.real) + 1j * np.interp(
            times, sol.times, sol.values.imag
        )
        return compare(
            "oracle_volterra",
            max(_max_abs(sol.values - exact), _max_abs(sampled - inverted)),
            oracle.volterra_tol,
            error_estimate=sol.error_estimate,
            kernel_accuracy_reached=sol.kernel_accuracy_reached,
        )

    def check_lorentzian_volterra(self) -> CheckResult:
        """G_L against the Volterra solution with kernel f_L in both regimes."""
        worst = 0.0
        for reservoir in self.lorentzian.values():
            horizon = 10.0 / reservoir.lambda_
            sol = volterra_solve(
                lorentzian_kernel(reservoir),
                VolterraConfig(step=horizon / 1000, horizon=horizon, richardson=(2.0, 4.0)),
            )
            exact = np.asarray(propagator_L(propagator_params(reservoir), sol.times))
            worst = max(worst, _max_abs(sol.values - exact))
        return compare("lorentzian_volterra", worst, 1e-6)


def format_report(report: dict[str, Any]) -> list[str]:
    """One line per check plus a summary line."""
    lines = []
    for result in report["checks"]:
        line = (
            f"{result.name:<28} {result.status.value.upper():<5} "
            f"measured={result.measured:.3e} allowed={result.allowed:.3e}"
        )
        if result.message:
            line += f"  {result.message}"
        lines.append(line)
    lines.append(f"overall: {report['status'].upper()} ({len(report['checks'])} checks)")
    return lines
