"""Command-line interface: ``bandedge roots | trajectory | verify``.

Exit codes: 0 success, 1 check failure, 2 invalid input, 3 I/O error.
"""

import argparse
import json
import logging
import sys
import time
import warnings
from collections.abc import Sequence
from functools import partial
from pathlib import Path
from typing import Any, TextIO

import numpy as np
import numpy.typing as npt
from pydantic import ValidationError

from bandedge.cli.output import (
    Curve,
    complex_pair,
    crossing_times,
    header_lines,
    write_json,
    write_roots_csv,
    write_svg,
    write_trajectory_csv,
)
from bandedge.cli.verify import VerificationSuite, format_report, inversion_config
from bandedge.core.config import PRESETS, RunConfig, load_config
from bandedge.core.errors import BandedgeError
from bandedge.core.logging import RunLogger, initialize_logging
from bandedge.core.metrics import RunMetrics, initialize_metrics
from bandedge.model.dynamics import QubitState, Trajectory, build_trajectory
from bandedge.model.exact import (
    QuarticSolution,
    asymptotics,
    bound_state,
    propagator,
    solve_quartic,
    trapped_population,
)
from bandedge.model.lorentzian import laplace_propagator_L, propagator_L, propagator_params
from bandedge.model.reservoir import (
    LorentzianReservoir,
    SpecialReservoir,
    laplace_propagator_closed_form,
)
from bandedge.numerics.oracle import (
    VolterraConfig,
    laplace_invert,
    special_kernel,
    volterra_solve,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_IO_ERROR = 3

# Flag destination -> flat configuration key
FLAG_KEYS = {
    "out": "out_dir",
    "json": "json",
    "svg": "svg",
    "log_level": "log_level",
    "metrics_file": "metrics_file",
    "A": "A",
    "a": "a",
    "omega0": "omega0",
    "t_max": "t_max",
    "n_points": "n_points",
}

CURVE_STYLES = {
    "special": ("black", 2.5),
    "lorentzian_strong": ("#1f77b4", 1.5),
    "lorentzian_weak": ("#d62728", 1.5),
}


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with the three subcommands."""
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--preset", choices=sorted(PRESETS), help="Named parameter set")
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--json", action="store_true", default=None, help="Emit JSON")
    common.add_argument("--svg", action="store_true", default=None, help="Emit an SVG plot")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR or CRITICAL")
    common.add_argument("--metrics-file", help="Write Prometheus metrics to this textfile")
    common.add_argument("--A", type=float, help="Coupling amplitude A")
    common.add_argument("--a", type=float, help="Spectral width a")
    common.add_argument("--omega0", type=float, help="Qubit frequency")
    common.add_argument("--t-max", type=float, help="Last time point in the configured unit")
    common.add_argument("--n-points", type=int, help="Number of time points")

    parser = argparse.ArgumentParser(
        prog="bandedge",
        description="Exact qubit decoherence with a band-edge reservoir",
        allow_abbrev=False,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser(
        "roots", parents=[common], allow_abbrev=False, help="Quartic roots, residues, tau and D"
    )
    subparsers.add_parser(
        "trajectory", parents=[common], allow_abbrev=False, help="Write CSV (and SVG) trajectories"
    )
    verify = subparsers.add_parser(
        "verify", parents=[common], allow_abbrev=False, help="Run the verification checks"
    )
    verify.add_argument("--quick", action="store_true", help="Run the fast subset only")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Flat configuration overrides for the flags that were given."""
    overrides: dict[str, Any] = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    return overrides


def special_reservoir(config: RunConfig) -> SpecialReservoir:
    return SpecialReservoir(
        A=config.reservoir.A, a=config.reservoir.a, omega0=config.reservoir.omega0
    )


def lorentzian_reservoirs(config: RunConfig) -> dict[str, LorentzianReservoir]:
    lc = config.lorentzian
    omega0 = config.reservoir.omega0
    return {
        "lorentzian_strong": LorentzianReservoir(
            gamma=lc.gamma_strong, lambda_=lc.lambda_strong, omega0=omega0
        ),
        "lorentzian_weak": LorentzianReservoir(
            gamma=lc.gamma_weak, lambda_=lc.lambda_weak, omega0=omega0
        ),
    }


def time_grid(
    config: RunConfig, tau: float
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Grid in the configured unit and the same grid in absolute time."""
    grid = config.grid
    if grid.log_scale and grid.t_min > 0:
        axis = np.geomspace(grid.t_min, grid.t_max, grid.n_points)
    else:
        axis = np.linspace(grid.t_min, grid.t_max, grid.n_points)
    unit = tau if grid.time_unit == "tau" else 1.0 / config.reservoir.a
    return axis, axis * unit


def _sample_times(times: npt.NDArray[np.float64], count: int = 5) -> npt.NDArray[np.float64]:
    positive = times[times > 0]
    if positive.size == 0:
        return positive
    index = np.unique(np.linspace(0, positive.size - 1, min(count, positive.size)).astype(int))
    return positive[index]


def oracle_warnings(
    config: RunConfig,
    sol: QuarticSolution,
    times: npt.NDArray[np.float64],
    models: Sequence[str],
) -> list[str]:
    """Compare the closed forms with the enabled oracles; one line per disagreement."""
    oracle = config.oracle
    lines: list[str] = []
    samples = _sample_times(times)
    lorentzian = lorentzian_reservoirs(config)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if oracle.inversion and samples.size:
            cfg = inversion_config(oracle)
            for model in models:
                if model == "special":
                    exact = np.asarray(propagator(sol, samples))
                    transform = partial(laplace_propagator_closed_form, sol.reservoir)
                else:
                    reservoir = lorentzian[model]
                    exact = np.asarray(propagator_L(propagator_params(reservoir), samples))
                    transform = partial(laplace_propagator_L, reservoir)
                deviation = float(np.max(np.abs(exact - laplace_invert(transform, samples, cfg))))
                if deviation > oracle.inversion_tol:
                    lines.append(
                        f"WARNING: {model} inversion oracle deviates by {deviation:.3e} "
                        f"(allowed {oracle.inversion_tol:.3e})"
                    )

        if oracle.volterra and "special" in models:
            horizon = float(times.max())
            tau = asymptotics(sol).tau
            step = min(oracle.volterra_step * tau, horizon / 100)
            solution = volterra_solve(
                special_kernel(sol.reservoir, oracle.kernel_tol),
                VolterraConfig(
                    step=step, horizon=horizon, kernel_tol=oracle.kernel_tol, richardson=(1.5, 2.0)
                ),
            )
            deviation = float(np.max(np.abs(solution.values - propagator(sol, solution.times))))
            if deviation > oracle.volterra_tol:
                lines.append(
                    f"WARNING: special Volterra oracle deviates by {deviation:.3e} "
                    f"(allowed {oracle.volterra_tol:.3e})"
                )
    return lines


def _timed(run_logger: RunLogger, metrics: RunMetrics, stage: str, started: float) -> None:
    duration = time.perf_counter() - started
    run_logger.log_stage(stage, finished=True, duration_s=duration)
    metrics.record_stage(stage, duration)


def roots_payload(sol: QuarticSolution) -> dict[str, Any]:
    """Roots, residues and derived constants as JSON-ready values."""
    summary = asymptotics(sol)
    sum_r, sum_rz = sol.identity_residuals
    state = bound_state(sol)
    return {
        "roots": [complex_pair(z) for z in sol.roots],
        "residues": [complex_pair(r) for r in sol.residues],
        "tau": summary.tau,
        "D": complex_pair(summary.D),
        "abs_D": abs(summary.D),
        "identity_residuals": {"sum_R": sum_r, "sum_Rz_minus_1": sum_rz},
        "bound_state": None
        if state is None
        else {
            "root": complex_pair(state.root),
            "amplitude": complex_pair(state.amplitude),
            "frequency": state.frequency,
        },
        "trapped_population": trapped_population(sol),
    }


def cmd_roots(
    config: RunConfig, run_logger: RunLogger, metrics: RunMetrics, stdout: TextIO
) -> int:
    """Print z_l, R(z_l), τ and |D| and write roots.csv (and roots.json)."""
    started = time.perf_counter()
    run_logger.log_stage("roots", finished=False)
    sol = solve_quartic(special_reservoir(config))
    payload = roots_payload(sol)
    header = header_lines(config, "roots")
    out_dir = Path(config.output.out_dir)
    write_roots_csv(out_dir / "roots.csv", sol.roots, sol.residues, header)

    if config.output.json_output:
        write_json(out_dir / "roots.json", payload, header)
        stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        stdout.write(f"{'l':>2}  {'z_l':>40}  {'R(z_l)':>40}\n")
        for index, (z, r) in enumerate(zip(sol.roots, sol.residues, strict=True), start=1):
            stdout.write(f"{index:>2}  {z:>40.15g}  {r:>40.15g}\n")
        stdout.write(f"tau = {payload['tau']:.15g}\n")
        stdout.write(f"|D| = {payload['abs_D']:.15g}\n")
        residuals = payload["identity_residuals"]
        stdout.write(f"|sum R| = {residuals['sum_R']:.3e}\n")
        stdout.write(f"|sum R z - 1| = {residuals['sum_Rz_minus_1']:.3e}\n")
        state = bound_state(sol)
        if state is not None:
            stdout.write(f"bound state amplitude |2Rz| = {abs(state.amplitude):.15g}\n")
        stdout.write(f"trapped population = {payload['trapped_population']:.15g}\n")
    _timed(run_logger, metrics, "roots", started)
    return EXIT_OK


def cmd_trajectory(config: RunConfig, run_logger: RunLogger, metrics: RunMetrics) -> int:
    """Write one CSV per model, plus the SVG overlay and JSON summary when enabled."""
    reservoir = special_reservoir(config)
    sol = solve_quartic(reservoir)
    summary = asymptotics(sol)
    axis, times = time_grid(config, summary.tau)
    initial = QubitState(
        rho11=config.initial.rho11_0,
        rho10=complex(config.initial.rho10_0_re, config.initial.rho10_0_im),
    )

    models: list[str] = []
    if config.models in ("special", "both"):
        models.append("special")
    if config.models in ("lorentzian", "both"):
        models += ["lorentzian_strong", "lorentzian_weak"]

    trajectories: dict[str, Trajectory] = {}
    lorentzian = lorentzian_reservoirs(config)
    for model in models:
        started = time.perf_counter()
        run_logger.log_stage(f"trajectory.{model}", finished=False)
        if model == "special":
            G = np.asarray(propagator(sol, times))
        else:
            params = propagator_params(lorentzian[model])
            G = np.asarray(propagator_L(params, times), dtype=np.complex128)
        metrics.record_propagator(model, len(times))
        trajectories[model] = build_trajectory(
            initial, times, G, reservoir.omega0, label=model
        )
        _timed(run_logger, metrics, f"trajectory.{model}", started)

    started = time.perf_counter()
    warning_lines = oracle_warnings(config, sol, times, models)
    _timed(run_logger, metrics, "trajectory.oracles", started)
    for line in warning_lines:
        logger.warning(line)

    crossings: list[float] = []
    if "special" in trajectories and "lorentzian_strong" in trajectories:
        crossings = crossing_times(
            axis,
            np.abs(trajectories["special"].coherence()),
            np.abs(trajectories["lorentzian_strong"].coherence()),
        )

    unit = "t/tau" if config.grid.time_unit == "tau" else "t*a"
    extra = [
        f"time axis: {unit}",
        f"tau = {summary.tau!r}",
        f"|D| = {abs(summary.D)!r}",
        "crossings special/lorentzian_strong: "
        + (", ".join(repr(c) for c in crossings) if crossings else "none"),
        *warning_lines,
    ]
    header = header_lines(config, "trajectory", extra)
    out_dir = Path(config.output.out_dir)
    files = [
        write_trajectory_csv(out_dir / f"{model}.csv", trajectory, axis, header)
        for model, trajectory in trajectories.items()
    ]

    if config.output.svg:
        curves = [
            Curve(
                label=model,
                x=axis,
                y=np.abs(trajectory.coherence()),
                color=CURVE_STYLES[model][0],
                width=CURVE_STYLES[model][1],
            )
            for model, trajectory in trajectories.items()
        ]
        files.append(
            write_svg(
                out_dir / "coherence.svg",
                curves,
                header,
                title="|rho10(t)|",
                x_label=unit,
                y_label="|rho10|",
                log_scale=config.grid.log_scale,
            )
        )

    if config.output.json_output:
        payload = {
            "files": [path.name for path in files],
            "tau": summary.tau,
            "D": complex_pair(summary.D),
            "crossings": crossings,
            "warnings": warning_lines,
            "final_abs_rho10": {
                model: float(abs(trajectory.states[-1].rho10))
                for model, trajectory in trajectories.items()
            },
        }
        write_json(out_dir / "trajectory.json", payload, header)

    logger.info("Wrote %s", ", ".join(str(path) for path in files))
    return EXIT_OK


def cmd_verify(
    config: RunConfig,
    run_logger: RunLogger,
    metrics: RunMetrics,
    stdout: TextIO,
    quick: bool = False,
) -> int:
    """Run the verification suite; exit 0 iff every check passes."""
    started = time.perf_counter()
    run_logger.log_stage("verify", finished=False)
    suite = VerificationSuite(config, metrics, quick=quick)
    report = suite.run()
    for result in report["checks"]:
        run_logger.log_check(result.name, result.measured, result.allowed, result.passed)
    for line in format_report(report):
        stdout.write(line + "\n")

    if config.output.json_output:
        write_json(
            Path(config.output.out_dir) / "verify.json",
            {
                "status": report["status"],
                "checks": [result.to_dict() for result in report["checks"]],
            },
            header_lines(config, "verify"),
        )
    _timed(run_logger, metrics, "verify", started)
    return EXIT_OK if report["status"] == "pass" else EXIT_CHECK_FAILED


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    """Parse arguments, load configuration and run a command.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])
        stdout: Stream for reports (defaults to sys.stdout)

    Returns:
        Process exit code
    """
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config, args.preset, overrides_from_args(args))
    except (BandedgeError, ValidationError, ValueError) as e:
        sys.stderr.write(f"bandedge: invalid configuration: {e}\n")
        return EXIT_INVALID_INPUT
    except OSError as e:
        sys.stderr.write(f"bandedge: cannot read configuration: {e}\n")
        return EXIT_IO_ERROR

    run_logger = initialize_logging(config.logging)
    metrics = initialize_metrics()
    run_logger.start_run()
    try:
        if args.command == "roots":
            code = cmd_roots(config, run_logger, metrics, stdout)
        elif args.command == "trajectory":
            code = cmd_trajectory(config, run_logger, metrics)
        else:
            code = cmd_verify(config, run_logger, metrics, stdout, quick=args.quick)
        if config.output.metrics_file:
            metrics.write_textfile(config.output.metrics_file)
        return code
    except OSError as e:
        logger.error("I/O error: %s", e)
        sys.stderr.write(f"bandedge: I/O error: {e}\n")
        return EXIT_IO_ERROR
    except (ValidationError, ValueError) as e:
        logger.error("Invalid input: %s", e)
        sys.stderr.write(f"bandedge: invalid input: {e}\n")
        return EXIT_INVALID_INPUT
    except BandedgeError as e:
        logger.exception("Computation failed")
        sys.stderr.write(f"bandedge: {type(e).__name__}: {e}\n")
        return EXIT_CHECK_FAILED
    finally:
        run_logger.end_run()


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())
