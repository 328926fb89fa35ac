"""Shared pytest fixtures and configuration."""

import logging

import pytest

import bandedge.core.logging as run_logging
import bandedge.core.metrics as run_metrics
from bandedge.model.exact import QuarticSolution, solve_quartic
from bandedge.model.reservoir import LorentzianReservoir, SpecialReservoir


@pytest.fixture(autouse=True)
def reset_run_globals(monkeypatch: pytest.MonkeyPatch):
    """Reset the global logger, metrics and BANDEDGE_* environment around each test."""
    for name in (
        "BANDEDGE_CONFIG_PATH",
        "BANDEDGE_PRESET",
        "BANDEDGE_LOG_LEVEL",
        "BANDEDGE_LOG_FORMAT",
        "BANDEDGE_OUT_DIR",
        "BANDEDGE_METRICS_FILE",
        "BANDEDGE_N_POINTS",
    ):
        monkeypatch.delenv(name, raising=False)

    yield

    run_logging._run_logger = None
    run_metrics._run_metrics = None
    package_logger = logging.getLogger("bandedge")
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
        handler.close()
    package_logger.propagate = True
    package_logger.setLevel(logging.NOTSET)


@pytest.fixture
def reference_reservoir() -> SpecialReservoir:
    """Band-edge reservoir with A = 0.8, a = 1, ω₀ = 0.5."""
    return SpecialReservoir(A=0.8, a=1.0, omega0=0.5)


@pytest.fixture
def reference_solution(reference_reservoir: SpecialReservoir) -> QuarticSolution:
    """Quartic solution at the reference parameters."""
    return solve_quartic(reference_reservoir)


@pytest.fixture
def strong_lorentzian() -> LorentzianReservoir:
    """Lorentzian reservoir in the strong-coupling regime (λ = 1, γ = 10)."""
    return LorentzianReservoir(gamma=10.0, lambda_=1.0, omega0=0.5)


@pytest.fixture
def weak_lorentzian() -> LorentzianReservoir:
    """Lorentzian reservoir in the weak-coupling regime (λ = 20, γ = 1.3)."""
    return LorentzianReservoir(gamma=1.3, lambda_=20.0, omega0=0.5)
