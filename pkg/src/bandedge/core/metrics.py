"""Run metrics and verification check registry.

Provides Prometheus metrics on a private registry (exported as a node-exporter
textfile) and the check registry used by the ``verify`` command.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    generate_latest,
    write_to_textfile,
)

logger = logging.getLogger(__name__)


class CheckStatus(Enum):
    """Verification check status enumeration."""

    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


@dataclass
class CheckResult:
    """Outcome of one verification check."""

    name: str
    status: CheckStatus
    measured: float = 0.0
    allowed: float = 0.0
    message: str | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Whether the check passed."""
        return self.status == CheckStatus.PASS

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary representation.

        Returns:
            Dictionary representation of the check result
        """
        result: dict[str, Any] = {
            "name": self.name,
            "status": self.status.value,
            "measured": self.measured,
            "allowed": self.allowed,
        }
        if self.message:
            result["message"] = self.message
        if self.details:
            result["details"] = self.details
        return result


def compare(
    name: str, measured: float, allowed: float, message: str | None = None, **details: Any
) -> CheckResult:
    """Build a CheckResult from a measured deviation and its allowance.

    NaN deviations fail.
    """
    status = CheckStatus.PASS if measured <= allowed else CheckStatus.FAIL
    return CheckResult(
        name=name,
        status=status,
        measured=float(measured),
        allowed=float(allowed),
        message=message,
        details=details,
    )


class RunMetrics:
    """Run metrics collector using Prometheus."""

    def __init__(self) -> None:
        """Initialize the metrics collector on a private registry."""
        self.registry = CollectorRegistry()
        self._checks: dict[str, Callable[[], CheckResult]] = {}

        self.propagator_evaluations = Counter(
            "bandedge_propagator_evaluations_total",
            "Total number of propagator evaluations",
            ["model"],
            registry=self.registry,
        )

        self.quadratures = Counter(
            "bandedge_quadratures_total",
            "Total number of oscillatory quadratures",
            ["converged"],
            registry=self.registry,
        )

        self.checks_total = Counter(
            "bandedge_checks_total",
            "Total number of verification checks",
            ["result"],
            registry=self.registry,
        )

        self.stage_duration = Histogram(
            "bandedge_stage_duration_seconds",
            "Computation stage wall time in seconds",
            ["stage"],
            buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0),
            registry=self.registry,
        )

        self.check_deviation = Gauge(
            "bandedge_check_deviation",
            "Measured deviation of a verification check",
            ["check"],
            registry=self.registry,
        )

    def record_propagator(self, model: str, count: int = 1) -> None:
        """Record propagator evaluations.

        Args:
            model: Reservoir model name
            count: Number of time points evaluated
        """
        self.propagator_evaluations.labels(model=model).inc(count)

    def record_quadrature(self, converged: bool) -> None:
        """Record one oscillatory quadrature.

        Args:
            converged: Whether the quadrature met its tolerance
        """
        self.quadratures.labels(converged=str(converged).lower()).inc()

    def record_stage(self, stage: str, duration_seconds: float) -> None:
        """Record a finished computation stage.

        Args:
            stage: Stage name
            duration_seconds: Stage wall time in seconds
        """
        self.stage_duration.labels(stage=stage).observe(duration_seconds)

    def record_check(self, result: CheckResult) -> None:
        """Record a verification check outcome.

        Args:
            result: The check result
        """
        self.checks_total.labels(result=result.status.value).inc()
        self.check_deviation.labels(check=result.name).set(result.measured)

    def register_check(self, name: str, check_func: Callable[[], CheckResult]) -> None:
        """Register a verification check function.

        Args:
            name: Check name
            check_func: Function that returns CheckResult
        """
        self._checks[name] = check_func

    @property
    def check_names(self) -> list[str]:
        """Names of the registered checks in registration order."""
        return list(self._checks)

    def run_checks(self) -> dict[str, Any]:
        """Run all registered checks.

        Returns:
            Dictionary with the overall status, timing and per-check results
        """
        if not self._checks:
            return {
                "status": CheckStatus.PASS.value,
                "message": "No checks registered",
                "checks": [],
            }

        results: list[CheckResult] = []
        overall_status = CheckStatus.PASS
        started = time.perf_counter()

        for name, check_func in self._checks.items():
            try:
                result = check_func()
            except Exception as e:
                # The check itself failed
                logger.exception("Check %s raised", name)
                result = CheckResult(
                    name=name,
                    status=CheckStatus.ERROR,
                    measured=float("nan"),
                    message=f"Check failed: {type(e).__name__}: {e}",
                )

            results.append(result)
            self.record_check(result)

            if result.status == CheckStatus.ERROR:
                overall_status = CheckStatus.ERROR
            elif result.status == CheckStatus.FAIL and overall_status == CheckStatus.PASS:
                overall_status = CheckStatus.FAIL

        return {
            "status": overall_status.value,
            "duration_s": time.perf_counter() - started,
            "checks": results,
        }

    def export_metrics(self) -> bytes:
        """Export metrics in Prometheus format.

        Returns:
            Prometheus-formatted metrics
        """
        return bytes(generate_latest(self.registry))

    def write_textfile(self, path: str) -> None:
        """Write metrics in the node-exporter textfile format.

        Args:
            path: Destination file path
        """
        write_to_textfile(path, self.registry)


# Global metrics instance (initialized by the CLI)
_run_metrics: RunMetrics | None = None


def initialize_metrics() -> RunMetrics:
    """Initialize the global run metrics.

    Returns:
        Initialized RunMetrics instance
    """
    global _run_metrics
    _run_metrics = RunMetrics()
    return _run_metrics


def get_metrics() -> RunMetrics:
    """Get the global run metrics.

    Returns:
        The global RunMetrics instance

    Raises:
        RuntimeError: If metrics have not been initialized
    """
    if _run_metrics is None:
        raise RuntimeError("Metrics not initialized. Call initialize_metrics() first.")
    return _run_metrics


def current_metrics() -> RunMetrics | None:
    """Return the global run metrics, or None when the library runs standalone."""
    return _run_metrics
