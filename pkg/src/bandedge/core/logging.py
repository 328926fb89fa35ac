"""Logging module for bandedge runs.

Provides structured logging with JSON format and a per-run identifier.
"""

import json
import logging
import sys
import uuid
from datetime import datetime, timezone
from typing import Any

from bandedge.core.config import LoggingConfig

UTC = timezone.utc

_RECORD_ATTRIBUTES = frozenset(
    {
        "name",
        "msg",
        "args",
        "created",
        "filename",
        "funcName",
        "levelname",
        "levelno",
        "lineno",
        "module",
        "msecs",
        "message",
        "pathname",
        "process",
        "processName",
        "relativeCreated",
        "thread",
        "threadName",
        "taskName",
        "exc_info",
        "exc_text",
        "stack_info",
        "run_id",
        "extra_fields",
    }
)


class RunIdFilter(logging.Filter):
    """Logging filter that stamps the run identifier on log records."""

    def __init__(self) -> None:
        """Initialize the run ID filter."""
        super().__init__()
        self._run_id: str | None = None

    def set_run_id(self, run_id: str) -> None:
        """Set the identifier of the current run.

        Args:
            run_id: The run ID to use
        """
        self._run_id = run_id

    def clear_run_id(self) -> None:
        """Clear the run ID."""
        self._run_id = None

    def filter(self, record: logging.LogRecord) -> bool:
        """Add run ID to the log record.

        Args:
            record: The log record to filter

        Returns:
            True to include the record
        """
        record.run_id = self._run_id or "none"
        return True


def _timestamp(record: logging.LogRecord) -> str:
    return datetime.fromtimestamp(record.created, UTC).isoformat()


def _structured_fields(record: logging.LogRecord) -> dict[str, Any]:
    """Fields passed through ``extra_fields`` or plain ``extra`` keys."""
    fields: dict[str, Any] = {}
    extra = getattr(record, "extra_fields", None)
    if isinstance(extra, dict):
        fields.update(extra)
    fields.update(
        (key, value) for key, value in record.__dict__.items() if key not in _RECORD_ATTRIBUTES
    )
    return fields


class JsonFormatter(logging.Formatter):
    """One JSON object per record, stage and check fields at top level."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": _timestamp(record),
            "level": record.levelname,
            "logger": record.name,
            "run_id": getattr(record, "run_id", "none"),
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        payload.update(_structured_fields(record))
        return json.dumps(payload, default=str)


class TextFormatter(logging.Formatter):
    """Single-line text with the structured fields as trailing key=value pairs."""

    def format(self, record: logging.LogRecord) -> str:
        run_id = getattr(record, "run_id", "none")
        line = f"{_timestamp(record)} [{record.levelname}] [{run_id}] {record.name}: "
        line += record.getMessage()
        fields = _structured_fields(record)
        if fields:
            line += " " + " ".join(f"{key}={value}" for key, value in fields.items())
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


class RunLogger:
    """Run logger with structured event helpers and run ID support."""

    def __init__(self, config: LoggingConfig):
        """Initialize the run logger.

        Args:
            config: Logging configuration
        """
        self.config = config
        self.run_id_filter = RunIdFilter()
        self._setup_logging()

    def _setup_logging(self) -> None:
        """Set up logging configuration."""
        logger = logging.getLogger("bandedge")
        logger.setLevel(getattr(logging, self.config.level))
        for old in list(logger.handlers):
            logger.removeHandler(old)
            old.close()

        handler: logging.Handler
        if self.config.output == "stdout":
            handler = logging.StreamHandler(sys.stdout)
        elif self.config.output == "stderr":
            handler = logging.StreamHandler(sys.stderr)
        else:
            handler = logging.FileHandler(self.config.output)

        formatter: logging.Formatter
        if self.config.format == "json":
            formatter = JsonFormatter()
        else:
            formatter = TextFormatter()

        handler.setFormatter(formatter)
        handler.addFilter(self.run_id_filter)
        logger.addHandler(handler)

        logger.propagate = False

    def start_run(self, run_id: str | None = None) -> str:
        """Set or generate the identifier of the current run.

        Args:
            run_id: Optional run ID. If None, generates a new one.

        Returns:
            The run ID that was set
        """
        if run_id is None:
            run_id = self.generate_run_id()
        self.run_id_filter.set_run_id(run_id)
        return run_id

    def end_run(self) -> None:
        """Clear the current run ID."""
        self.run_id_filter.clear_run_id()

    @staticmethod
    def generate_run_id() -> str:
        """Generate a unique run ID.

        Returns:
            A unique run ID
        """
        return f"run-{uuid.uuid4().hex[:16]}"

    def get_logger(self, name: str = "bandedge") -> logging.Logger:
        """Get a logger instance.

        Args:
            name: Logger name (default: "bandedge")

        Returns:
            Logger instance
        """
        return logging.getLogger(name)

    def log_stage(
        self,
        stage: str,
        finished: bool,
        duration_s: float | None = None,
        **kwargs: Any,
    ) -> None:
        """Log a computation stage boundary.

        Args:
            stage: Stage name (e.g., "roots", "trajectory.special")
            finished: False when the stage starts, True when it ends
            duration_s: Wall time of the stage in seconds
            **kwargs: Additional fields to log
        """
        extra_fields: dict[str, Any] = {
            "event_type": "stage_finished" if finished else "stage_started",
            "stage": {"name": stage, "duration_s": duration_s},
        }
        extra_fields.update(kwargs)

        message = f"Stage {stage} {'finished' if finished else 'started'}"
        if duration_s is not None:
            message += f" ({duration_s:.3f}s)"

        self.get_logger().info(message, extra={"extra_fields": extra_fields})

    def log_check(
        self,
        name: str,
        measured: float,
        allowed: float,
        passed: bool,
        **kwargs: Any,
    ) -> None:
        """Log a verification check.

        Args:
            name: Check name
            measured: Measured deviation
            allowed: Allowed deviation
            passed: Whether the check passed
            **kwargs: Additional fields to log
        """
        extra_fields: dict[str, Any] = {
            "event_type": "check",
            "check": {
                "name": name,
                "measured": measured,
                "allowed": allowed,
                "passed": passed,
            },
        }
        extra_fields.update(kwargs)

        log_level = logging.INFO if passed else logging.WARNING
        outcome = "ok" if passed else "FAIL"
        message = f"Check {name}: {measured:.3e} (allowed {allowed:.3e}) {outcome}"

        self.get_logger().log(log_level, message, extra={"extra_fields": extra_fields})

    def log_numerics(
        self,
        routine: str,
        evaluations: int | None = None,
        error_estimate: float | None = None,
        converged: bool = True,
        **kwargs: Any,
    ) -> None:
        """Log quadrature or root-finder diagnostics on the run logger."""
        log_numerics(
            self.get_logger(),
            routine,
            evaluations=evaluations,
            error_estimate=error_estimate,
            converged=converged,
            **kwargs,
        )


def log_numerics(
    target: logging.Logger,
    routine: str,
    evaluations: int | None = None,
    error_estimate: float | None = None,
    converged: bool = True,
    **kwargs: Any,
) -> None:
    """Log quadrature or root-finder diagnostics.

    Library modules pass their module logger; records reach the run's handlers
    through the bandedge logger hierarchy.

    Args:
        target: Logger receiving the record
        routine: Numerical routine name
        evaluations: Function evaluations or iterations used
        error_estimate: Reported error estimate
        converged: Whether the routine reached its tolerance
        **kwargs: Additional fields to log
    """
    extra_fields: dict[str, Any] = {
        "event_type": "numerics",
        "numerics": {
            "routine": routine,
            "evaluations": evaluations,
            "error_estimate": error_estimate,
            "converged": converged,
        },
    }
    extra_fields.update(kwargs)

    log_level = logging.DEBUG if converged else logging.WARNING
    message = f"Numerics {routine}"
    if error_estimate is not None:
        message += f" err={error_estimate:.2e}"
    if not converged:
        message += " - not converged"

    target.log(log_level, message, extra={"extra_fields": extra_fields})


# Global logger instance (initialized by the CLI)
_run_logger: RunLogger | None = None


def initialize_logging(config: LoggingConfig) -> RunLogger:
    """Initialize the global run logger.

    Args:
        config: Logging configuration

    Returns:
        Initialized RunLogger instance
    """
    global _run_logger
    _run_logger = RunLogger(config)
    return _run_logger


def get_logger() -> RunLogger:
    """Get the global run logger.

    Returns:
        The global RunLogger instance

    Raises:
        RuntimeError: If logging has not been initialized
    """
    if _run_logger is None:
        raise RuntimeError("Logging not initialized. Call initialize_logging() first.")
    return _run_logger
