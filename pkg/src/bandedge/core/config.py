"""Configuration management for bandedge runs.

This module loads and validates run configuration from multiple sources:
- Named presets for the short- and long-time comparison runs
- Configuration files (flat YAML key-value mappings, nested sections also accepted)
- Environment variables
- Command-line overrides
"""

import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from bandedge.core.errors import ConfigurationError


class ReservoirConfig(BaseModel):
    """Band-edge reservoir parameters, in units of a (frequency)."""

    A: float = Field(default=0.8, gt=0, description="Coupling amplitude (frequency^(5/2))")
    a: float = Field(default=1.0, gt=0, description="Spectral width (frequency)")
    omega0: float = Field(default=0.5, gt=0, description="Qubit transition frequency")


class LorentzianConfig(BaseModel):
    """Lorentzian comparison reservoirs (gamma = 1/tau_R, lambda = 1/tau_B)."""

    gamma_strong: float = Field(default=10.0, gt=0, description="gamma, strong coupling set")
    lambda_strong: float = Field(default=1.0, gt=0, description="lambda, strong coupling set")
    gamma_weak: float = Field(default=1.3, gt=0, description="gamma, weak coupling set")
    lambda_weak: float = Field(default=20.0, gt=0, description="lambda, weak coupling set")


class InitialStateConfig(BaseModel):
    """Initial reduced density matrix of the qubit."""

    rho11_0: float = Field(default=0.5, ge=0, le=1, description="Excited-state population")
    rho10_0_re: float = Field(default=0.2, description="Re of the initial coherence")
    rho10_0_im: float = Field(default=0.0, description="Im of the initial coherence")

    @model_validator(mode="after")
    def validate_positivity(self) -> "InitialStateConfig":
        """Validate that the initial density matrix is positive semidefinite."""
        coherence_sq = self.rho10_0_re**2 + self.rho10_0_im**2
        if coherence_sq > self.rho11_0 * (1 - self.rho11_0) + 1e-12:
            raise ValueError(
                f"Invalid initial state: |rho10_0|^2 = {coherence_sq} exceeds "
                f"rho11_0 (1 - rho11_0) = {self.rho11_0 * (1 - self.rho11_0)}"
            )
        return self


class GridConfig(BaseModel):
    """Time grid for trajectories."""

    t_min: float = Field(default=0.0, ge=0, description="First time point")
    t_max: float = Field(default=5.9, gt=0, description="Last time point")
    n_points: int = Field(default=400, ge=2, description="Number of time points")
    time_unit: str = Field(default="tau", description="Unit of t_min/t_max (tau or inverse_a)")
    log_scale: bool = Field(default=False, description="Logarithmic time axis in SVG output")

    @field_validator("time_unit")
    @classmethod
    def validate_time_unit(cls, v: str) -> str:
        """Validate time unit is valid."""
        valid_units = ["tau", "inverse_a"]
        if v not in valid_units:
            raise ValueError(f"Invalid time_unit: {v}. Must be one of {valid_units}")
        return v

    @model_validator(mode="after")
    def validate_range(self) -> "GridConfig":
        """Validate that the grid is not degenerate."""
        if self.t_max <= self.t_min:
            raise ValueError(f"Invalid grid: t_max ({self.t_max}) must exceed t_min ({self.t_min})")
        return self


class OracleConfig(BaseModel):
    """Numerical oracle toggles and tolerances."""

    volterra: bool = Field(default=False, description="Cross-check with the Volterra solver")
    inversion: bool = Field(default=True, description="Cross-check with Laplace inversion")
    inversion_method: str = Field(default="cohen", description="Inversion method (cohen or talbot)")
    volterra_step: float = Field(default=0.02, gt=0, description="Volterra step in units of tau")
    kernel_tol: float = Field(default=1e-10, gt=0, description="Kernel quadrature tolerance")
    inversion_nodes: int = Field(default=64, ge=16, description="Talbot contour nodes")
    inversion_shift: float = Field(default=0.01, gt=0, description="Talbot contour shift")
    volterra_tol: float = Field(default=1e-4, gt=0, description="Allowed Volterra deviation")
    inversion_tol: float = Field(default=1e-6, gt=0, description="Allowed inversion deviation")

    @field_validator("inversion_nodes")
    @classmethod
    def validate_even_nodes(cls, v: int) -> int:
        """Validate the contour node count is even."""
        if v % 2:
            raise ValueError(f"Invalid inversion_nodes: {v}. Must be even")
        return v

    @field_validator("inversion_method")
    @classmethod
    def validate_inversion_method(cls, v: str) -> str:
        """Validate inversion method is valid."""
        valid_methods = ["cohen", "talbot"]
        if v not in valid_methods:
            raise ValueError(f"Invalid inversion_method: {v}. Must be one of {valid_methods}")
        return v


class OutputConfig(BaseModel):
    """Output destinations."""

    out_dir: str = Field(default="out", description="Directory for CSV/SVG/JSON files")
    svg: bool = Field(default=False, description="Emit an SVG plot of |rho10|")
    json_output: bool = Field(default=False, description="Emit machine-readable JSON")
    metrics_file: str | None = Field(default=None, description="Prometheus textfile path")


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(default="WARNING", description="Log level")
    format: str = Field(default="text", description="Log format (json or text)")
    output: str = Field(default="stderr", description="Log output (stdout, stderr or file path)")

    @field_validator("level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is valid."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of {valid_levels}")
        return v_upper

    @field_validator("format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Validate log format is valid."""
        valid_formats = ["json", "text"]
        if v.lower() not in valid_formats:
            raise ValueError(f"Invalid log format: {v}. Must be one of {valid_formats}")
        return v.lower()


class RunConfig(BaseModel):
    """Main run configuration."""

    preset: str | None = Field(default=None, description="Preset the run started from")
    models: str = Field(default="both", description="Reservoirs to compute")
    reservoir: ReservoirConfig = Field(default_factory=ReservoirConfig)
    lorentzian: LorentzianConfig = Field(default_factory=LorentzianConfig)
    initial: InitialStateConfig = Field(default_factory=InitialStateConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @field_validator("models")
    @classmethod
    def validate_models(cls, v: str) -> str:
        """Validate reservoir selection is valid."""
        valid_models = ["special", "lorentzian", "both"]
        if v not in valid_models:
            raise ValueError(f"Invalid models: {v}. Must be one of {valid_models}")
        return v

    def to_flat(self) -> dict[str, Any]:
        """Flatten the configuration back to its file keys.

        Returns:
            Mapping of flat key to value, in FLAT_KEYS order
        """
        flat: dict[str, Any] = {}
        for key, (section, name) in FLAT_KEYS.items():
            owner = self if section is None else getattr(self, section)
            flat[key] = getattr(owner, name)
        return flat


# Flat file key -> (section, field). Section None means a top-level field.
FLAT_KEYS: dict[str, tuple[str | None, str]] = {
    "preset": (None, "preset"),
    "models": (None, "models"),
    "A": ("reservoir", "A"),
    "a": ("reservoir", "a"),
    "omega0": ("reservoir", "omega0"),
    "gamma_strong": ("lorentzian", "gamma_strong"),
    "lambda_strong": ("lorentzian", "lambda_strong"),
    "gamma_weak": ("lorentzian", "gamma_weak"),
    "lambda_weak": ("lorentzian", "lambda_weak"),
    "rho11_0": ("initial", "rho11_0"),
    "rho10_0_re": ("initial", "rho10_0_re"),
    "rho10_0_im": ("initial", "rho10_0_im"),
    "t_min": ("grid", "t_min"),
    "t_max": ("grid", "t_max"),
    "n_points": ("grid", "n_points"),
    "time_unit": ("grid", "time_unit"),
    "log_scale": ("grid", "log_scale"),
    "volterra": ("oracle", "volterra"),
    "inversion": ("oracle", "inversion"),
    "inversion_method": ("oracle", "inversion_method"),
    "volterra_step": ("oracle", "volterra_step"),
    "kernel_tol": ("oracle", "kernel_tol"),
    "inversion_nodes": ("oracle", "inversion_nodes"),
    "inversion_shift": ("oracle", "inversion_shift"),
    "volterra_tol": ("oracle", "volterra_tol"),
    "inversion_tol": ("oracle", "inversion_tol"),
    "out_dir": ("output", "out_dir"),
    "svg": ("output", "svg"),
    "json": ("output", "json_output"),
    "metrics_file": ("output", "metrics_file"),
    "log_level": ("logging", "level"),
    "log_format": ("logging", "format"),
    "log_output": ("logging", "output"),
}

# Parameter sets of the two comparison runs (time in units of tau).
PRESETS: dict[str, dict[str, Any]] = {
    "paper-fig1": {
        "A": 0.8,
        "a": 1.0,
        "omega0": 0.5,
        "gamma_strong": 10.0,
        "lambda_strong": 1.0,
        "gamma_weak": 1.3,
        "lambda_weak": 20.0,
        "rho11_0": 0.5,
        "rho10_0_re": 0.2,
        "rho10_0_im": 0.0,
        "t_min": 0.0,
        "t_max": 5.9,
        "time_unit": "tau",
        "log_scale": False,
    },
    "paper-fig2": {
        "A": 0.8,
        "a": 1.0,
        "omega0": 0.5,
        "gamma_strong": 10.0,
        "lambda_strong": 1.0,
        "gamma_weak": 1.3,
        "lambda_weak": 20.0,
        "rho11_0": 0.5,
        "rho10_0_re": 0.2,
        "rho10_0_im": 0.0,
        "t_min": 3.2,
        "t_max": 30.0,
        "time_unit": "tau",
        "log_scale": True,
    },
}


def nest_flat(flat: dict[str, Any]) -> dict[str, Any]:
    """Convert flat file keys into the nested RunConfig layout.

    Nested section mappings pass through unchanged.

    Args:
        flat: Mapping of flat keys (or section names) to values

    Returns:
        Nested configuration dictionary

    Raises:
        ConfigurationError: If a key is unknown
    """
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        if key in FLAT_KEYS:
            section, name = FLAT_KEYS[key]
            if section is None:
                nested[name] = value
            else:
                nested.setdefault(section, {})[name] = value
        elif key in RunConfig.model_fields and isinstance(value, dict):
            nested.setdefault(key, {}).update(value)
        else:
            raise ConfigurationError(f"Unknown configuration key: {key}")
    return nested


class ConfigLoader:
    """Loads and validates run configuration from multiple sources."""

    def __init__(self, config_path: str | None = None, preset: str | None = None):
        """Initialize the configuration loader.

        Args:
            config_path: Path to configuration file. If None, uses environment variable
                        BANDEDGE_CONFIG_PATH or defaults to config/bandedge.yaml
            preset: Optional preset name applied before the file
        """
        self.config_path = self._resolve_config_path(config_path)
        self.preset = preset or os.getenv("BANDEDGE_PRESET")

    def _resolve_config_path(self, config_path: str | None) -> Path:
        """Resolve configuration file path."""
        if config_path:
            return Path(config_path)

        env_path = os.getenv("BANDEDGE_CONFIG_PATH")
        if env_path:
            return Path(env_path)

        return Path("config/bandedge.yaml")

    def load(self, overrides: dict[str, Any] | None = None) -> RunConfig:
        """Load and validate configuration.

        Sources are merged in order: preset, file, environment, overrides.

        Args:
            overrides: Flat key overrides (typically from command-line flags)

        Returns:
            Validated RunConfig instance

        Raises:
            ConfigurationError: If the preset is unknown or validation fails
        """
        flat: dict[str, Any] = {}
        if self.preset is not None:
            if self.preset not in PRESETS:
                raise ConfigurationError(
                    f"Unknown preset: {self.preset}. Must be one of {sorted(PRESETS)}"
                )
            flat.update(PRESETS[self.preset])
            flat["preset"] = self.preset

        config_dict = nest_flat(flat)
        self._merge(config_dict, nest_flat(self._load_from_file()))
        self._merge(config_dict, nest_flat(self._override_from_env()))
        if overrides:
            self._merge(config_dict, nest_flat(overrides))

        try:
            return RunConfig(**config_dict)
        except ValidationError as e:
            raise ConfigurationError(f"Configuration validation failed: {e}") from e

    @staticmethod
    def _merge(base: dict[str, Any], update: dict[str, Any]) -> None:
        """Merge nested section dictionaries in place."""
        for key, value in update.items():
            if isinstance(value, dict):
                base.setdefault(key, {}).update(value)
            else:
                base[key] = value

    def _load_from_file(self) -> dict[str, Any]:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            # Return empty dict if file doesn't exist, will use defaults
            return {}

        with open(self.config_path) as f:
            config_dict = yaml.safe_load(f) or {}

        if not isinstance(config_dict, dict):
            raise ConfigurationError(f"Configuration file {self.config_path} is not a mapping")
        return config_dict

    def _override_from_env(self) -> dict[str, Any]:
        """Collect overrides from environment variables.

        Environment variables follow the pattern: BANDEDGE_<KEY>
        For example: BANDEDGE_LOG_LEVEL=DEBUG
        """
        overrides: dict[str, Any] = {}
        if log_level := os.getenv("BANDEDGE_LOG_LEVEL"):
            overrides["log_level"] = log_level
        if log_format := os.getenv("BANDEDGE_LOG_FORMAT"):
            overrides["log_format"] = log_format
        if out_dir := os.getenv("BANDEDGE_OUT_DIR"):
            overrides["out_dir"] = out_dir
        if metrics_file := os.getenv("BANDEDGE_METRICS_FILE"):
            overrides["metrics_file"] = metrics_file
        if n_points := os.getenv("BANDEDGE_N_POINTS"):
            overrides["n_points"] = n_points
        return overrides


def load_config(
    config_path: str | None = None,
    preset: str | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Load configuration (convenience function).

    Args:
        config_path: Optional path to configuration file
        preset: Optional preset name
        overrides: Optional flat key overrides

    Returns:
        Validated RunConfig instance
    """
    loader = ConfigLoader(config_path, preset)
    return loader.load(overrides)
