"""Integration tests for the short- and long-time comparison runs."""

import json
from pathlib import Path

import numpy as np
import pytest

from bandedge.cli.commands import EXIT_OK
from bandedge.core.config import load_config
from tests.integration.conftest import CliRunner, data_rows

REPO_ROOT = Path(__file__).resolve().parents[2]
MODELS = ("special", "lorentzian_strong", "lorentzian_weak")


def _column(path: Path, name: str) -> np.ndarray:
    rows = data_rows(path)
    index = rows[0].index(name)
    return np.array([float(row[index]) for row in rows[1:]])


def test_short_time_comparison(run_cli: CliRunner, workdir: Path) -> None:
    """Test |ρ₁₀| starts at 0.2 for every model and the crossing is reported."""
    code, _ = run_cli("trajectory", "--preset", "paper-fig1", "--n-points", "200", "--json")
    assert code == EXIT_OK

    out = workdir / "out"
    for model in MODELS:
        coherence = _column(out / f"{model}.csv", "abs_rho10")
        assert coherence[0] == pytest.approx(0.2, abs=1e-12)
        assert np.all(coherence <= 0.2 + 1e-12)
        t = _column(out / f"{model}.csv", "t")
        assert t[0] == 0.0
        assert t[-1] == pytest.approx(5.9)

    summary = json.loads((out / "trajectory.json").read_text())
    assert isinstance(summary["crossings"], list)
    for crossing in summary["crossings"]:
        assert 0.0 < crossing < 5.9


def test_long_time_comparison(run_cli: CliRunner, workdir: Path) -> None:
    """Test the band-edge coherence stays far above both Lorentzian curves at 30τ."""
    code, _ = run_cli("trajectory", "--preset", "paper-fig2", "--n-points", "120", "--svg")
    assert code == EXIT_OK

    out = workdir / "out"
    t = _column(out / "special.csv", "t")
    assert t[0] == pytest.approx(3.2)
    assert t[-1] == pytest.approx(30.0)
    assert np.allclose(np.diff(np.log(t)), np.log(t[1] / t[0]))

    final = {model: _column(out / f"{model}.csv", "abs_rho10")[-1] for model in MODELS}
    assert final["special"] > 100 * final["lorentzian_strong"]
    assert final["special"] > 100 * final["lorentzian_weak"]

    svg = (out / "coherence.svg").read_text()
    assert svg.count('id="curve-') == 3


def test_shipped_configuration_files_validate() -> None:
    """Test the configuration files in config/ load."""
    default = load_config(str(REPO_ROOT / "config" / "bandedge.yaml"))
    assert default.grid.n_points > 1

    fig2 = load_config(str(REPO_ROOT / "config" / "bandedge.paper-fig2.yaml"), "paper-fig2")
    assert fig2.grid.log_scale is True
    assert fig2.output.svg is True
    assert fig2.grid.t_max == 30.0
