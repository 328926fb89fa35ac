"""Slow end-to-end agreement between the closed form and the numerical oracles."""

from pathlib import Path

import pytest

from bandedge.cli.commands import EXIT_OK
from tests.integration.conftest import CliRunner, comment_lines

pytestmark = pytest.mark.slow


def test_trajectory_with_volterra_oracle(run_cli: CliRunner, workdir: Path) -> None:
    """Test enabling the Volterra oracle adds no disagreement warnings."""
    config = workdir / "oracle.yaml"
    config.write_text("models: special\nvolterra: true\nt_max: 3.0\nn_points: 31\n")
    code, _ = run_cli("trajectory", "--config", str(config))
    assert code == EXIT_OK

    header = comment_lines(workdir / "out" / "special.csv")
    assert "config: volterra=True" in header
    assert not any(line.startswith("WARNING") for line in header)


def test_full_verification_suite(run_cli: CliRunner) -> None:
    """Test every check, Volterra oracles included, passes at the default parameters."""
    code, out = run_cli("verify")
    assert code == EXIT_OK, out
    assert any(line.startswith("oracle_volterra") for line in out.splitlines())
    assert any(line.startswith("lorentzian_volterra") for line in out.splitlines())
    assert out.splitlines()[-1].startswith("overall: PASS")
