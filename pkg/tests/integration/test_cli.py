"""Integration tests for the roots, trajectory and verify commands."""

import json
from functools import partial
from pathlib import Path

import pytest

from bandedge.cli.commands import (
    EXIT_CHECK_FAILED,
    EXIT_INVALID_INPUT,
    EXIT_IO_ERROR,
    EXIT_OK,
    main,
)
from bandedge.cli.output import TRAJECTORY_COLUMNS, read_roots_csv
from bandedge.cli.verify import VerificationSuite
from bandedge.core.config import load_config
from bandedge.core.metrics import CheckStatus, RunMetrics
from tests.integration.conftest import CliRunner, comment_lines, data_rows

MODEL_FILES = ("special.csv", "lorentzian_strong.csv", "lorentzian_weak.csv")


def test_roots_json_matches_csv(run_cli: CliRunner, workdir: Path) -> None:
    """Test roots --json prints JSON whose roots equal those in roots.csv."""
    code, out = run_cli("roots", "--json")
    assert code == EXIT_OK

    payload = json.loads(out)
    assert payload["tau"] == pytest.approx(0.974, abs=2e-3)
    assert payload["abs_D"] == pytest.approx(0.112, abs=2e-3)
    assert payload["identity_residuals"]["sum_R"] <= 1e-10
    assert payload["bound_state"] is not None

    table = read_roots_csv(workdir / "out" / "roots.csv")
    assert [[z.real, z.imag] for z in table.roots] == payload["roots"]
    assert [[r.real, r.imag] for r in table.residues] == payload["residues"]

    document = json.loads((workdir / "out" / "roots.json").read_text())
    assert document["roots"] == payload["roots"]
    assert document["header"][1] == "command: roots"


def test_roots_table(run_cli: CliRunner) -> None:
    """Test the plain-text report."""
    code, out = run_cli("roots", "--A", "2.0", "--a", "3.0")
    assert code == EXIT_OK
    assert "tau = " in out
    assert "|D| = " in out
    assert "trapped population = " in out
    assert len([line for line in out.splitlines() if line[:2].strip().isdigit()]) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ("roots", "--a", "0"),
        ("roots", "--A", "-1"),
        ("trajectory", "--t-max", "0"),
        ("trajectory", "--n-points", "1"),
    ],
)
def test_invalid_parameters_exit_2(run_cli: CliRunner, argv: tuple[str, ...]) -> None:
    """Test invalid parameters are rejected before any computation."""
    code, _ = run_cli(*argv)
    assert code == EXIT_INVALID_INPUT


def test_unknown_preset_is_usage_error(run_cli: CliRunner) -> None:
    """Test argparse rejects presets that do not exist."""
    with pytest.raises(SystemExit) as excinfo:
        run_cli("roots", "--preset", "paper-fig9")
    assert excinfo.value.code == 2


def test_unreadable_output_directory_exit_3(run_cli: CliRunner, workdir: Path) -> None:
    """Test an output directory below a regular file is an I/O error."""
    (workdir / "blocked").write_text("")
    code, _ = run_cli("roots", "--out", "blocked/out")
    assert code == EXIT_IO_ERROR


def test_trajectory_files(run_cli: CliRunner, workdir: Path) -> None:
    """Test one CSV per model with the documented columns and header."""
    code, _ = run_cli("trajectory", "--n-points", "60")
    assert code == EXIT_OK

    for name in MODEL_FILES:
        path = workdir / "out" / name
        rows = data_rows(path)
        assert rows[0] == list(TRAJECTORY_COLUMNS)
        assert len(rows) == 61
        header = comment_lines(path)
        assert header[0].startswith("bandedge ")
        assert "command: trajectory" in header
        assert "config: n_points=60" in header
        assert "time axis: t/tau" in header
        assert any(line.startswith("tau = ") for line in header)
        assert any(line.startswith("crossings special/lorentzian_strong:") for line in header)
        assert not any(line.startswith("WARNING") for line in header)
    assert not (workdir / "out" / "coherence.svg").exists()


def test_trajectory_is_bit_stable(run_cli: CliRunner, workdir: Path) -> None:
    """Test identical configurations produce identical files."""
    run_cli("trajectory", "--n-points", "40")
    first = {name: (workdir / "out" / name).read_bytes() for name in MODEL_FILES}
    run_cli("trajectory", "--n-points", "40")
    second = {name: (workdir / "out" / name).read_bytes() for name in MODEL_FILES}
    assert first == second


def test_trajectory_svg_and_json(run_cli: CliRunner, workdir: Path) -> None:
    """Test the optional SVG overlay and JSON summary."""
    code, _ = run_cli("trajectory", "--n-points", "50", "--svg", "--json", "--out", "results")
    assert code == EXIT_OK

    svg = (workdir / "results" / "coherence.svg").read_text()
    assert svg.count('id="curve-') == 3
    summary = json.loads((workdir / "results" / "trajectory.json").read_text())
    assert summary["files"] == [*MODEL_FILES, "coherence.svg"]
    assert summary["warnings"] == []
    assert set(summary["final_abs_rho10"]) == {"special", "lorentzian_strong", "lorentzian_weak"}


def test_trajectory_config_file(run_cli: CliRunner, workdir: Path) -> None:
    """Test a configuration file selects models and the time unit."""
    config = workdir / "run.yaml"
    config.write_text("models: special\ntime_unit: inverse_a\nt_max: 4.0\nn_points: 21\n")
    code, _ = run_cli("trajectory", "--config", str(config))
    assert code == EXIT_OK

    assert (workdir / "out" / "special.csv").exists()
    assert not (workdir / "out" / "lorentzian_weak.csv").exists()
    rows = data_rows(workdir / "out" / "special.csv")
    assert float(rows[-1][0]) == 4.0
    assert "time axis: t*a" in comment_lines(workdir / "out" / "special.csv")


def test_metrics_textfile(run_cli: CliRunner, workdir: Path) -> None:
    """Test --metrics-file writes the Prometheus textfile."""
    code, _ = run_cli("trajectory", "--n-points", "20", "--metrics-file", "run.prom")
    assert code == EXIT_OK
    text = (workdir / "run.prom").read_text()
    assert 'bandedge_propagator_evaluations_total{model="special"} 20.0' in text
    assert "bandedge_stage_duration_seconds" in text


def test_verify_quick(run_cli: CliRunner, workdir: Path) -> None:
    """Test the quick verification suite passes at the default parameters."""
    code, out = run_cli("verify", "--quick", "--json")
    assert code == EXIT_OK, out
    lines = out.splitlines()
    assert lines[-1].startswith("overall: PASS")
    assert any(line.startswith("residue_identities") for line in lines)
    assert not any(line.startswith("oracle_volterra") for line in lines)

    document = json.loads((workdir / "out" / "verify.json").read_text())
    assert document["status"] == "pass"
    assert {check["status"] for check in document["checks"]} == {"pass"}


def test_corrupted_residue_fails_verification(workdir: Path) -> None:
    """Test a perturbed residue makes the identity check fail with a message."""
    config = load_config(str(workdir / "missing.yaml"))
    suite = VerificationSuite(config, RunMetrics(), quick=True, corrupt_residue=True)
    report = suite.run()

    assert report["status"] == "fail"
    result = next(c for c in report["checks"] if c.name == "residue_identities")
    assert result.status == CheckStatus.FAIL
    assert "sum R = 0" in (result.message or "")
    assert result.measured >= 1e-6 * (1 - 1e-6)


def test_verify_command_exits_nonzero_on_corrupted_residue(
    run_cli: CliRunner, monkeypatch: pytest.MonkeyPatch
) -> None:
    """Test verify reports the failed identity and exits with the check-failed code."""
    monkeypatch.setattr(
        "bandedge.cli.commands.VerificationSuite",
        partial(VerificationSuite, corrupt_residue=True),
    )
    code, out = run_cli("verify", "--quick")
    assert code == EXIT_CHECK_FAILED

    lines = out.splitlines()
    identity = next(line for line in lines if line.startswith("residue_identities"))
    assert "FAIL" in identity
    assert "sum R = 0" in identity
    assert lines[-1].startswith("overall: FAIL")


def test_main_defaults_to_sys_stdout(
    workdir: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test main writes reports to sys.stdout when no stream is given."""
    assert main(["roots"]) == EXIT_OK
    assert "tau = " in capsys.readouterr().out

