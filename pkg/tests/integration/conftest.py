"""Shared fixtures for integration tests."""

import io
from collections.abc import Callable
from pathlib import Path

import pytest

from bandedge.cli.commands import main

CliRunner = Callable[..., tuple[int, str]]


@pytest.fixture
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Run inside an empty directory so no config/bandedge.yaml is picked up."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def run_cli(workdir: Path) -> CliRunner:
    """Invoke the CLI in-process and capture the report stream."""

    def _run(*argv: str) -> tuple[int, str]:
        stdout = io.StringIO()
        code = main(list(argv), stdout=stdout)
        return code, stdout.getvalue()

    return _run


def data_rows(path: Path) -> list[list[str]]:
    """Non-comment CSV rows, header row included."""
    return [
        line.split(",")
        for line in path.read_text().splitlines()
        if line and not line.startswith("#")
    ]


def comment_lines(path: Path) -> list[str]:
    """Header comment lines without the leading '# '."""
    return [line[2:] for line in path.read_text().splitlines() if line.startswith("# ")]
