"""File writers for CLI results: CSV tables, JSON summaries and SVG plots.

All numbers are written with repr-style floats so output is locale-independent
and bit-stable for identical configurations. Every file starts with a comment
header recording the library version and the full configuration.
"""

import csv
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from io import BytesIO
from pathlib import Path
from typing import Any
from xml.sax.saxutils import escape

import matplotlib
import numpy as np
import numpy.typing as npt
from matplotlib.figure import Figure
from matplotlib.ticker import FuncFormatter, NullFormatter

import bandedge
from bandedge.core.config import RunConfig
from bandedge.model.dynamics import Trajectory

TRAJECTORY_COLUMNS = (
    "t",
    "re_G",
    "im_G",
    "abs_G",
    "rho11",
    "re_rho10",
    "im_rho10",
    "abs_rho10",
)
ROOTS_COLUMNS = ("l", "re_z", "im_z", "re_R", "im_R")


def format_float(value: float) -> str:
    """Shortest round-tripping decimal representation."""
    return repr(float(value))


def header_lines(config: RunConfig, command: str, extra: Sequence[str] = ()) -> list[str]:
    """Comment header (without the leading '# ') for an output file."""
    lines = [f"bandedge {bandedge.__version__}", f"command: {command}"]
    lines.extend(f"config: {key}={value}" for key, value in config.to_flat().items())
    lines.extend(extra)
    return lines


def _write_csv(
    path: Path, header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence[str]]
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.writelines(f"# {line}\n" for line in header)
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def write_trajectory_csv(
    path: Path, trajectory: Trajectory, time_axis: npt.ArrayLike, header: Sequence[str]
) -> Path:
    """Write one trajectory with columns t, re_G, im_G, abs_G, rho11, re_rho10, im_rho10, abs_rho10.

    Args:
        path: Destination file
        trajectory: Trajectory in absolute time
        time_axis: Values written in the t column (grid in the configured unit)
        header: Comment header lines

    Returns:
        The written path
    """
    axis = np.asarray(time_axis, dtype=float)
    rows = []
    for t, g, state in zip(axis, trajectory.G_values, trajectory.states, strict=True):
        rho10 = complex(state.rho10)
        values = (t, g.real, g.imag, abs(g), state.rho11, rho10.real, rho10.imag, abs(rho10))
        rows.append([format_float(v) for v in values])
    return _write_csv(path, header, TRAJECTORY_COLUMNS, rows)


def write_roots_csv(
    path: Path, roots: Sequence[complex], residues: Sequence[complex], header: Sequence[str]
) -> Path:
    """Write roots z_l and residues R(z_l), one row per root."""
    rows = [
        [str(index), *(format_float(v) for v in (z.real, z.imag, r.real, r.imag))]
        for index, (z, r) in enumerate(zip(roots, residues, strict=True), start=1)
    ]
    return _write_csv(path, header, ROOTS_COLUMNS, rows)


@dataclass(frozen=True)
class RootsTable:
    """Roots and residues read back from roots.csv."""

    roots: list[complex]
    residues: list[complex]


def read_roots_csv(path: Path) -> RootsTable:
    """Read a roots.csv file written by write_roots_csv.

    Raises:
        ValueError: If the column header is missing or malformed
    """
    with open(path, encoding="utf-8", newline="") as f:
        data = [line for line in f if line.strip() and not line.startswith("#")]
    reader = csv.DictReader(data)
    if reader.fieldnames is None:
        raise ValueError(f"No data in {path}")
    if tuple(reader.fieldnames) != ROOTS_COLUMNS:
        raise ValueError(f"Invalid roots.csv columns: {reader.fieldnames}")
    roots: list[complex] = []
    residues: list[complex] = []
    for row in reader:
        roots.append(complex(float(row["re_z"]), float(row["im_z"])))
        residues.append(complex(float(row["re_R"]), float(row["im_R"])))
    return RootsTable(roots=roots, residues=residues)


def complex_pair(value: complex) -> list[float]:
    """JSON encoding of a complex number as [re, im]."""
    return [float(value.real), float(value.imag)]


def write_json(path: Path, payload: dict[str, Any], header: Sequence[str]) -> Path:
    """Write a JSON document; the header goes into a "header" field."""
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"header": list(header), **payload}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=False)
        f.write("\n")
    return path


def crossing_times(
    times: npt.ArrayLike, first: npt.ArrayLike, second: npt.ArrayLike
) -> list[float]:
    """Times where two sampled curves cross, by linear interpolation.

    Points where the curves touch without changing order are not crossings.
    """
    t = np.asarray(times, dtype=float)
    diff = np.asarray(first, dtype=float) - np.asarray(second, dtype=float)
    crossings: list[float] = []
    last_index: int | None = None
    for i in range(len(diff)):
        if diff[i] == 0.0:
            continue
        if last_index is not None and np.sign(diff[i]) != np.sign(diff[last_index]):
            t0, t1 = t[last_index], t[i]
            d0, d1 = diff[last_index], diff[i]
            crossings.append(float(t0 + (t1 - t0) * d0 / (d0 - d1)))
        last_index = i
    return crossings


@dataclass(frozen=True)
class Curve:
    """One line of an overlay plot."""

    label: str
    x: npt.NDArray[np.float64]
    y: npt.NDArray[np.float64]
    color: str
    width: float = 1.5


# Fixed hash salt and unsimplified paths keep the SVG bit-stable and lossless
_SVG_STYLE = {"svg.fonttype": "none", "svg.hashsalt": "bandedge", "path.simplify": False}


def _plain_ticks(value: float, _position: int) -> str:
    return f"{value:g}"


def write_svg(
    path: Path,
    curves: Sequence[Curve],
    header: Sequence[str],
    title: str,
    x_label: str,
    y_label: str,
    log_scale: bool = False,
) -> Path:
    """Write an overlay plot of the curves as an SVG document.

    Rendered with matplotlib. Each curve is a group with id ``curve-<label>``.
    With log_scale both axes are logarithmic and non-positive samples are dropped.
    The header goes into leading XML comments and the document description.
    """
    with matplotlib.rc_context(_SVG_STYLE):
        fig = Figure(figsize=(7.2, 4.8))
        ax = fig.add_subplot()
        lines = []
        for curve in curves:
            x, y = np.asarray(curve.x, dtype=float), np.asarray(curve.y, dtype=float)
            if log_scale:
                keep = (x > 0) & (y > 0)
                x, y = x[keep], y[keep]
            (line,) = ax.plot(x, y, color=curve.color, linewidth=curve.width, label=curve.label)
            lines.append(line)

        if log_scale:
            ax.set_xscale("log")
            ax.set_yscale("log")
            for axis in (ax.xaxis, ax.yaxis):
                axis.set_major_formatter(FuncFormatter(_plain_ticks))
                axis.set_minor_formatter(NullFormatter())
        else:
            ax.set_ylim(bottom=min(0.0, ax.get_ylim()[0]))

        ax.set_title(title)
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        # Ids are set after the legend so its handles do not copy them
        for line, curve in zip(lines, curves, strict=True):
            line.set_gid(f"curve-{curve.label}")

        buffer = BytesIO()
        fig.savefig(
            buffer, format="svg", metadata={"Date": None, "Description": "\n".join(header)}
        )

    declaration, _, body = buffer.getvalue().decode("utf-8").partition("\n")
    comments = [f"<!-- {escape(line).replace('--', '- -')} -->" for line in header]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join([declaration, *comments, body]))
    return path
