"""CSV and JSON serialization of CLI artifacts.

Floats are written with ``repr`` so every value round-trips exactly.
"""

# ================================== Imports ================================== #
# Standard Library
import csv
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Any, Iterable, Iterator, Optional, Sequence

# Third-party
import numpy as np

# Local Application
from src.models.distribution import JointPMFTable, PMFTable
from src.models.experiment import ComparisonReport

SCHEMA_VERSION = 1
LONG_HEADER = ("N", "k_or_delta", "exact", "predicted", "rel_error")

Table = tuple[list[str], list[list[Any]]]


# ================================== Cells ==================================== #
def format_cell(value: Any) -> str:
    """repr for floats, str for integers, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


# ================================== Tables =================================== #
def permutation_table(perms: np.ndarray) -> Table:
    """One permutation per row, columns w1..wN."""
    header = [f"w{i}" for i in range(1, perms.shape[1] + 1)]
    return header, perms.tolist()


def pmf_rows(table: PMFTable) -> Table:
    rows = [
        [s, p, lp]
        for s, p, lp in zip(
            table.support.tolist(), table.probs.tolist(), table.log_probs
        )
    ]
    return ["s", "prob", "log_prob"], rows


def joint_rows(table: JointPMFTable) -> Table:
    header = [f"s{i}" for i in range(1, len(table.L_list) + 1)] + ["prob", "log_prob"]
    rows = [
        [*cell, p, lp]
        for cell, p, lp in zip(table.cells, table.probs.tolist(), table.log_probs)
    ]
    return header, rows


def report_rows(report: ComparisonReport) -> Table:
    """Plot-ready long format when available, else the summary rows."""
    if report.long_rows:
        rows = [
            [getattr(row, name) for name in LONG_HEADER] for row in report.long_rows
        ]
        return list(LONG_HEADER), rows

    metrics: list[str] = []
    for row in report.rows:
        metrics.extend(name for name in row.metrics if name not in metrics)
    rows = [
        [row.N, row.label, *(row.metrics.get(name) for name in metrics)]
        for row in report.rows
    ]
    return ["N", "label", *metrics], rows


def key_value_rows(values: dict[str, Any]) -> Table:
    rows = [[k, v] for k, v in values.items() if not isinstance(v, (dict, list))]
    return ["name", "value"], rows


# ================================== Writers ================================== #
def write_csv(
    stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])


def envelope(command: str, config: dict[str, Any], result: Any) -> dict[str, Any]:
    """Versioned JSON document: the producing configuration plus the result."""
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "result": result,
    }


def write_json(stream: IO[str], payload: Any) -> None:
    json.dump(payload, stream, indent=2)
    stream.write("\n")


def resolve_output(
    path: Optional[Path], out_dir: Optional[str], command: str, fmt: str
) -> Optional[Path]:
    """Explicit path, else <out_dir>/<command>.<fmt>, else None for stdout."""
    if path is not None:
        return path
    if out_dir:
        return Path(out_dir) / f"{command}.{fmt}"
    return None


@contextmanager
def open_output(path: Optional[Path]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        yield handle
