"""Delimited report emission: CSV/JSON rows with atomic file writes."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .experiment import ExperimentReport

CSV_COLUMNS = [
    "n",
    "gamma",
    "l",
    "trials",
    "seed",
    "freq_gap_event",
    "ci_lo",
    "ci_hi",
    "freq_e1",
    "freq_e2",
    "freq_e1_and_e2",
    "mean_gap",
    "threshold",
    "bound_3_64",
]

BOUND_3_64 = 3.0 / 64.0


def report_row(report: ExperimentReport) -> dict:
    """Flatten one experiment report into the stable row schema."""
    return {
        "n": report.params.n,
        "gamma": report.params.gamma_target,
        "l": report.params.l_target,
        "trials": report.trials,
        "seed": report.master_seed,
        "freq_gap_event": report.gap_event.freq,
        "ci_lo": report.gap_event.ci_lo,
        "ci_hi": report.gap_event.ci_hi,
        "freq_e1": report.e1.freq,
        "freq_e2": report.e2.freq,
        "freq_e1_and_e2": report.e1_and_e2.freq,
        "mean_gap": report.mean_gap,
        "threshold": report.threshold,
        "bound_3_64": BOUND_3_64,
    }


def format_value(value) -> str:
    """Integers verbatim, floats with 12 significant digits.

    The fixed significant-digit count is what makes repeated runs
    byte-comparable.
    """
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f"{value:.12g}"


def render_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_value(row[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def render_json(rows: list[dict]) -> str:
    ordered = [{col: row[col] for col in CSV_COLUMNS} for row in rows]
    return json.dumps(ordered, indent=2) + "\n"


def write_text_atomic(text: str, path: Path) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
