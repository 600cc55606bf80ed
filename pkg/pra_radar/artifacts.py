# pra_radar/artifacts.py

import csv
import dataclasses
import logging
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from .model import Design

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.csv"
DESIGN_FILE = "design.csv"
BEAMPATTERN_FILE = "beampattern.csv"
SWEEP_FILE = "bcrb_vs_snr.csv"
COMPARE_FILE = "compare.csv"
VERIFY_FILE = "verify_report.csv"

DESIGN_HEADER = ["block", "row", "col", "real", "imag"]


def format_value(value) -> str:
    """Locale-free text form: 17 significant digits for floats"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Header row plus one line per row, '\\n' line endings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} row(s) to {path}")
    return path


def write_records(path: Path, records: Sequence) -> Path:
    """Dataclass records; columns follow the field order"""
    if not records:
        raise ValueError(f"nothing to write to {path}")
    header = [f.name for f in dataclasses.fields(records[0])]
    return write_rows(path, header, (dataclasses.astuple(r) for r in records))


# Design speichern / laden
def write_design(path: Path, design: Design) -> Path:
    rows: List[tuple] = []
    rows.extend(("xi", i, 0, float(v), 0.0) for i, v in enumerate(design.xi))
    rows.extend(("phi", i, 0, float(v), 0.0) for i, v in enumerate(design.phi))
    for (i, j), v in np.ndenumerate(design.r_x):
        rows.append(("r_x", i, j, float(np.real(v)), float(np.imag(v))))
    return write_rows(path, DESIGN_HEADER, rows)


def read_design(path: Path) -> Design:
    """
    Parse a design.csv written by ``write_design``.

    Raises:
        ValueError: unknown block, missing entries or wrong header
    """
    path = Path(path)
    with open(path, "r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != DESIGN_HEADER:
            raise ValueError(f"{path}: expected header {DESIGN_HEADER}, got {header}")
        entries = {"xi": {}, "phi": {}, "r_x": {}}
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(DESIGN_HEADER):
                raise ValueError(f"{path}:{line_no}: expected {len(DESIGN_HEADER)} fields, got {len(row)}")
            block, i, j, re_part, im_part = row
            if block not in entries:
                raise ValueError(f"{path}:{line_no}: unknown block {block!r}")
            entries[block][(int(i), int(j))] = complex(float(re_part), float(im_part))

    n_tx, n_rx = len(entries["xi"]), len(entries["phi"])
    if n_tx == 0 or n_rx == 0 or len(entries["r_x"]) != n_tx * n_tx:
        raise ValueError(f"{path}: incomplete design ({n_tx} xi, {n_rx} phi, {len(entries['r_x'])} r_x entries)")
    try:
        xi = np.array([entries["xi"][(i, 0)].real for i in range(n_tx)])
        phi = np.array([entries["phi"][(i, 0)].real for i in range(n_rx)])
        r_x = np.array([[entries["r_x"][(i, j)] for j in range(n_tx)] for i in range(n_tx)])
    except KeyError as e:
        raise ValueError(f"{path}: missing entry {e}") from e
    return Design(xi=xi, phi=phi, r_x=r_x)
