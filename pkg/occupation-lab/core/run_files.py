"""
Files of a run directory: replicas.csv, meta.json, report.json and plots/*.csv.

Floats are written with repr so a file read back reproduces the exact values and
two runs with equal inputs produce byte-identical files.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

REPLICAS_FILE = "replicas.csv"
META_FILE = "meta.json"
REPORT_FILE = "report.json"
CONFIG_FILE = "config.json"
PLOTS_DIR = "plots"
REPLICA_COLUMNS = ["replica", "t_index", "phi_index", "value"]

PathLike = Union[str, Path]


class RunFileError(ValueError):
    """A run file is missing or malformed."""
    pass


def write_replicas_csv(rows: Iterable[Tuple[int, int, int, float]], path: PathLike) -> Path:
    """One row per (replica, t_index, phi_index)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REPLICA_COLUMNS)
        for replica, t_index, phi_index, value in rows:
            writer.writerow([int(replica), int(t_index), int(phi_index), repr(float(value))])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def sample_rows(samples: Sequence) -> List[Tuple[int, int, int, float]]:
    """Rows of FluctuationSample objects, replica-major."""
    return [row for i, sample in enumerate(samples) for row in sample.rows(i)]


def array_rows(data: np.ndarray) -> List[Tuple[int, int, int, float]]:
    """Rows of an array shaped (replicas, times, test functions)."""
    data = np.asarray(data, dtype=float)
    n, n_t, n_phi = data.shape
    return [(r, i, k, float(data[r, i, k]))
            for r in range(n) for i in range(n_t) for k in range(n_phi)]


def read_replicas_csv(path: PathLike) -> np.ndarray:
    """Array (replicas, times, test functions) from a replicas.csv file."""
    path = Path(path)
    if not path.is_file():
        raise RunFileError(f"Replica file not found: {path}")
    with path.open("r", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != REPLICA_COLUMNS:
            raise RunFileError(f"{path}: expected columns {REPLICA_COLUMNS}, "
                               f"got {reader.fieldnames}")
        rows = [(int(r["replica"]), int(r["t_index"]), int(r["phi_index"]), float(r["value"]))
                for r in reader]
    if not rows:
        raise RunFileError(f"{path}: no replica rows")

    index = np.array([row[:3] for row in rows], dtype=np.int64)
    shape = tuple(int(m) + 1 for m in index.max(axis=0))
    if len(rows) != shape[0] * shape[1] * shape[2]:
        raise RunFileError(f"{path}: {len(rows)} rows do not fill a {shape} table")
    data = np.full(shape, np.nan)
    data[index[:, 0], index[:, 1], index[:, 2]] = [row[3] for row in rows]
    if np.isnan(data).any():
        raise RunFileError(f"{path}: duplicate or missing (replica, t_index, phi_index) rows")
    return data


def write_json(data: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise RunFileError(f"File not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise RunFileError(f"{path} is not valid JSON: {e}") from e


def write_plot_csvs(series: Dict[str, List[List[float]]], directory: PathLike) -> List[Path]:
    """One two-or-more-column CSV per plot series."""
    headers = {
        "lag_covariance": ["lag", "empirical", "theory"],
        "theory_vs_empirical": ["theory", "empirical"],
    }
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in sorted(series.items()):
        path = directory / f"{name}.csv"
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            width = len(rows[0]) if rows else 0
            writer.writerow(headers.get(name, [f"c{i}" for i in range(width)]))
            for row in rows:
                writer.writerow([repr(float(v)) for v in row])
        written.append(path)
    logger.debug(f"Wrote plot data {[p.name for p in written]} to {directory}")
    return written
