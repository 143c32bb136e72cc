"""resampling/datasets.py — One-column CSV ingestion for user datasets.

Values are parsed as decimal reals ('.' separator).  The header row is
flag-controlled:

    header=True   first row is a header and skipped
    header=False  every row is data
    header=None   auto: the first row is a header iff it does not parse as a number

Public API
----------
load_dataset(path, header=None) -> np.ndarray
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import DatasetError

logger = logging.getLogger(__name__)


def _first_row_is_header(path: Path) -> bool:
    # blank lines are skipped by read_csv too, so they never count as the header
    with open(path, encoding="utf-8") as f:
        first = next((line for line in f if line.strip()), "").split(",")[0].strip()
    try:
        float(first)
    except ValueError:
        return True
    return False


def load_dataset(path: str | Path, header: bool | None = None) -> np.ndarray:
    """Read the first column of a CSV into a float vector.

    Raises:
        DatasetError: file missing / unreadable, non-numeric cells, or no rows.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")

    try:
        if header is None:
            header = _first_row_is_header(path)
        df = pd.read_csv(
            path,
            header=0 if header else None,
            usecols=[0],
            dtype=str,
            skip_blank_lines=True,
        )
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise DatasetError(f"could not read dataset {path}: {exc}") from exc
    except pd.errors.EmptyDataError:
        df = pd.DataFrame({0: []})

    column = df.iloc[:, 0].dropna().str.strip()
    values = pd.to_numeric(column, errors="coerce")
    bad = column[values.isna()]
    if len(bad):
        raise DatasetError(
            f"dataset {path}: {len(bad)} non-numeric value(s), first {bad.iloc[0]!r}"
        )
    if values.empty:
        raise DatasetError(f"dataset {path} has no data rows")

    logger.info("load_dataset: %d values from %s", len(values), path)
    return values.to_numpy(dtype=float)
