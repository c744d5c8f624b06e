"""
CSV and Key-Value File Helpers
Fixed 17 significant digit output: repeated runs are byte-identical and
reading a file back gives the same doubles
"""

import json
import logging
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np
import pandas as pd

from app.shared.errors import DataError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
PathLike = Union[str, Path]


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %d rows to %s", len(frame), path)
    return path


def write_key_values(values: Mapping[str, object], path: PathLike) -> Path:
    """One key=value per line, in mapping order"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={_format_value(value)}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json(payload: Mapping, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def read_numeric_csv(path: PathLike, required: Sequence[str] = ()) -> pd.DataFrame:
    """
    Read a CSV with a header row and numeric columns.

    Raises DataError naming the file line of the first unreadable value.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: cannot parse CSV ({e})") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}", line=1)
    if frame.empty:
        raise DataError(f"{path}: no data rows")

    numeric = {}
    for column in frame.columns:
        raw = frame[column]
        converted = pd.to_numeric(raw.str.strip(), errors="coerce")
        bad = converted.isna() | ~np.isfinite(converted.fillna(0.0).to_numpy(dtype=float))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            # header is line 1
            raise DataError(f"{path}: column '{column}' has non-numeric value {raw.iloc[row]!r}", line=row + 2)
        # float() parsing is correctly rounded, so 17 digits read back exactly
        numeric[column] = raw.str.strip().astype(float).to_numpy()
    return pd.DataFrame(numeric)

