"""
CSV ingestion and emission
==========================

Input files carry a header row with a binary outcome column ``y``, a binary
treatment column ``a`` and numeric covariate columns.  Row numbers in error
messages count data rows from 1 (the header is not counted); column numbers
count header fields from 1.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..exceptions import ParseError, SchemaError
from ..models import Dataset

logger = logging.getLogger(__name__)

OUTCOME = "y"
TREATMENT = "a"


def _numeric(frame: pd.DataFrame, header: Sequence[str]) -> pd.DataFrame:
    """Convert every cell to float, raising on the first one that is not a finite number."""
    out = {}
    for name in frame.columns:
        j = header.index(name) + 1
        raw = frame[name].str.strip()
        values = pd.to_numeric(raw, errors="coerce")
        bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
        if bad.any():
            i = int(np.flatnonzero(bad.to_numpy())[0])
            cell = raw.iloc[i]
            what = "missing value" if cell == "" else f"cannot parse {cell!r} as a finite number"
            raise ParseError(f"{what} in column {name!r}", row=i + 1, column=j)
        out[name] = values.astype(float)
    return pd.DataFrame(out, columns=frame.columns)


def _binary(frame: pd.DataFrame, name: str, column: int) -> np.ndarray:
    values = frame[name].to_numpy()
    bad = ~((values == 0.0) | (values == 1.0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise SchemaError(
            f"column {name!r} must be 0/1, found {values[i]:g}", row=i + 1, column=column
        )
    return values.astype(np.int8)


def load_csv(path: str | Path, covariates: Optional[Sequence[str]] = None) -> Dataset:
    """
    Read a dataset from *path*.

    Parameters
    ----------
    path:
        CSV file with a header row.
    covariates:
        Covariate column names to use; all columns other than ``y`` and
        ``a`` when omitted.

    Raises
    ------
    ParseError
        When a cell used by the dataset is empty or not a finite number.
    SchemaError
        When the file does not exist, when ``y``, ``a`` or a requested
        covariate is missing, when ``y``/``a``
        hold values other than 0/1, or when no covariate remains.
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: no such file")
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    raw.columns = [str(c).strip() for c in raw.columns]
    header = list(raw.columns)
    for required in (OUTCOME, TREATMENT):
        if required not in header:
            raise SchemaError(f"{path.name}: required column {required!r} is missing")

    if covariates is None:
        names = [c for c in header if c not in (OUTCOME, TREATMENT)]
    else:
        names = list(covariates)
        missing = [c for c in names if c not in header]
        if missing:
            raise SchemaError(f"{path.name}: covariate columns not found: {', '.join(missing)}")
    if not names:
        raise SchemaError(f"{path.name}: no covariate columns")
    if len(raw) == 0:
        raise SchemaError(f"{path.name}: no data rows")

    used = [OUTCOME, TREATMENT] + names
    numeric = _numeric(raw[used], header)
    y = _binary(numeric, OUTCOME, header.index(OUTCOME) + 1)
    a = _binary(numeric, TREATMENT, header.index(TREATMENT) + 1)
    if a.min() == a.max():
        raise SchemaError(f"{path.name}: both treatment arms must be present")

    data = Dataset(numeric[names].to_numpy(dtype=float), a, y, tuple(names))
    treated, control = data.arm_counts()
    logger.info("loaded %s: %d rows, %d covariates, %d treated / %d control",
                path, data.n, data.p, treated, control)
    return data


def write_csv(data: Dataset, path: str | Path) -> None:
    """Write *data* with columns ``y, a, <covariates>``; :func:`load_csv` reads it back unchanged."""
    data.to_frame().to_csv(path, index=False)
