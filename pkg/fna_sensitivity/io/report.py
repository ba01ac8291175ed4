"""
Report emission
===============

JSON reports share one top-level layout::

    {"config": {...}, "results": {...}, "warnings": [...], "timing": null}

``config`` is the full resolved :class:`~fna_sensitivity.io.config.RunConfig`;
``timing`` stays ``null`` unless timing was requested, so seeded runs produce
byte-identical files.  Tables (curves, per-unit ranges, study metrics) are
written as CSV, with the report alongside in ``<output>.json``.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import numpy as np
import pandas as pd

from ..exceptions import OutputError
from .config import RunConfig


def _default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def build_report(
    config: RunConfig,
    results: Dict[str, Any],
    warnings: Iterable[str] = (),
    timing: Optional[Dict[str, float]] = None,
) -> Dict[str, Any]:
    return {
        "config": config.to_dict(),
        "results": results,
        "warnings": list(warnings),
        "timing": timing if config.timing else None,
    }


def to_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, default=_default, allow_nan=True)


def emit_text(text: str, output: str) -> None:
    """Write *text* to stdout when *output* is ``-``, else to that file."""
    if not text.endswith("\n"):
        text += "\n"
    if output == "-":
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {output}: {exc.strerror or exc}") from exc
    print(f"Output written to {output}", file=sys.stderr)


def emit_frame(frame: pd.DataFrame, output: str) -> None:
    """Write *frame* as CSV (header, ``.`` decimal separator, no index)."""
    emit_text(frame.to_csv(index=False, lineterminator="\n"), output)


def sidecar_path(output: str) -> str:
    return f"{output}.json"


def emit_sidecar(report: Dict[str, Any], output: str) -> None:
    """
    Record the JSON report next to a CSV table.

    A table written to *output* gets its report in ``<output>.json``; a
    table on stdout gets it as one line on stderr.
    """
    if output == "-":
        print(json.dumps(report, default=_default, allow_nan=True), file=sys.stderr)
    else:
        emit_text(to_json(report), sidecar_path(output))
