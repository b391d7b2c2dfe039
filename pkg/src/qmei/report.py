"""Report assembly and deterministic serialization.

Reports echo the command and the fully resolved configuration so every
run is reproducible from its own output.  JSON output is byte-stable for
identical inputs: keys are sorted and no timestamps are embedded.
Infinite values serialize as the string ``"+inf"``.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass
from typing import Any

import json

import numpy as np

from .config import ToleranceConfig


@dataclass
class Report:
    command: str
    config: dict
    inputs: dict
    result: dict
    diagnostics: dict
    table: tuple[list[str], list[list]] | None = None


def _jsonable(value: Any):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "+inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if dataclasses.is_dataclass(value):
        return _jsonable(dataclasses.asdict(value))
    return str(value)


def build_report(
    command: str,
    cfg: ToleranceConfig,
    inputs: dict,
    result: dict,
    diagnostics: dict | None = None,
    table: tuple[list[str], list[list]] | None = None,
) -> Report:
    return Report(
        command=command,
        config=dataclasses.asdict(cfg),
        inputs=inputs,
        result=result,
        diagnostics=diagnostics or {},
        table=table,
    )


def report_to_json(report: Report) -> str:
    payload = {
        "command": report.command,
        "config": _jsonable(report.config),
        "inputs": _jsonable(report.inputs),
        "result": _jsonable(report.result),
        "diagnostics": _jsonable(report.diagnostics),
    }
    if report.table is not None:
        header, rows = report.table
        payload["table"] = {"columns": header, "rows": _jsonable(rows)}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv_cell(value) -> str:
    value = _jsonable(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_to_csv(report: Report) -> str:
    if report.table is None:
        raise ValueError(f"command {report.command!r} has no tabular output")
    header, rows = report.table
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(v) for v in row) + "\n")
    return buf.getvalue()
