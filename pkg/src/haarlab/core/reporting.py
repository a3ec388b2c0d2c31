"""
CSV and JSON artifacts.

CSV files start with the schema line ``# haarlab-csv v1`` followed by a header
row; floats are written with ``repr`` so equal runs give equal bytes. JSON is
written with sorted keys and a two-space indent.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from pydantic import BaseModel

from ..__version__ import CSV_SCHEMA
from .exceptions import ReportIOError, ValidationError
from .models import Counterexample, FuzzReport, RunSummary
from .serialization import read_json

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    """Schema line, header and rows; missing row keys become empty cells."""
    buffer = io.StringIO()
    buffer.write(f"# {CSV_SCHEMA}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        unknown = set(row) - set(header)
        if unknown:
            raise ValidationError(
                f"CSV row has columns outside the header: {sorted(unknown)}",
                field_name="row",
            )
        writer.writerow([_cell(row.get(column)) for column in header])
    return buffer.getvalue()


def _write_text(path: PathLike, text: str) -> Path:
    target = Path(path).expanduser()
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="") as handle:
            handle.write(text)
    except OSError as e:
        raise ReportIOError(f"Cannot write {target}: {e}", path=str(target)) from e
    logger.debug(f"Wrote {target}")
    return target


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    return _write_text(path, csv_text(header, rows))


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    """Rows of a haarlab CSV file, checking the schema line."""
    try:
        with open(path, "r", newline="") as handle:
            first = handle.readline().strip()
            if first != f"# {CSV_SCHEMA}":
                raise ReportIOError(
                    f"{path} does not start with '# {CSV_SCHEMA}'", path=str(path)
                )
            return list(csv.DictReader(handle))
    except OSError as e:
        raise ReportIOError(f"Cannot read {path}: {e}", path=str(path)) from e


def _jsonable(data: Any) -> Any:
    if isinstance(data, BaseModel):
        return data.model_dump()
    if isinstance(data, (list, tuple)):
        return [_jsonable(item) for item in data]
    if isinstance(data, dict):
        return {key: _jsonable(value) for key, value in data.items()}
    return data


def json_text(data: Any) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    return _write_text(path, json_text(data))


def write_failures(path: PathLike, failures: Sequence[Counterexample]) -> Path:
    return write_json(path, list(failures))


def load_counterexamples(path: PathLike) -> List[Counterexample]:
    """A failures file (list) or a single counterexample object."""
    data = read_json(path)
    items = data if isinstance(data, list) else [data]
    try:
        return [Counterexample.model_validate(item) for item in items]
    except Exception as e:
        raise ReportIOError(f"{path} does not hold counterexamples: {e}", path=str(path)) from e


def summarize(reports: Dict[str, FuzzReport], extra: Optional[Dict[str, Any]] = None) -> RunSummary:
    """Aggregate suite reports into the run summary written by --json."""
    summary: Dict[str, Any] = {
        "suites": len(reports),
        "trials": sum(r.trials for r in reports.values()),
        "violations": sum(r.violations for r in reports.values()),
        "errors": sum(r.errors for r in reports.values()),
        "failed_suites": sorted(name for name, r in reports.items() if not r.passed),
    }
    if extra:
        summary.update(extra)
    return RunSummary(
        overall_success=all(r.passed for r in reports.values()),
        suites=dict(reports),
        summary=summary,
    )
