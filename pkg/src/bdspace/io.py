"""JSON and CSV formats.

Exact rationals are written as ``"p/q"`` strings (integers without the ``/1``), floats
with 12 significant digits.  Readers accept numbers or ``"p/q"`` strings anywhere.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import StageLedger
from .errors import InvalidInputError
from .params import as_rational

__all__ = [
    "to_jsonable",
    "dumps",
    "parse_scalar",
    "read_vector",
    "write_vector",
    "read_matrix_csv",
    "write_matrix_csv",
    "ledger_to_dict",
    "write_gamma_csv",
    "rows_to_csv",
]


def _fmt_float(x: float):
    if x != x or x in (float("inf"), float("-inf")):
        return None
    return float(f"{x:.12g}")


def to_jsonable(obj):
    """Recursively convert results into JSON-ready values."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)


def parse_scalar(value, exact: bool):
    if exact:
        return as_rational(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"cannot parse {value!r} as a number") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInputError(f"not a number: {value!r}")
    return float(value)


def _to_array(values, exact):
    if exact:
        return np.array([parse_scalar(v, True) for v in values], dtype=object)
    return np.array([parse_scalar(v, False) for v in values], dtype=np.float64)


def read_vector(source, exact: bool = False) -> np.ndarray:
    """Parse a JSON array (a string, or a path to a file holding one)."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"vector is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise InvalidInputError("vector JSON must be an array")
    return _to_array(data, exact)


def write_vector(coords) -> str:
    return json.dumps(to_jsonable(np.asarray(coords)))


def read_matrix_csv(source, exact: bool = False) -> np.ndarray:
    """Rows are target coordinates; blank lines and ``#`` comments are skipped."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    rows = [
        [cell.strip() for cell in row]
        for row in csv.reader(io.StringIO(text))
        if row and any(c.strip() for c in row) and not row[0].lstrip().startswith("#")
    ]
    if not rows:
        raise InvalidInputError("operator CSV has no rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InvalidInputError("operator CSV rows have unequal lengths")
    arr = np.array([_to_array(r, exact) for r in rows], dtype=object if exact else np.float64)
    return arr.reshape(len(rows), width)


def write_matrix_csv(matrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(matrix).tolist():
        writer.writerow(to_jsonable(row))
    return buf.getvalue()


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([to_jsonable(v) for v in row])
    return buf.getvalue()


def ledger_to_dict(ledger: StageLedger) -> dict:
    return {
        "params": ledger.params.to_dict(),
        "dims": list(ledger.dims),
        "gamma_counts": [len(t) for t in ledger.gamma_tables],
    }


def write_gamma_csv(ledger: StageLedger, fh) -> None:
    """Dump every gamma table as ``n,m,i,j,eps1,eps2`` rows."""
    fh.write("n,m,i,j,eps1,eps2\n")
    for n, table in enumerate(ledger.gamma_tables, start=1):
        if len(table):
            stage = np.full((len(table), 1), n, dtype=np.int64)
            np.savetxt(fh, np.hstack([stage, table]), fmt="%d", delimiter=",")
