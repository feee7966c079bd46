"""Deterministic report serialization: JSON, CSV, or plain text.

Field order is insertion order (stable by construction), floats are rounded
to 12 significant digits before encoding, CSV uses RFC-style minimal quoting.
Identical reports serialize to identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

from .errors import DomainError

FORMATS = ("json", "csv", "plain")


def _round_sig(x: float) -> float | None:
    if not math.isfinite(x):
        return None  # NaN/inf have no valid JSON encoding
    return float(f"{x:.12g}")


def round_floats(obj: Any) -> Any:
    """Recursively round every float to 12 significant digits.

    Non-finite values map to null so the JSON stays standard.
    """
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, complex):
        return {"re": _round_sig(obj.real), "im": _round_sig(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def to_json_bytes(report: Any) -> bytes:
    return (json.dumps(round_floats(report), indent=2, allow_nan=True) + "\n").encode()


def to_csv_bytes(header: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue().encode()


def to_plain_bytes(lines: list[str]) -> bytes:
    return ("\n".join(lines) + "\n").encode()


def serialize(report: Any, fmt: str, csv_header: list[str] | None = None, csv_rows: list[list] | None = None,
              plain_lines: list[str] | None = None) -> bytes:
    """Encode a report in the requested format.

    CSV needs explicit header/rows; plain needs prepared lines; both fall
    back to JSON when the structured form was not supplied.
    """
    if fmt not in FORMATS:
        raise DomainError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if fmt == "csv" and csv_rows is not None:
        return to_csv_bytes(csv_header or [], csv_rows)
    if fmt == "plain" and plain_lines is not None:
        return to_plain_bytes(plain_lines)
    return to_json_bytes(report)
