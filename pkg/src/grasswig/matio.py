"""Matrix JSON interchange.

Schema used by every CLI command::

    {"rows": R, "cols": C, "field": "real" | "complex",
     "data": [[re, im], ...]}

``data`` is row-major with exactly ``R*C`` entries.  In real mode every
imaginary part must be exactly 0.  Projections add ``"kind": "projection"``
and ``"rank"``, both validated on load.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import MatrixFormatError
from .linalg import COMPLEX, FIELDS, REAL, as_complex, is_exactly_real
from .tolerances import DEFAULT_TOL, ToleranceConfig


def detect_field(m: np.ndarray) -> str:
    return REAL if is_exactly_real(m) else COMPLEX


def matrix_to_obj(m, field: str | None = None) -> dict[str, Any]:
    """JSON-ready dict for a matrix.  ``field=None`` autodetects."""
    a = as_complex(m)
    if field is None:
        field = detect_field(a)
    if field not in FIELDS:
        raise MatrixFormatError(f"unknown field {field!r}")
    if field == REAL and not is_exactly_real(a):
        raise MatrixFormatError("matrix has nonzero imaginary parts but field is 'real'")
    flat = a.reshape(-1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "field": field,
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_obj(obj: Any) -> tuple[np.ndarray, str]:
    """Parse and validate the matrix schema.  Returns ``(matrix, field)``."""
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix JSON must be an object")
    try:
        rows, cols, field, data = obj["rows"], obj["cols"], obj["field"], obj["data"]
    except KeyError as exc:
        raise MatrixFormatError(f"matrix JSON missing key {exc}") from exc
    if (
        not (isinstance(rows, int) and isinstance(cols, int))
        or isinstance(rows, bool)
        or isinstance(cols, bool)
        or rows < 1
        or cols < 1
    ):
        raise MatrixFormatError(f"rows/cols must be positive integers, got {rows!r}, {cols!r}")
    if field not in FIELDS:
        raise MatrixFormatError(f"field must be one of {FIELDS}, got {field!r}")
    if not isinstance(data, list) or len(data) != rows * cols:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise MatrixFormatError(f"data must hold rows*cols = {rows * cols} entries, got {got}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, entry in enumerate(data):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise MatrixFormatError(f"data[{i}] must be a [re, im] pair of numbers")
        re, im = float(entry[0]), float(entry[1])
        if not (np.isfinite(re) and np.isfinite(im)):
            raise MatrixFormatError(f"data[{i}] is not finite")
        if field == REAL and im != 0.0:
            raise MatrixFormatError(f"data[{i}] has nonzero imaginary part {im!r} in real mode")
        out[i] = complex(re, im)
    return out.reshape(rows, cols), field


def save_matrix(path, m, field: str | None = None, extra: dict[str, Any] | None = None) -> None:
    obj = matrix_to_obj(m, field)
    if extra:
        obj.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_matrix(path) -> tuple[np.ndarray, str]:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}: not valid JSON ({exc})") from exc
    return matrix_from_obj(obj)


def projection_to_obj(p, field: str | None = None) -> dict[str, Any]:
    """Matrix schema plus the projection annotation."""
    obj = matrix_to_obj(p.matrix, field)
    obj["kind"] = "projection"
    obj["rank"] = int(p.rank)
    return obj


def save_projection(path, p, field: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(projection_to_obj(p, field), fh)
        fh.write("\n")


def projection_from_obj(obj: Any, tol: ToleranceConfig = DEFAULT_TOL):
    """Parse a ``kind: projection`` object, validating invariants and rank."""
    from .projections import Projection  # deferred to avoid an import cycle

    m, field = matrix_from_obj(obj)
    if obj.get("kind") != "projection":
        raise MatrixFormatError("expected \"kind\": \"projection\"")
    declared = obj.get("rank")
    if not isinstance(declared, int) or isinstance(declared, bool) or declared < 0:
        raise MatrixFormatError(f"projection rank must be a nonnegative integer, got {declared!r}")
    p = Projection(m, tol=tol)
    if p.rank != declared:
        raise MatrixFormatError(f"declared rank {declared} but trace gives {p.rank}")
    return p, field


def load_projection(path, tol: ToleranceConfig = DEFAULT_TOL):
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}: not valid JSON ({exc})") from exc
    return projection_from_obj(obj, tol)


def canonical_key(m) -> bytes:
    """Canonical byte serialization: entries rounded to 12 decimal digits.

    The rounding (and the +0.0, which folds -0.0 into +0.0) makes the key
    robust to non-associative float noise introduced by callers, so caches
    and lookup tables match inputs that are equal for all practical purposes.
    """
    a = as_complex(m)
    rounded = np.round(a, 12) + 0.0
    return a.shape[0].to_bytes(4, "little") + a.shape[1].to_bytes(4, "little") + rounded.tobytes()
