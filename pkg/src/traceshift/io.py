"""Deterministic file formats: canonical JSON and headered CSV.

Every artifact declares a schema version and formats floats with 17
significant digits, so identical inputs produce byte-identical files on
every platform. The shared matrix format is a JSON object with integer
"rows"/"cols" and row-major nested "re"/"im" arrays.
"""

import json

import numpy as np

from .spectra import ValidationError, as_complex_matrix

MATRIX_SCHEMA = "traceshift/matrix/v1"
ERROR_SCHEMA = "traceshift/error/v1"


def format_float(x):
    """17-significant-digit fixed exponential form (canonical across runs)."""
    x = float(x)
    if not np.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite value {x}")
    return "%.16e" % x


def canonical_json(obj):
    """Serialize with canonical float formatting; keys keep insertion order."""
    return _canon(obj) + "\n"


def _canon(obj):
    if isinstance(obj, dict):
        items = ",".join(f"{json.dumps(str(k))}: {_canon(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)) or (isinstance(obj, np.ndarray) and obj.ndim >= 1):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if bool(obj) else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if obj is None or isinstance(obj, str):
        return json.dumps(obj)
    raise ValidationError(f"cannot serialize object of type {type(obj).__name__}")


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(canonical_json(obj))


def write_csv(path, kind, columns, rows):
    """CSV with a `# schema=` header line; floats canonically formatted."""
    lines = [f"# schema=traceshift/{kind}/v1", ",".join(columns)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (bool, np.bool_)):
                cells.append("true" if bool(cell) else "false")
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            elif isinstance(cell, (float, np.floating)):
                cells.append(format_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def matrix_to_json_obj(m):
    m = as_complex_matrix(m, "matrix")
    return {
        "schema": MATRIX_SCHEMA,
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [[float(v) for v in row] for row in m.real],
        "im": [[float(v) for v in row] for row in m.imag],
    }


def write_matrix_json(path, m):
    write_json(path, matrix_to_json_obj(m))


def read_matrix_json(path):
    try:
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read matrix file ({exc})") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: matrix file must hold a JSON object")
    for key in ("rows", "cols", "re", "im"):
        if key not in obj:
            raise ValidationError(f"{path}: matrix object is missing field '{key}'")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows >= 1 and cols >= 1):
        raise ValidationError(f"{path}: rows/cols must be positive integers")
    try:
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: re/im entries must be numbers") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ValidationError(
            f"{path}: re/im arrays must both have shape ({rows}, {cols}), "
            f"got {re.shape} and {im.shape}"
        )
    return re + 1j * im


def error_report_json(exc):
    return canonical_json(
        {"schema": ERROR_SCHEMA, "error": type(exc).__name__, "message": str(exc)}
    )
