import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, Mapping
import numpy as np
import pandas as pd
from ..errors import OmegaMapError, ValidationError
from ..model import MatrixGrid

FLOAT_FORMAT = "%.17g"


def _columns(prefix: str, n: int) -> list:
    return [f"{prefix}_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]


def grid_frame(grids: Mapping[str, MatrixGrid] | MatrixGrid) -> pd.DataFrame:
    """
    Wide table of one or more grids on shared nodes: an `x` column and, per grid, the matrix
    entries in row-major order. A single grid uses the prefix `m`.

    Args:
        grids (Mapping[str, MatrixGrid] | MatrixGrid): Grids keyed by column prefix.

    Returns:
        pd.DataFrame: The table.
    """
    if isinstance(grids, MatrixGrid):
        grids = {"m": grids}
    items = list(grids.items())
    if not items:
        raise ValidationError("nothing to emit", code="empty_output")
    first = items[0][1]
    frame = {"x": first.xs}
    for prefix, grid in items:
        if len(grid) != len(first) or grid.x0 != first.x0 or grid.h != first.h:
            raise ValidationError(f"grid '{prefix}' does not share the nodes of '{items[0][0]}'")
        n = grid.n_states
        flat = grid.values.reshape(len(grid), n * n)
        frame.update(dict(zip(_columns(prefix, n), flat.T)))
    return pd.DataFrame(frame)


def write_atomic(sink: str | Path | None, text: str) -> None:
    """Write text to a file through a temporary file and a rename, or to stdout for None/'-'."""
    if sink is None or str(sink) == "-":
        sys.stdout.write(text)
        return
    target = Path(sink)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def emit_matrix_grid(grids: Mapping[str, MatrixGrid] | MatrixGrid, sink: str | Path | None = None) -> None:
    """
    Emit grids as CSV with header `x,m_1_1,...,m_N_N`, 17 significant digits and LF line endings.

    Args:
        grids (Mapping[str, MatrixGrid] | MatrixGrid): A grid, or grids keyed by column prefix.
        sink (str | Path | None): Output path; None or "-" writes to stdout.
    """
    emit_frame(grid_frame(grids), sink)


def emit_frame(frame: pd.DataFrame, sink: str | Path | None = None) -> None:
    """
    Write a table as CSV with 17 significant digits and LF line endings.

    Args:
        frame (pd.DataFrame): The table; the index is dropped.
        sink (str | Path | None): Output path; None or "-" writes to stdout.
    """
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    write_atomic(sink, buffer.getvalue())


def read_matrix_grid(source: str | Path | io.StringIO, prefix: str = "m") -> MatrixGrid:
    """
    Parse a CSV written by `emit_matrix_grid` back into a grid.

    Args:
        source (str | Path | io.StringIO): CSV file or buffer.
        prefix (str): Column prefix of the grid to read. Defaults to "m".

    Returns:
        MatrixGrid: The grid; values round-trip exactly.
    """
    frame = pd.read_csv(source, float_precision="round_trip")
    cols = [c for c in frame.columns if c.startswith(f"{prefix}_")]
    n = int(round(np.sqrt(len(cols))))
    if n * n != len(cols) or n == 0:
        raise ValidationError(f"CSV has {len(cols)} '{prefix}' columns, not a square matrix", code="invalid_csv")
    xs = frame["x"].to_numpy()
    h = (xs[-1] - xs[0]) / (len(xs) - 1) if len(xs) > 1 else 1.0
    values = frame[_columns(prefix, n)].to_numpy().reshape(len(xs), n, n)
    return MatrixGrid(float(xs[0]), float(h), values)


def _jsonable(value: Any) -> Any:
    """
    Plain JSON data for a document holding numpy arrays and scalars. Non-finite floats become the
    strings "nan", "inf" and "-inf", since strict JSON has no literal for them.

    Args:
        value (Any): Mapping, sequence, array or scalar.

    Returns:
        Any: Nested dicts, lists, str, int, float, bool and None only.
    """
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return _jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    raise TypeError(f"cannot serialise {type(value).__name__}")


def emit_json(doc: Dict[str, Any], sink: str | Path | None = None) -> None:
    """
    Write a document as indented strict JSON.

    Args:
        doc (Dict[str, Any]): The document; numpy values are converted.
        sink (str | Path | None): Output path; None or "-" writes to stdout.
    """
    write_atomic(sink, json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n")


def error_json(err: OmegaMapError) -> str:
    return json.dumps(_jsonable(err.to_dict()), allow_nan=False)
