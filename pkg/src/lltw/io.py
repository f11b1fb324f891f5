"""Binary field files, CSV tables and JSON reports.

LLFW layout (little-endian)::

    offset  size  content
         0     4  magic b"LLFW"
         4     4  version (u32) = 1
         8     4  dim (u32) = 2
        12    16  nx, ny (u64)
        28    16  Lx, Ly (f64)
        44     8  c (f64)
        52     -  u1, u2, u3, each nx*ny f64 with index iy*nx + ix

All writes go to a temporary file in the target directory and are moved
into place, so readers never observe a partial file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import tempfile
import warnings
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .fields import Field
from .grid import Grid

MAGIC = b"LLFW"
VERSION = 1
HEADER = struct.Struct("<4sII2Q2dd")
NORM_WARN = 1e-8
NORM_FAIL = 1e-3


class FieldFormatError(ValueError):
    """Malformed or inconsistent LLFW data."""


class NormDriftWarning(UserWarning):
    pass


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def encode_field(f: Field) -> bytes:
    if f.grid.dim != 2:
        raise ValueError("LLFW stores 2D fields only")
    nx, ny = f.grid.n
    Lx, Ly = f.grid.length
    head = HEADER.pack(MAGIC, VERSION, 2, nx, ny, Lx, Ly, float(f.c))
    body = b"".join(np.asarray(a, dtype="<f8").ravel(order="F").tobytes() for a in f.components)
    return head + body


def decode_field(data: bytes) -> Field:
    if len(data) < HEADER.size:
        raise FieldFormatError(f"truncated header: {len(data)} bytes, need {HEADER.size}")
    magic, version, dim, nx, ny, Lx, Ly, c = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic at offset 0: expected {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"unsupported version {version} at offset 4 (expected {VERSION})")
    if dim != 2:
        raise FieldFormatError(f"unsupported dim {dim} at offset 8 (expected 2)")
    count = nx * ny
    expected = HEADER.size + 3 * 8 * count
    if len(data) != expected:
        kind = "truncated payload" if len(data) < expected else "trailing bytes after payload"
        raise FieldFormatError(f"{kind}: file has {len(data)} bytes, header implies {expected}")
    try:
        grid = Grid((int(nx), int(ny)), (float(Lx), float(Ly)))
    except Exception as exc:  # pragma: no cover - Grid has no validation of its own
        raise FieldFormatError(str(exc)) from exc
    if not (Lx > 0 and Ly > 0 and math.isfinite(Lx) and math.isfinite(Ly)):
        raise FieldFormatError(f"invalid box lengths ({Lx}, {Ly}) at offset 28")
    comps = []
    for i in range(3):
        start = HEADER.size + 8 * count * i
        a = np.frombuffer(data, dtype="<f8", count=count, offset=start)
        comps.append(a.reshape((nx, ny), order="F").astype(np.float64))
    f = Field(grid, float(c), *comps)
    drift = f.norm_defect()
    if not math.isfinite(drift) or drift > NORM_FAIL:
        raise FieldFormatError(f"|u| deviates from 1 by {drift:.3g} (limit {NORM_FAIL:g})")
    if drift > NORM_WARN:
        warnings.warn(f"|u| deviates from 1 by {drift:.3g}; renormalizing", NormDriftWarning, stacklevel=3)
        f = f.renormalized()
    return f


def write_field(f: Field, path: str | os.PathLike) -> None:
    atomic_write_bytes(path, encode_field(f))


def read_field(path: str | os.PathLike) -> Field:
    return decode_field(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# Text outputs


def format_number(x: Any) -> str:
    """17 significant digits for floats; integers and strings unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if not math.isfinite(x) else f"{float(x):.17g}"
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    atomic_write_text(path, csv_text(header, rows))


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def report_json(payload: dict[str, Any]) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_report(path: str | os.PathLike, payload: dict[str, Any]) -> None:
    atomic_write_text(path, report_json(payload))
