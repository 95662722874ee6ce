"""CSV tables and field snapshots."""

from __future__ import annotations

import csv
import io
import math
import struct
import subprocess
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidArgument
from .spectral import GridField2D

SNAPSHOT_MAGIC = b"KPSNAP01"
_HEADER = struct.Struct("<8sqqdd")


def fmt(v) -> str:
    """17 significant digits for floats; integers and strings verbatim."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return "" if v is None else str(v)


def git_revision(cwd: str | Path | None = None) -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], cwd=cwd, capture_output=True,
                             text=True, timeout=5, check=False)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    rev = out.stdout.strip()
    return rev if out.returncode == 0 and rev else "unknown"


class Table:
    """Rows with a fixed header, rendered as CSV with ``#`` metadata lines."""

    def __init__(self, columns: Sequence[str], meta: Mapping[str, object] | None = None):
        if len(set(columns)) != len(columns):
            raise InvalidArgument("duplicate column names")
        self.columns = list(columns)
        self.meta = dict(meta or {})
        self.rows: list[list] = []

    def add(self, **values) -> None:
        unknown = set(values) - set(self.columns)
        if unknown:
            raise InvalidArgument(f"unknown columns {sorted(unknown)}")
        self.rows.append([values.get(c) for c in self.columns])

    def extend(self, rows: Iterable[Mapping[str, object]]) -> None:
        for r in rows:
            self.add(**r)

    def without(self, name: str) -> "Table":
        """Copy without column ``name`` (a no-op if it is absent)."""
        if name not in self.columns:
            return self
        i = self.columns.index(name)
        t = Table(self.columns[:i] + self.columns[i + 1:], self.meta)
        t.rows = [r[:i] + r[i + 1:] for r in self.rows]
        return t

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k in sorted(self.meta):
            buf.write(f"# {k}: {self.meta[k]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


def read_csv(text_or_path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a table written by :class:`Table`; returns ``(meta, rows)``."""
    p = Path(text_or_path) if not isinstance(text_or_path, str) or "\n" not in text_or_path else None
    text = p.read_text() if p is not None else text_or_path
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(":")
            meta[key.strip()] = val.strip()
        elif line:
            body.append(line)
    rows = list(csv.DictReader(body))
    return meta, rows


def write_snapshot(u: GridField2D, path: str | Path) -> Path:
    """Binary dump: magic, ``n_y``, ``n_x``, ``Lx``, ``Ly`` then float64 values, row-major."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ny, nx = u.values.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, ny, nx, float(u.Lx), float(u.Ly)))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())
    return path


def read_snapshot(path: str | Path) -> GridField2D:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise InvalidArgument("snapshot file is truncated")
    magic, ny, nx, Lx, Ly = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise InvalidArgument("not a snapshot file")
    if ny < 1 or nx < 1 or len(data) != _HEADER.size + 8 * ny * nx:
        raise InvalidArgument("snapshot size does not match its header")
    vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(ny, nx).astype(float)
    return GridField2D(vals, Lx, Ly)


def snapshot_csv(u: GridField2D) -> Table:
    """``x,y,u`` table of a field."""
    t = Table(["x", "y", "u"])
    X, Y = np.meshgrid(u.x, u.y)
    for x, y, v in zip(X.ravel(), Y.ravel(), u.values.ravel()):
        t.rows.append([float(x), float(y), float(v)])
    return t
