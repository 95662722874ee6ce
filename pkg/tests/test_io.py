import math
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kpsplit.errors import InvalidArgument
from kpsplit.io import (
    SNAPSHOT_MAGIC, Table, fmt, git_revision, read_csv, read_snapshot, snapshot_csv, write_snapshot,
)
from kpsplit.spectral import GridField2D


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips_floats(v):
    assert float(fmt(v)) == v


def test_fmt_special():
    assert fmt(3) == "3" and fmt(np.int64(4)) == "4" and fmt(True) == "1"
    assert fmt(math.nan) == "nan" and fmt(-math.inf) == "-inf"
    assert fmt(None) == "" and fmt("ok") == "ok"
    assert fmt(0.1) == "0.10000000000000001"


def test_table_csv_roundtrip(tmp_path):
    t = Table(["a", "b"], {"z": 1, "command": "x y"})
    t.add(a=1, b=0.5)
    t.extend([dict(a=2), dict(b=1e-300)])
    text = t.to_csv()
    assert text.splitlines()[0] == "# command: x y"
    meta, rows = read_csv(text)
    assert meta == {"command": "x y", "z": "1"}
    assert rows == [{"a": "1", "b": "0.5"}, {"a": "2", "b": ""}, {"a": "", "b": "1e-300"}]
    p = t.write(tmp_path / "sub" / "t.csv")
    assert read_csv(p) == (meta, rows)
    assert t.column("a") == [1, 2, None]


def test_table_validation_and_without():
    with pytest.raises(InvalidArgument):
        Table(["a", "a"])
    t = Table(["a", "b"])
    with pytest.raises(InvalidArgument):
        t.add(c=1)
    t.add(a=1, b=2)
    w = t.without("a")
    assert w.columns == ["b"] and w.rows == [[2]]
    assert t.without("zz") is t


def test_snapshot_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    u = GridField2D(rng.normal(size=(6, 10)), 2.5, 1.5)
    p = write_snapshot(u, tmp_path / "u.bin")
    data = p.read_bytes()
    assert data[:8] == SNAPSHOT_MAGIC
    assert struct.unpack_from("<qqdd", data, 8) == (6, 10, 2.5, 1.5)
    v = read_snapshot(p)
    assert np.array_equal(v.values, u.values) and (v.Lx, v.Ly) == (2.5, 1.5)


def test_snapshot_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"short")
    with pytest.raises(InvalidArgument):
        read_snapshot(p)
    p.write_bytes(b"NOTASNAP" + bytes(32))
    with pytest.raises(InvalidArgument):
        read_snapshot(p)
    u = GridField2D(np.zeros((2, 2)), 1.0, 1.0)
    write_snapshot(u, p)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(InvalidArgument):
        read_snapshot(p)


def test_snapshot_csv():
    u = GridField2D(np.arange(6.0).reshape(2, 3), 1.5, 1.0)
    t = snapshot_csv(u)
    assert t.columns == ["x", "y", "u"] and len(t.rows) == 6
    assert t.rows[4] == [-0.5, 0.0, 4.0]


def test_git_revision_is_text(tmp_path):
    assert git_revision(tmp_path) == "unknown"
    assert isinstance(git_revision(), str)
