import json
import struct
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lltw.fields import Field, trivial_field
from lltw.grid import make_grid
from lltw.io import (
    HEADER,
    FieldFormatError,
    NormDriftWarning,
    csv_text,
    decode_field,
    encode_field,
    format_number,
    read_csv,
    read_field,
    report_json,
    write_csv,
    write_field,
    write_report,
)
from lltw.solver2d import initial_guess


def sample_field(nx=10, ny=8, seed=0) -> Field:
    g = make_grid(2, (nx, ny), (3.0, 2.5))
    rng = np.random.default_rng(seed)
    return Field(g, 0.37, *rng.normal(size=(3, nx, ny))).renormalized()


class TestLayout:
    def test_header_size(self):
        assert HEADER.size == 4 + 4 + 4 + 16 + 16 + 8

    def test_layout(self):
        f = sample_field()
        data = encode_field(f)
        assert len(data) == 52 + 3 * 8 * 80
        magic, ver, dim, nx, ny, lx, ly, c = struct.unpack_from("<4sII2Q2dd", data)
        assert (magic, ver, dim, nx, ny, lx, ly, c) == (b"LLFW", 1, 2, 10, 8, 3.0, 2.5, 0.37)
        # index iy * nx + ix
        u1 = np.frombuffer(data, "<f8", 80, 52)
        assert u1[1 * 10 + 2] == f.u1[2, 1]
        u3 = np.frombuffer(data, "<f8", 80, 52 + 2 * 8 * 80)
        assert u3[7 * 10 + 9] == f.u3[9, 7]

    def test_rejects_1d(self):
        g = make_grid(1, 8, 1.0)
        with pytest.raises(ValueError):
            encode_field(Field(g, 0.5, np.ones(8), np.zeros(8), np.zeros(8)))


class TestRoundTrip:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(4, 12).map(lambda m: 2 * m), st.integers(4, 12).map(lambda m: 2 * m), st.integers(0, 10**6))
    def test_bit_identical(self, nx, ny, seed):
        f = sample_field(nx, ny, seed)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            back = decode_field(encode_field(f))
        for a, b in zip(f.components, back.components):
            assert a.tobytes() == b.tobytes()
        assert back.c == f.c and back.grid == f.grid

    def test_file(self, tmp_path):
        f = initial_guess(0.8, make_grid(2, 32, 20.0), "bump", 0.3).to_field()
        p = tmp_path / "f.llfw"
        write_field(f, p)
        back = read_field(p)
        assert all(np.array_equal(a, b) for a, b in zip(f.components, back.components))
        assert p.read_bytes() == encode_field(back)
        assert [x.name for x in tmp_path.iterdir()] == ["f.llfw"]


class TestCorruption:
    def test_bad_magic(self):
        data = bytearray(encode_field(sample_field()))
        data[0:4] = b"LLFX"
        with pytest.raises(FieldFormatError, match="offset 0"):
            decode_field(bytes(data))

    def test_bad_version(self):
        data = bytearray(encode_field(sample_field()))
        struct.pack_into("<I", data, 4, 2)
        with pytest.raises(FieldFormatError, match="offset 4"):
            decode_field(bytes(data))

    def test_bad_dim(self):
        data = bytearray(encode_field(sample_field()))
        struct.pack_into("<I", data, 8, 3)
        with pytest.raises(FieldFormatError, match="offset 8"):
            decode_field(bytes(data))

    def test_bad_length(self):
        data = bytearray(encode_field(sample_field()))
        struct.pack_into("<d", data, 28, -1.0)
        with pytest.raises(FieldFormatError, match="offset 28"):
            decode_field(bytes(data))

    def test_truncated(self):
        data = encode_field(sample_field())
        with pytest.raises(FieldFormatError, match="truncated payload"):
            decode_field(data[:-8])
        with pytest.raises(FieldFormatError, match="truncated header"):
            decode_field(data[:20])

    def test_trailing(self):
        with pytest.raises(FieldFormatError, match="trailing"):
            decode_field(encode_field(sample_field()) + b"\0")

    def test_size_mismatch_from_header(self):
        data = bytearray(encode_field(sample_field()))
        struct.pack_into("<Q", data, 12, 7)
        with pytest.raises(FieldFormatError):
            decode_field(bytes(data))


class TestNormPolicy:
    def _drifted(self, eps):
        f = sample_field()
        return encode_field(Field(f.grid, f.c, f.u1 * (1 + eps), f.u2 * (1 + eps), f.u3 * (1 + eps)))

    def test_small_drift_warns(self):
        with pytest.warns(NormDriftWarning):
            back = decode_field(self._drifted(1e-9 * 5))
        assert back.norm_defect() <= 1e-14

    def test_tiny_drift_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            decode_field(self._drifted(1e-12))

    def test_large_drift_fails(self):
        with pytest.raises(FieldFormatError, match="deviates"):
            decode_field(self._drifted(1e-2))

    def test_nonfinite_fails(self):
        f = sample_field()
        u1 = f.u1.copy()
        u1[0, 0] = np.nan
        with pytest.raises(FieldFormatError):
            decode_field(encode_field(Field(f.grid, f.c, u1, f.u2, f.u3)))


class TestText:
    def test_format_number(self):
        assert format_number(0.1) == "0.10000000000000001"
        assert float(format_number(1 / 3)) == 1 / 3
        assert format_number(3) == "3" and format_number(True) == "1"
        assert format_number(float("nan")) == "nan"
        assert format_number("x") == "x"

    @settings(max_examples=100)
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert float(format_number(x)) == x

    def test_csv_deterministic(self, tmp_path):
        rows = [[0.1, 2, "a"], [np.float64(1e-300), np.int64(-4), "b"]]
        write_csv(tmp_path / "a.csv", ["x", "n", "s"], rows)
        write_csv(tmp_path / "b.csv", ["x", "n", "s"], rows)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        header, body = read_csv(tmp_path / "a.csv")
        assert header == ["x", "n", "s"] and float(body[1][0]) == 1e-300
        assert csv_text(["x"], [[1.5]]) == "x\n1.5\n"

    def test_report_round_trip(self, tmp_path):
        payload = {"b": np.float64(1 / 3), "a": [np.int64(2), (0.1, None)], "z": {"flag": np.bool_(True)}, "w": np.inf}
        write_report(tmp_path / "r.json", payload)
        back = json.loads((tmp_path / "r.json").read_text())
        assert back["b"] == 1 / 3 and back["a"] == [2, [0.1, None]] and back["z"]["flag"] is True
        assert back["w"] == "inf"
        assert report_json(payload) == report_json(payload)
        assert list(back) == sorted(back)

    def test_trivial_file(self, tmp_path):
        f = trivial_field(make_grid(2, 8, 1.0), 0.5)
        write_field(f, tmp_path / "t.llfw")
        assert read_field(tmp_path / "t.llfw").norm_defect() == 0
