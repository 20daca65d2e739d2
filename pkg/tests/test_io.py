"""Matrix file formats, MMSet ingestion, and run records."""

import json

import numpy as np
import pytest

from anchorot.errors import NonSquareError, ParseError
from anchorot.io import MAGIC, load_matrix, load_mmset, run_record, save_matrix


class TestMatrixFormats:
    def test_binary_round_trip_bit_exact(self, tmp_path, rng):
        M = rng.random((7, 5))
        path = tmp_path / "m.aem"
        save_matrix(path, M, fmt="binary")
        got = load_matrix(path)
        assert got.tobytes() == M.tobytes()

    def test_csv_round_trip(self, tmp_path, rng):
        M = rng.random((6, 6)) * 1e3
        path = tmp_path / "m.csv"
        save_matrix(path, M, fmt="csv")
        got = load_matrix(path)
        assert np.all(np.abs(got - M) <= 1e-15 * np.abs(M))

    def test_binary_layout(self, tmp_path):
        M = np.array([[1.0, 2.0]])
        path = tmp_path / "m.aem"
        save_matrix(path, M, fmt="binary")
        raw = path.read_bytes()
        assert raw[:4] == MAGIC
        assert len(raw) == 16 + 4 + 8 * 2
        assert int.from_bytes(raw[4:12], "little") == 1
        assert int.from_bytes(raw[12:20], "little") == 2

    def test_truncated_binary_rejected(self, tmp_path):
        path = tmp_path / "m.aem"
        path.write_bytes(MAGIC + b"\x01\x00")
        with pytest.raises(ParseError):
            load_matrix(path)

    def test_ragged_csv_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,1\n1\n")
        with pytest.raises(ParseError) as err:
            load_matrix(path)
        assert err.value.location == 2

    def test_bad_token_reported_with_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,1\n1,zebra\n")
        with pytest.raises(ParseError) as err:
            load_matrix(path)
        assert err.value.location == 2

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            save_matrix(tmp_path / "m", np.eye(2), fmt="parquet")


class TestLoadMMSet:
    def test_csv_uniform(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("0,1\n1,0\n")
        S = load_mmset(path)
        assert np.allclose(S.weights, 0.5)

    def test_non_square_rejected(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("0,1,2\n1,0,1\n")
        with pytest.raises(NonSquareError):
            load_mmset(path)

    def test_rank_flag_scale_invariant(self, tmp_path, rng):
        C = rng.random((4, 4))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        save_matrix(p1, C)
        save_matrix(p2, 3.0 * C)
        S1 = load_mmset(p1, rank=True)
        S2 = load_mmset(p2, rank=True)
        assert np.array_equal(S1.costs, S2.costs)

    def test_explicit_weights(self, tmp_path):
        cpath, wpath = tmp_path / "c.csv", tmp_path / "w.csv"
        cpath.write_text("0,1\n1,0\n")
        wpath.write_text("0.75\n0.25\n")
        S = load_mmset(cpath, wpath)
        assert np.array_equal(S.weights, [0.75, 0.25])


class TestRunRecord:
    def test_parseable_with_schema_version(self):
        line = run_record("dist", {"metric": "ae"}, 0.5, {"distance": 1.0})
        record = json.loads(line)
        assert record["schema_version"] == 1
        assert record["command"] == "dist"
        assert record["results"]["distance"] == 1.0
