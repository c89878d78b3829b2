"""Persistence layer: delimited output, canonical JSON, figures, manifests."""

import json
import math

import numpy as np
import pytest

from locword.errors import ParameterError
from locword.reporting import (
    RunManifest,
    config_hash,
    read_csv,
    save_line_plot,
    write_csv,
    write_json,
)


class TestCsv:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["n", "value", "ok"], [[1, 0.25, True], [2, -3.5, False]])
        header, rows = read_csv(p)
        assert header == ["n", "value", "ok"]
        assert rows == [["1", "0.25", "true"], ["2", "-3.5", "false"]]

    def test_crlf_line_endings(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["a"], [[1], [2]])
        raw = p.read_bytes()
        assert raw.count(b"\r\n") == 3
        assert b"\n" not in raw.replace(b"\r\n", b"")

    def test_float_cells_survive_round_trip_exactly(self, tmp_path):
        p = tmp_path / "t.csv"
        values = [0.1, 1.0 / 3.0, math.pi, 1e-300, -1.2345678901234567e17]
        write_csv(p, ["v"], [[v] for v in values])
        _, rows = read_csv(p)
        back = [float(r[0]) for r in rows]
        assert back == values

    def test_header_is_mandatory(self, tmp_path):
        with pytest.raises(ParameterError):
            write_csv(tmp_path / "t.csv", [], [[1]])

    def test_row_width_mismatch_rejected(self, tmp_path):
        with pytest.raises(ParameterError, match="width"):
            write_csv(tmp_path / "t.csv", ["a", "b"], [[1]])

    def test_numpy_scalars_formatted_as_plain_numbers(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["i", "x"], [[np.int64(7), np.float64(0.5)]])
        _, rows = read_csv(p)
        assert rows == [["7", "0.5"]]

    def test_reading_empty_file_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("")
        with pytest.raises(ParameterError):
            read_csv(p)


class TestJson:
    def test_keys_sorted_and_newline_terminated(self, tmp_path):
        p = tmp_path / "t.json"
        write_json(p, {"zebra": 1, "apple": 2})
        text = p.read_text()
        assert text.index('"apple"') < text.index('"zebra"')
        assert text.endswith("\n")

    def test_numpy_and_nan_payloads(self, tmp_path):
        p = tmp_path / "t.json"
        write_json(p, {"arr": np.arange(3), "bad": float("nan"), "inf": float("inf")})
        data = json.loads(p.read_text())
        assert data["arr"] == [0, 1, 2]
        assert data["bad"] == "nan"
        assert data["inf"] == "inf"

    def test_identical_payload_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        payload = {"x": [1.5, 2.5], "name": "run"}
        write_json(a, payload)
        write_json(b, dict(reversed(list(payload.items()))))
        assert a.read_bytes() == b.read_bytes()


class TestConfigHash:
    def test_key_order_irrelevant(self):
        assert config_hash({"a": 1, "b": 2.5}) == config_hash({"b": 2.5, "a": 1})

    def test_value_change_changes_hash(self):
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_stable_known_value(self):
        h = config_hash({"preset": "dimer:1", "sites": 100})
        assert h == config_hash({"sites": 100, "preset": "dimer:1"})
        assert len(h) == 64
        int(h, 16)


class TestFigures:
    def test_svg_rendering_is_byte_deterministic(self, tmp_path):
        x = np.arange(10)
        series = {"one": np.exp(-0.3 * x), "two": np.exp(-0.1 * x)}
        a = save_line_plot(tmp_path / "a.svg", x, series, xlabel="n",
                           ylabel="y", title="decay", logy=True)
        b = save_line_plot(tmp_path / "b.svg", x, series, xlabel="n",
                           ylabel="y", title="decay", logy=True)
        assert a.read_bytes() == b.read_bytes()

    def test_svg_contains_no_timestamp(self, tmp_path):
        p = save_line_plot(tmp_path / "a.svg", [0, 1], {"s": [1.0, 2.0]})
        text = p.read_text()
        assert "dc:date" not in text

    def test_output_is_svg(self, tmp_path):
        p = save_line_plot(tmp_path / "a.svg", [0, 1], {"s": [1.0, 2.0]})
        assert p.read_text(errors="ignore").lstrip().startswith("<?xml")


class TestManifest:
    def test_write_once(self, tmp_path):
        m = RunManifest(config_hash="abc", base_seed=1)
        m.mark_started()
        m.write(tmp_path)
        with pytest.raises(ParameterError):
            m.write(tmp_path)

    def test_outputs_recorded_sorted_and_deduplicated(self, tmp_path):
        m = RunManifest(config_hash="abc", base_seed=1)
        m.mark_started()
        m.record_output(tmp_path / "z.csv")
        m.record_output(tmp_path / "a.svg")
        m.record_output(tmp_path / "z.csv")
        p = m.write(tmp_path)
        data = json.loads(p.read_text())
        assert data["outputs"] == ["a.svg", "z.csv"]
        assert data["config_hash"] == "abc"
        assert data["base_seed"] == 1
        assert data["error"] is None
        assert data["started"] <= data["finished"]

    def test_error_recorded(self, tmp_path):
        m = RunManifest(config_hash="abc", base_seed=None)
        m.mark_started()
        m.record_error("ParameterError", "bad interval", 2)
        p = m.write(tmp_path)
        data = json.loads(p.read_text())
        assert data["error"] == {
            "kind": "ParameterError",
            "message": "bad interval",
            "exit_code": 2,
        }
