import json

import pytest

from visualmetrics.config import load_config, parse_config
from visualmetrics.evidence import (
    EvidenceRow,
    module_hashes,
    params_string,
    write_csv,
    write_summary,
)


class TestEvidenceRow:
    def test_absolute_kind(self):
        assert EvidenceRow("s", {}, 1.0005, 1.0, 1e-3).passed
        assert not EvidenceRow("s", {}, 1.01, 1.0, 1e-3).passed

    def test_bound_kind(self):
        assert EvidenceRow("s", {}, 0.9, 1.0, 0.0, kind="bound").passed
        assert EvidenceRow("s", {}, 1.0, 1.0, 0.0, kind="bound").passed
        assert not EvidenceRow("s", {}, 1.1, 1.0, 0.0, kind="bound").passed

    def test_floor_kind(self):
        assert EvidenceRow("s", {}, 1.1, 1.0, 0.0, kind="floor").passed
        assert not EvidenceRow("s", {}, 0.9, 1.0, 0.0, kind="floor").passed

    def test_pass_flag_recomputable_from_fields(self):
        # self-contained evidence: the flag is a pure function of the row
        row = EvidenceRow("s", {"check": "x"}, 0.4, 0.5, 0.0, kind="bound")
        recomputed = row.measured <= row.target + row.tol
        assert row.passed == recomputed


class TestCsvContract:
    def test_header_and_columns(self, tmp_path):
        rows = [
            EvidenceRow("demo", {"check": "a", "r": 0.5}, 1.0, 1.0, 1e-6),
            EvidenceRow("demo", {"check": "b"}, 0.9, 1.0, 0.0, kind="bound"),
        ]
        path = tmp_path / "demo.csv"
        write_csv(path, rows)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "scenario,params,measured,target,tol,pass"
        assert all(len(line.split(",")) == 6 for line in lines[1:])

    def test_non_default_kind_is_echoed_in_params(self, tmp_path):
        rows = [EvidenceRow("demo", {"check": "b"}, 0.9, 1.0, 0.0, kind="bound")]
        path = tmp_path / "demo.csv"
        write_csv(path, rows)
        assert "kind=bound" in path.read_text()

    def test_summary_echoes_config_and_hashes(self, tmp_path):
        rows = [EvidenceRow("demo", {}, 1.0, 1.0, 1e-9)]
        cfg_text = "[run]\nseed = 5\n"
        cfg = parse_config(cfg_text)
        path = tmp_path / "demo.json"
        write_summary(path, "demo", rows, cfg, seed=5)
        payload = json.loads(path.read_text())
        assert payload["scenario"] == "demo"
        assert payload["config"] == cfg_text
        assert payload["module_hashes"] == module_hashes()
        assert payload["passed"] == 1
        assert payload["all_pass"] is True


class TestConfig:
    def test_sections_prefix_keys(self):
        cfg = parse_config("[domain]\nname = ball\n[sampling]\nvertices = 100\n")
        assert cfg.get("domain.name") == "ball"
        assert cfg.get("sampling.vertices") == 100

    def test_lists_and_scalars(self):
        cfg = parse_config("[a]\nxs = 1, 2.5, 3\ny = 0.25\n")
        assert cfg.list("a.xs") == [1, 2.5, 3]
        assert cfg.get("a.y") == 0.25

    def test_defaults_and_override(self):
        cfg = parse_config("[a]\nx = 1\n")
        assert cfg.get("a.missing", 7) == 7
        cfg.override("a.x", 2)
        assert cfg.get("a.x") == 2

    def test_load_round_trip(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("[run]\nseed = 9\n")
        cfg = load_config(path)
        assert cfg.get("run.seed") == 9

    def test_params_string_is_stable(self):
        assert params_string({"a": 1, "b": 0.5}) == "a=1;b=0.5"
