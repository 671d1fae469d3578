"""End-to-end checks of the command line entry point.

Uses the closed-form filling scenario because it is the cheapest runner;
the contract under test (argument handling, output files, exit codes,
bit-for-bit reproducibility) is scenario independent.
"""

import csv
import json

import pytest

from visualmetrics.cli import main

FAST_CFG = """\
[domain]
name = ball
params = 2, 1.0

[sampling]
vertices = 1500

[run]
seed = 7

[filling]
tuples = 5
tolerance = 1e-6
delta_sample = 30
"""


@pytest.fixture()
def cfg_path(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CFG)
    return path


class TestOutputs:
    def test_exit_zero_and_files_written(self, cfg_path, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["filling-generic", "--config", str(cfg_path), "--out", str(out)]
        )
        assert code == 0
        csv_path = out / "filling-generic.csv"
        json_path = out / "filling-generic.json"
        assert csv_path.exists() and json_path.exists()

        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header == ["scenario", "params", "measured", "target", "tol",
                          "pass"]
        assert rows and all(len(r) == 6 for r in rows)
        assert all(r[0] == "filling-generic" for r in rows)

        payload = json.loads(json_path.read_text())
        assert payload["scenario"] == "filling-generic"
        assert payload["all_pass"] is True
        assert "tuples = 5" in payload["config"]
        assert payload["module_hashes"]

    def test_rerun_is_bit_identical(self, cfg_path, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        args = ["filling-generic", "--config", str(cfg_path)]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        first = (out_a / "filling-generic.csv").read_bytes()
        second = (out_b / "filling-generic.csv").read_bytes()
        assert first == second


class TestExitCodes:
    def test_unsatisfiable_bound_exits_one(self, cfg_path, tmp_path):
        strict = tmp_path / "strict.cfg"
        strict.write_text(FAST_CFG + "delta_cap = -1.0\n")
        code = main(
            ["filling-generic", "--config", str(strict),
             "--out", str(tmp_path / "strict_out")]
        )
        assert code == 1

    def test_unknown_scenario_is_rejected(self, cfg_path):
        with pytest.raises(SystemExit):
            main(["no-such-scenario", "--config", str(cfg_path)])

    def test_seed_flag_overrides_config(self, cfg_path, tmp_path):
        out_a = tmp_path / "sa"
        out_b = tmp_path / "sb"
        base = ["filling-generic", "--config", str(cfg_path)]
        main(base + ["--out", str(out_a), "--seed", "1"])
        main(base + ["--out", str(out_b), "--seed", "2"])
        first = (out_a / "filling-generic.csv").read_text()
        second = (out_b / "filling-generic.csv").read_text()
        assert first != second
