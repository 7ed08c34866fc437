import json

import numpy as np
import pytest

import torusnls.cli as cli
from torusnls.cli import run_cli
from torusnls.harness import CSV_COLUMNS, OracleCheckResult


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestOracleCheckCommand:
    def test_passes(self, capsys):
        code = run_cli(["oracle-check", "--n-modes", "8", "--trials", "20", "--seed", "1"])
        assert code == 0
        assert capsys.readouterr().out.startswith("PASS")

    def test_failure_exits_one(self, capsys, monkeypatch):
        def fake(n_modes, trials, seed):
            return OracleCheckResult(n_modes, trials, 1e-3, 1e-10, False)

        monkeypatch.setattr(cli, "oracle_check", fake)
        code = run_cli(["oracle-check", "--n-modes", "8"])
        assert code == 1
        assert capsys.readouterr().out.startswith("FAIL")

    def test_oversized_request_is_config_error(self, capsys):
        code = run_cli(["oracle-check", "--n-modes", "64", "--trials", "1"])
        assert code == 2


class TestUsageErrors:
    def test_missing_gamma_exits_two(self, capsys):
        code = run_cli(["converge-time", "--n-modes", "8"])
        assert code == 2
        err = capsys.readouterr().err
        assert "usage" in err and "--gamma" in err

    def test_unknown_flag_exits_two(self, capsys):
        code = run_cli(["converge-time", "--gamma", "1.0", "--frobnicate"])
        assert code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_command_exits_two(self):
        assert run_cli(["transmogrify"]) == 2

    def test_bad_reference_exits_two(self, capsys):
        code = run_cli(
            ["converge-time", "--gamma", "1.0", "--n-modes", "8", "--tau", "2^-4,2^-5",
             "--t-final", "0.5", "--seeds", "1", "--reference", "exact"]
        )
        assert code == 2


class TestConvergeTime:
    ARGS = [
        "converge-time",
        "--gamma", "1.0",
        "--n-modes", "8",
        "--tau", "2^-4,2^-5",
        "--t-final", "0.5",
        "--seeds", "1",
        "--reference", "plane-wave",
    ]

    def test_writes_csv_and_json_mirror(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = run_cli(self.ARGS + ["--output", str(out)])
        assert code == 0
        header, rows = read_csv(out)
        assert header == list(CSV_COLUMNS)
        # one row per (tau, seed) plus one aggregate per tau
        assert len(rows) == 2 * (1 + 1)
        assert {r["seed"] for r in rows} == {"1", "geomean"}
        mirror = json.loads(out.with_suffix(".json").read_text())
        assert len(mirror["report"]["reports"]) == 1

    def test_multi_gamma_groups(self, tmp_path):
        args = list(self.ARGS)
        args[2] = "0.8,1.0"
        out = tmp_path / "multi.csv"
        assert run_cli(args + ["--output", str(out)]) == 0
        _, rows = read_csv(out)
        assert {r["gamma"] for r in rows} == {"0.8", "1.0"}
        mirror = json.loads(out.with_suffix(".json").read_text())
        assert [g["gamma"] for g in mirror["report"]["reports"]] == [0.8, 1.0]

    def test_json_only_format(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli(self.ARGS + ["--output", str(out), "--format", "json"]) == 0
        payload = json.loads(out.read_text())
        assert payload["report"]["reports"][0]["kind"] == "temporal-sweep"
        assert not out.with_suffix(".csv").exists()

    def test_summary_to_stdout_without_output(self, capsys):
        assert run_cli(self.ARGS) == 0
        out = capsys.readouterr().out
        assert "fitted slope" in out


class TestConvergeSpace:
    def test_small_sweep(self, tmp_path):
        out = tmp_path / "s.csv"
        code = run_cli(
            ["converge-space", "--gamma", "0.8", "--n-modes", "8,16",
             "--tau", "2^-7", "--t-final", "0.25", "--seeds", "1",
             "--output", str(out)]
        )
        assert code == 0
        _, rows = read_csv(out)
        assert {r["n_modes"] for r in rows} == {"8", "16"}
        assert all(r["kind"] == "spatial-sweep" for r in rows)


class TestConfigFile:
    def test_file_supplies_flags_cli_overrides(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "# tiny experiment\n"
            "gamma = 1.0\n"
            "n-modes = 8\n"
            "tau = 2^-4,2^-5\n"
            "t-final = 0.5\n"
            "seeds = 1\n"
            "reference = plane-wave\n"
        )
        out = tmp_path / "c.csv"
        code = run_cli(
            ["converge-time", "--config", str(cfg), "--gamma", "0.8",
             "--output", str(out)]
        )
        assert code == 0
        _, rows = read_csv(out)
        assert {r["gamma"] for r in rows} == {"0.8"}  # CLI wins
        assert {r["t_final"] for r in rows} == {"0.5"}  # file used

    def test_malformed_file_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("gamma 1.0\n")
        assert run_cli(["converge-time", "--config", str(cfg)]) == 2


class TestRunCommand:
    def test_observation_csv(self, tmp_path):
        out = tmp_path / "obs.csv"
        code = run_cli(
            ["run", "--gamma", "1.0", "--tau", "2^-4", "--n-modes", "8",
             "--t-final", "0.25", "--seed", "3", "--output", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "step,time,mass,sobolev_norm"
        assert len(lines) == 1 + 4  # T / tau = 4 steps
        first = lines[1].split(",")
        assert first[0] == "1"
        assert float(first[2]) > 0

    def test_stdout_summary(self, capsys):
        code = run_cli(
            ["run", "--gamma", "1.0", "--tau", "2^-4", "--n-modes", "8",
             "--t-final", "0.25"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "final mass" in out

    def test_baseline_flag(self, capsys):
        code = run_cli(
            ["run", "--gamma", "1.0", "--tau", "2^-4", "--n-modes", "8",
             "--t-final", "0.25", "--baseline", "lie"]
        )
        assert code == 0


class TestDumpInitial:
    def test_json_payload(self, tmp_path):
        out = tmp_path / "u0.json"
        code = run_cli(
            ["dump-initial", "--gamma", "0.8", "--seed", "5", "--k-max", "16",
             "--output", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["gamma"] == 0.8 and payload["seed"] == 5
        assert payload["k_max"] == 16
        assert len(payload["modes"]) == 33
        ks = [m[0] for m in payload["modes"]]
        assert ks == sorted(ks)

    def test_round_trips_into_field(self, tmp_path):
        from torusnls import from_triples, random_low_reg, RegularityParams

        out = tmp_path / "u0.json"
        run_cli(["dump-initial", "--gamma", "0.8", "--seed", "5", "--k-max", "16",
                 "--output", str(out)])
        payload = json.loads(out.read_text())
        field = from_triples(payload["modes"])
        want = random_low_reg(RegularityParams(0.8, 5, 16))
        np.testing.assert_allclose(field.coeffs, want.coeffs, rtol=0, atol=1e-16)


def test_dyadic_notation():
    assert cli._number("2^-6") == 2.0**-6
    assert cli._number("2^10") == 1024.0
    assert cli._number("0.125") == 0.125
    assert cli._int_list("2^4,32") == (16, 32)
