import json

import pytest

from oamrs import cli, fp, harness


def write_config(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


FAST_FP = {"max_outer_iterations": 25}


class TestRun:
    def test_prints_report(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "scenario": {"case_id": 1},
            "fp": FAST_FP,
        })
        assert cli.main(["run", "--config", config]) == 0
        out = capsys.readouterr().out
        assert "sum_capacity_bps_hz:" in out
        assert "scheme: rs" in out
        assert "seed: 0" in out

    def test_scheme_flag(self, tmp_path, capsys):
        config = write_config(tmp_path, {"scenario": {"case_id": 1}})
        assert cli.main(["run", "--config", config, "--scheme", "tdma"]) == 0
        assert "scheme: tdma" in capsys.readouterr().out

    def test_out_file(self, tmp_path):
        config = write_config(tmp_path, {"scenario": {"case_id": 1}})
        target = tmp_path / "report.txt"
        assert cli.main(["run", "--config", config, "--scheme", "tdma",
                         "--out", str(target)]) == 0
        assert "sum_capacity_bps_hz:" in target.read_text()

    def test_seed_override(self, tmp_path, capsys):
        config = write_config(tmp_path, {"scenario": {"case_id": 1}, "fp": FAST_FP})
        assert cli.main(["run", "--config", config, "--seed", "7"]) == 0
        assert "seed: 7" in capsys.readouterr().out

    def test_bad_config_exits_one(self, tmp_path, capsys):
        config = write_config(tmp_path, {"scenario": {"noise_power": -3.0}})
        assert cli.main(["run", "--config", config]) == 1
        assert "config error" in capsys.readouterr().err

    def test_unparseable_config_exits_one(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope}")
        assert cli.main(["run", "--config", str(path)]) == 1

    def test_missing_config_exits_one(self, tmp_path, capsys):
        assert cli.main(["run", "--config", str(tmp_path / "absent.json")]) == 1
        assert "config error" in capsys.readouterr().err

    def test_numerical_failure_exits_two(self, tmp_path, monkeypatch, capsys):
        config = write_config(tmp_path, {"scenario": {"case_id": 1}})

        def explode(*args, **kwargs):
            raise fp.NumericalFailure("non-finite surrogate gradient")

        monkeypatch.setattr(harness, "evaluate_scheme", explode)
        assert cli.main(["run", "--config", config]) == 2
        assert "numerical failure" in capsys.readouterr().err


class TestSweep:
    def test_writes_csv(self, tmp_path):
        config = write_config(tmp_path, {
            "sweep": {"points": 2, "schemes": ["tdma"], "case_id": 1},
        })
        target = tmp_path / "sweep.csv"
        assert cli.main(["sweep", "--config", config, "--out", str(target)]) == 0
        lines = target.read_text().splitlines()
        assert lines[0] == harness.CSV_HEADER
        assert len(lines) == 3

    def test_scheme_flag_subsets(self, tmp_path):
        config = write_config(tmp_path, {
            "sweep": {"points": 2, "schemes": ["rs", "tdma"], "case_id": 1},
        })
        target = tmp_path / "sweep.csv"
        assert cli.main(["sweep", "--config", config, "--scheme", "tdma",
                         "--out", str(target)]) == 0
        rows = harness.parse_csv(str(target))
        assert {r.scheme for r in rows} == {"tdma"}


class TestCase:
    def test_prints_preset(self, capsys):
        assert cli.main(["case", "--id", "2"]) == 0
        out = capsys.readouterr().out
        assert "modes: 1,2,3" in out
        assert "rx_count: 5" in out
        assert "tau_sq: 5,5,5" in out

    def test_unknown_id(self, capsys):
        assert cli.main(["case", "--id", "9"]) == 1


class TestTrace:
    def test_emits_iteration_rows(self, tmp_path):
        config = write_config(tmp_path, {
            "scenario": {"case_id": 1},
            "fp": {"max_outer_iterations": 5},
        })
        target = tmp_path / "trace.csv"
        assert cli.main(["trace", "--config", config, "--out", str(target)]) == 0
        lines = target.read_text().splitlines()
        assert lines[0] == "pair,iteration,surrogate_bps_hz,power_w"
        assert len(lines) > 1
        pair, iteration, value, power = lines[1].split(",")
        assert pair == "0" and iteration == "1"
        assert float(power) <= 1.0 + 1e-9


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            cli.main([])

    def test_console_entry_point(self):
        import importlib.metadata as md

        eps = md.entry_points()
        scripts = eps.select(group="console_scripts", name="oamrs")
        assert any(ep.value == "oamrs.cli:main" for ep in scripts)
