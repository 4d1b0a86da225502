import json
import subprocess
import sys

import pytest

from kollektiv.cli import ExperimentConfig, SCENARIOS, main, parse_config, parse_schedule, render, run
from kollektiv.errors import ConfigError

SMALL_N = {
    "stabilize": 20_000,
    "randomness": 20_000,
    "combine": 20_000,
    "ghz-sample": 5_000,
    "lhv": 1,
    "paradox": 1,
    "resolve": 1,
    "gedanken": 2_000,
}


def without_duration(text):
    d = json.loads(text)
    d.pop("duration_s")
    return d


class TestParseConfig:
    def test_defaults(self):
        cfg = parse_config([])
        assert cfg == ExperimentConfig()
        assert (cfg.seed, cfg.n, cfg.tolerance_coefficient, cfg.output_format) == (0, 100_000, 5.0, "text")

    def test_flag_beats_file(self, tmp_path):
        f = tmp_path / "exp.cfg"
        f.write_text("# comment line\nscenario = lhv\nn = 1000  # trailing comment\nseed=7\n")
        cfg = parse_config(["--config", str(f), "--n", "10000"])
        assert (cfg.scenario, cfg.n, cfg.seed) == ("lhv", 10_000, 7)
        assert parse_config(["--config", str(f)]).n == 1000

    def test_positional_scenario_beats_file(self, tmp_path):
        f = tmp_path / "exp.cfg"
        f.write_text("scenario = lhv\n")
        assert parse_config(["resolve", "--config", str(f)]).scenario == "resolve"

    def test_misspelled_scenario(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(["ghz-sampel"])
        assert "ghz-sampel" in str(exc.value) and "ghz-sample" in str(exc.value)

    def test_unknown_key_named(self, tmp_path):
        f = tmp_path / "exp.cfg"
        f.write_text("scenario = lhv\nsede = 3\n")
        with pytest.raises(ConfigError) as exc:
            parse_config(["--config", str(f)])
        assert exc.value.key == "sede"

    @pytest.mark.parametrize("argv,key", [
        (["--n", "0"], "n"),
        (["--n", "1.5"], "n"),
        (["--c", "-1"], "c"),
        (["--c", "abc"], "c"),
        (["--seed", "-1"], "seed"),
        (["--seed", str(2**64)], "seed"),
        (["--format", "xml"], "format"),
        (["--schedule", "1000,500"], "schedule"),
        (["--schedule", "lots"], "schedule"),
        (["--selections", "bogus(k=1)"], "selections"),
    ])
    def test_bad_values(self, argv, key):
        with pytest.raises(ConfigError) as exc:
            parse_config(argv)
        assert exc.value.key == key

    def test_schedule_forms(self):
        assert parse_schedule("1000x3") == [1000, 2000, 4000]
        assert parse_schedule("10,20, 40") == [10, 20, 40]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(["--config", str(tmp_path / "nope.cfg")])


class TestExitCodes:
    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_each_scenario_matches(self, scenario, capsys):
        assert main([scenario, "--n", str(SMALL_N[scenario]), "--seed", "3"]) == 0
        assert "verdict: match" in capsys.readouterr().out

    def test_mismatch_exits_1(self, capsys):
        # a tolerance this tight rejects the i.i.d. stream as well
        assert main(["stabilize", "--n", "20000", "--c", "0.01"]) == 1
        assert "mismatch" in capsys.readouterr().out

    def test_config_errors_exit_2(self, tmp_path, capsys):
        assert main(["ghz-sampel"]) == 2
        assert "ghz-sampel" in capsys.readouterr().err
        f = tmp_path / "bad.cfg"
        f.write_text("scenario = lhv\ncolour = red\n")
        assert main(["--config", str(f)]) == 2
        assert "colour" in capsys.readouterr().err
        assert main(["lhv", "--bogus"]) == 2


class TestReports:
    def test_lhv_report(self):
        report, code = run(parse_config(["lhv"]))
        assert code == 0
        assert report["results"]["satisfying_count"] == 0 and report["results"]["max_satisfiable"] == 3
        assert list(report) == ["scenario", "config", "results", "expected", "verdict", "duration_s"]

    def test_paradox_report(self):
        report, code = run(parse_config(["paradox"]))
        assert code == 0
        single = report["results"]["single_measure"]
        assert single["globally_infeasible"] and single["identity_violations"] == 0
        res = report["results"]["setting_indexed"]
        assert res["P_4(Sigma+)"] == "0" and res["P_i(Omega_i+)"] == ["1", "1", "1"]

    def test_stabilize_report(self):
        report, code = run(parse_config(["stabilize", "--n", "20000"]))
        assert code == 0
        assert report["results"]["oscillating_ratio_2"]["status"] == "NotStabilized"
        assert report["results"]["bernoulli_0.25"]["status"] == "Stabilized"

    def test_json_format_and_out(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["lhv", "--format", "json", "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        d = json.loads(out.read_text())
        assert d["scenario"] == "lhv" and d["config"]["output_format"] == "json"

    def test_csv_format(self, capsys):
        assert main(["resolve", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "key,value"
        assert all(line.count(",") == 1 and '"' not in line for line in lines)
        assert "results.setting_indexed.P_4(Sigma+),0" in lines

    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_json_byte_identical(self, scenario):
        argv = [scenario, "--n", str(SMALL_N[scenario]), "--seed", "11"]
        a = render(run(parse_config(argv))[0], "json")
        b = render(run(parse_config(argv))[0], "json")
        assert without_duration(a) == without_duration(b)
        strip = lambda t: "\n".join(l for l in t.splitlines() if '"duration_s"' not in l)
        assert strip(a) == strip(b)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kollektiv", "lhv", "--format", "json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["satisfying_count"] == 0


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_csv_never_needs_quoting(scenario, capsys):
    main([scenario, "--n", str(SMALL_N[scenario]), "--format", "csv"])
    out = capsys.readouterr().out
    assert '"' not in out
    assert all(line.count(",") == 1 for line in out.splitlines())
