"""Command-line behaviour: outputs, exit codes and determinism."""
import json

import pytest

from stldiv.cli import main
from stldiv.signal import TimedStateSequence, Trace, write_trace

RUNNING = {
    "id": "running",
    "variables": [{"name": "x", "lo": 0, "hi": 40}, {"name": "v", "lo": -5, "hi": 5},
                  {"name": "a", "lo": -3, "hi": 3}],
    "init": {"x": [0, 0], "v": [0, 0], "a": [0, 0]},
    "dynamics": [{"kind": "double_integrator", "pos": "x", "vel": "v", "acc": "a"}],
    "formula": "Ev(BoundedAlw([0,5], x <= 10))",
    "horizon": 20, "bound": 10, "delta": 0.01,
}


@pytest.fixture
def running_config(tmp_path):
    path = tmp_path / "running.json"
    path.write_text(json.dumps(RUNNING, indent=2))
    return path


def const_dir(tmp_path, values, horizon=1.0):
    d = tmp_path / "traces"
    for k, v in enumerate(values, 1):
        tss = TimedStateSequence([0, horizon], ("x",), [[v], [v]])
        write_trace(Trace(tss, iteration=k), d / f"trace_{k:02d}.csv")
    return d


class TestRun:
    def test_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", "--benchmark", "rnc1", "--method", "bd", "--traces", "2",
                     "--out", str(out)]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["summary.json", "timings.json", "trace_01.csv", "trace_01.json",
                         "trace_02.csv", "trace_02.json"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["traces_produced"] == 2 and summary["method"] == "bd"
        assert summary["N"] == 10 and summary["aped"] > 0
        for key in ("seed", "delta", "timeout", "iterations"):
            assert key in summary
        assert all("wall" not in json.dumps(it) for it in summary["iterations"])
        assert "2/2 traces" in capsys.readouterr().out

    def test_identical_runs(self, tmp_path):
        dirs = [tmp_path / "a", tmp_path / "b"]
        for d in dirs:
            assert main(["run", "--benchmark", "rnc1", "--method", "rbd", "--seed", "7",
                         "--traces", "2", "--out", str(d)]) == 0
        files = sorted(p.name for p in dirs[0].iterdir() if p.name != "timings.json")
        for name in files:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name

    def test_rbd_metadata_records_seed(self, tmp_path):
        out = tmp_path / "o"
        main(["run", "--benchmark", "rnc1", "--method", "rbd", "--seed", "5", "--traces", "2",
              "--out", str(out)])
        meta = json.loads((out / "trace_02.json").read_text())
        assert meta["seed"] == 5 and meta["method"] == "RBD" and len(meta["reference"]) > 0

    def test_no_trace_exit_code(self, tmp_path, capsys):
        cfg = dict(RUNNING, formula="x >= 1 && !(x >= 1)")
        path = tmp_path / "contra.json"
        path.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(path), "--traces", "1", "--out", str(tmp_path / "o")]) == 2
        assert "no sound trace" in capsys.readouterr().err

    def test_export_only(self, tmp_path, running_config):
        out = tmp_path / "o"
        assert main(["run", "--config", str(running_config), "--solver", "export",
                     "--out", str(out)]) == 0
        assert (out / "running.lp").read_text().startswith("\\")

    @pytest.mark.parametrize("argv", [
        ["run", "--benchmark", "rnc1", "--method", "xyz"],
        ["run", "--benchmark", "rnc1", "--traces", "0"],
        ["run", "--benchmark", "rnc1", "--timeout", "-1"],
        ["run", "--benchmark", "rnc1", "--seed", "-3"],
        ["run", "--method", "bd"],
        ["frobnicate"],
    ])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 1

    def test_unknown_benchmark(self, tmp_path, capsys):
        assert main(["run", "--benchmark", "nope", "--out", str(tmp_path)]) == 1
        assert "unknown benchmark" in capsys.readouterr().err

    def test_bad_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert main(["run", "--config", str(path), "--out", str(tmp_path)]) == 1


class TestAped:
    def test_single_trace(self, tmp_path, capsys):
        assert main(["aped", str(const_dir(tmp_path, [2.0]))]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "APED 0.0"

    def test_two_constants(self, tmp_path, capsys):
        assert main(["aped", str(const_dir(tmp_path, [0.0, 1.0]))]) == 0
        first = capsys.readouterr().out.splitlines()[0]
        assert float(first.split()[1]) == pytest.approx(1.0, abs=1e-12)

    def test_empty_dir(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert main(["aped", str(tmp_path / "empty")]) == 1

    def test_bd_beats_sp(self, tmp_path, capsys):
        for method in ("sp", "bd"):
            main(["run", "--benchmark", "dstop", "--method", method, "--traces", "2",
                  "--out", str(tmp_path / method)])
        capsys.readouterr()
        values = {}
        for method in ("sp", "bd"):
            main(["aped", str(tmp_path / method)])
            values[method] = float(capsys.readouterr().out.split()[1])
        assert values["bd"] > values["sp"]


class TestMonitor:
    def test_sat(self, tmp_path, capsys):
        out = tmp_path / "o"
        main(["run", "--benchmark", "rnc2", "--traces", "1", "--out", str(out)])
        capsys.readouterr()
        assert main(["monitor", str(out / "trace_01.csv"), "--benchmark", "rnc2"]) == 0
        assert capsys.readouterr().out.startswith("SAT")

    def test_unsat_with_time(self, tmp_path, capsys):
        d = tmp_path / "t"
        write_trace(Trace(TimedStateSequence([0, 10], ("x",), [[0], [10]])), d / "ramp.csv")
        assert main(["monitor", str(d / "ramp.csv"), "--formula", "Alw(x <= 5)"]) == 2
        out = capsys.readouterr().out
        assert out.startswith("UNSAT") and "falsified at t=" in out
        t = float(out.rsplit("t=", 1)[1])
        assert 5.0 < t <= 5.02

    def test_tightened_verdict_implies_plain(self, tmp_path, capsys):
        d = tmp_path / "t"
        write_trace(Trace(TimedStateSequence([0, 10], ("x",), [[0], [10]])), d / "ramp.csv")
        for f in ("Ev(x >= 9.95)", "Alw(x <= 10.05)", "Ev[0,3](x >= 3)"):
            tight = main(["monitor", str(d / "ramp.csv"), "--formula", f, "--delta", "0.1"])
            plain = main(["monitor", str(d / "ramp.csv"), "--formula", f])
            if tight == 0:
                assert plain == 0

    def test_unknown_variable(self, tmp_path):
        d = const_dir(tmp_path, [1.0])
        assert main(["monitor", str(d / "trace_01.csv"), "--formula", "z >= 0"]) == 1

    def test_missing_file(self, tmp_path):
        assert main(["monitor", str(tmp_path / "none.csv"), "--formula", "x >= 0"]) == 1


class TestExportAndPlot:
    def test_export_binaries_include_valuation(self, tmp_path, running_config, capsys):
        out = tmp_path / "m.lp"
        assert main(["export-lp", "--config", str(running_config), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        binaries = set(s.strip() for s in lines[lines.index("Binary") + 1 : lines.index("End")])
        expected = {f"b{k}_{i}" for k in range(3) for i in range(1, 11)}
        assert expected <= binaries
        assert "30 valuation bits" in capsys.readouterr().out

    def test_plot(self, tmp_path):
        d = const_dir(tmp_path, [0.0, 1.0, 3.0])
        assert main(["plot", str(d), "--out", str(tmp_path / "svg")]) == 0
        svg = (tmp_path / "svg" / "x.svg").read_text()
        assert svg.startswith("<svg") and svg.count('<g class="trace"') == 3
        assert "href" not in svg and "<polyline" in svg

    def test_plot_empty(self, tmp_path):
        (tmp_path / "e").mkdir()
        assert main(["plot", str(tmp_path / "e")]) == 1
