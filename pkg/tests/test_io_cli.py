import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from persistwalk import io
from persistwalk.cli import build_parser, main, read_config


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestIO:
    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "a.csv"
        io.write_csv(["N", "p", "x"], [[1, Fraction(1, 2), 0.25], [2, Fraction(7, 16), None]], path,
                     meta={"op": "pn-exact", "law": "simple"})
        meta, header, rows = io.read_csv(path)
        assert meta == {"op": "pn-exact", "law": "simple"}
        assert header == ["N", "p", "x"]
        assert rows == [[1, Fraction(1, 2), 0.25], [2, Fraction(7, 16), None]]

    def test_json_roundtrip(self, tmp_path):
        path = tmp_path / "a.jsonl"
        io.write_json([{"value": np.float64(0.5), "n": np.int64(3), "v": np.arange(2)}], path)
        io.write_json([{"value": float("inf")}], path, append=True)
        recs = io.read_json(path)
        assert recs[0] == {"schema": io.SCHEMA, "value": 0.5, "n": 3, "v": [0, 1]}
        assert recs[1]["value"] == "inf"

    def test_schema_checked(self, tmp_path):
        bad = tmp_path / "b.jsonl"
        bad.write_text('{"schema": "other/9"}\n')
        with pytest.raises(io.SchemaError):
            io.read_json(bad)
        bad_csv = tmp_path / "b.csv"
        bad_csv.write_text("N,p\n1,2\n")
        with pytest.raises(io.SchemaError):
            io.read_csv(bad_csv)

    def test_plot_data(self, tmp_path):
        path = tmp_path / "p.dat"
        io.write_plot_data(path, [1, 2, 3], [0.5, 0.25, 0.125], "n p\nsecond line")
        arr = io.read_plot_data(path)
        assert arr.shape == (3, 2)
        assert path.read_text().startswith("# n p\n# second line\n")


class TestExitCodes:
    def test_success_to_stdout(self, capsys):
        code, out, err = run(["pn-exact", "--N", "4"], capsys)
        assert code == 0
        assert out.startswith("# schema=persistwalk/1")
        assert "7/16" in out
        assert "pn-exact" in err

    def test_missing_seed(self, capsys):
        code, _, err = run(["pn-mc", "--N", "8", "--reps", "100"], capsys)
        assert code == 2 and "--seed" in err

    def test_bad_law_names_token(self, capsys):
        code, _, err = run(["pn-exact", "--N", "4", "--law", "slackened:p0=zz"], capsys)
        assert code == 2 and "'zz'" in err

    def test_unknown_flag(self, capsys):
        code, _, _ = run(["pn-exact", "--N", "4", "--bogus"], capsys)
        assert code == 2

    def test_no_command(self, capsys):
        assert run([], capsys)[0] == 2

    def test_bad_workers(self, capsys):
        assert run(["pn-mc", "--N", "4", "--seed", "1", "--workers", "0"], capsys)[0] == 2

    def test_runtime_error(self, capsys):
        code, _, err = run(["pn-exact", "--N", "4", "--law", "laplace"], capsys)
        assert code == 1 and "NotLattice" in err

    def test_hypothesis_error(self, capsys):
        code, _, err = run(["symmetry", "--law", "lattice:{2:1/3,-1:2/3}", "--seed", "1", "--reps", "100"], capsys)
        assert code == 1 and "HypothesisNotMet" in err

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "persistwalk.cli", "pn-mc", "--N", "8"],
                              capture_output=True, text=True)
        assert proc.returncode == 2


class TestCommands:
    def test_pn_exact_brute(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        code, stdout, _ = run(["pn-exact", "--N", "6", "--brute", "--out", str(out)], capsys)
        assert code == 0 and "pn-exact" in stdout
        meta, header, rows = io.read_csv(out)
        assert meta["op"] == "pn-exact"
        assert rows[3][header.index("p_exact")] == Fraction(7, 16)
        assert all(r[header.index("brute_force_agrees")] is True for r in rows)

    def test_pn_mc_json(self, tmp_path, capsys):
        out = tmp_path / "p.jsonl"
        assert run(["pn-mc", "--N", "16", "--reps", "2000", "--seed", "5", "--out", str(out)], capsys)[0] == 0
        rec = io.read_json(out)[0]
        assert {"op", "law", "params", "value", "stderr", "n", "seed", "elapsed_ms"} <= set(rec)
        assert rec["seed"] == 5 and rec["n"] == 2000

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# a comment\ncommand=pn-mc\nN=16\nreps=1000\nseed=3\ntilted=true\n")
        code, out, _ = run(["--config", str(cfg)], capsys)
        assert code == 0
        rec = json.loads(out)
        assert rec["seed"] == 3 and rec["params"]["tilted"] is True
        # command-line flags override the file
        code, out, _ = run(["--config", str(cfg), "--seed", "4"], capsys)
        assert json.loads(out)["seed"] == 4

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("no equals sign\n")
        assert run(["pn-exact", "--config", str(cfg)], capsys)[0] == 2
        assert run(["pn-exact", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2

    def test_read_config(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("law = laplace\nplot_data = x.dat\ntilted = false\n")
        assert read_config(str(cfg)) == ["--law", "laplace", "--plot-data", "x.dat"]

    def test_plot_data_written(self, tmp_path, capsys):
        dat = tmp_path / "f.dat"
        code, _, _ = run(["fcurve", "--seed", "1", "--samples", "600", "--mesh", "32",
                          "--plot-data", str(dat)], capsys)
        assert code == 0
        arr = io.read_plot_data(dat)
        assert arr[0, 1] == 1.0

    @pytest.mark.parametrize("args", [
        ["cycle-law", "--L", "8"],
        ["series-check", "--L", "10", "--identity", "lattice-H"],
        ["ladder", "--L", "64"],
        ["tauberian", "--L", "2048", "--n-min", "8"],
        ["tails", "--law", "laplace", "--grid", "16:32", "--reps", "2000", "--seed", "1"],
        ["assoc", "--law", "laplace", "--reps", "10000", "--grid", "3", "--seed", "1"],
        ["symmetry", "--law", "laplace", "--reps", "4000", "--seed", "1"],
        ["chain-check", "--N", "32", "--reps", "2000", "--seed", "1"],
        ["fit-exponent", "--grid", "8:512", "--reps", "1000", "--seed", "1"],
    ])
    def test_each_command_runs(self, args, capsys):
        code, out, err = run(args, capsys)
        assert code == 0, err
        assert out.strip()

    def test_series_check_reports_diff(self, capsys):
        code, out, _ = run(["series-check", "--L", "10", "--identity", "lattice-H", "--format", "json"], capsys)
        rec = json.loads(out)
        assert code == 0 and rec["exact"] is True

    def test_parser_lists_all_commands(self):
        text = build_parser().format_help()
        for cmd in ("pn-exact", "pn-mc", "fit-exponent", "cycle-law", "series-check", "tauberian",
                    "tails", "fcurve", "assoc", "symmetry", "chain-check", "ladder"):
            assert cmd in text


@pytest.mark.parametrize("args", [
    ["pn-mc", "--law", "laplace", "--N", "64", "--reps", "40000"],
    ["tails", "--law", "laplace", "--grid", "32:64", "--reps", "40000"],
])
def test_worker_count_does_not_change_values(args, capsys):
    vals = []
    for w in ("1", "2"):
        code, out, _ = run(args + ["--seed", "7", "--workers", w, "--format", "json"], capsys)
        assert code == 0
        vals.append(json.loads(out)["value"])
    assert vals[0] == vals[1]
