"""Command-line surface: formats, validation and exit codes."""
import csv
import io
import json
import math
import subprocess
import sys

import pytest

from cardcyclic import cli
from cardcyclic.io import render


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestExact:
    def test_three(self, capsys):
        code, out, _ = run(capsys, "exact", "--n", "3")
        assert code == 0
        rows = table(out)
        assert len(rows) == 6
        got = {r["permutation"]: (int(r["numerator"]), int(r["denominator"])) for r in rows}
        assert got["1 2 3"] == (5, 27) and got["3 2 1"] == (4, 27)
        assert "# tv_to_uniform,1/18" in out and "# separation,1/9" in out

    def test_two_json(self, capsys):
        code, out, _ = run(capsys, "exact", "--n", "2", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and doc["config"]["n"] == 2
        assert [(r["numerator"], r["denominator"]) for r in doc["rows"]] == [(2, 4), (2, 4)]

    def test_guard_writes_nothing(self, capsys, tmp_path):
        target = tmp_path / "t.csv"
        code, out, err = run(capsys, "exact", "--n", "9", "--out", str(target))
        assert code == 3 and out == "" and "8" in err
        assert not target.exists()

    def test_file_output(self, capsys, tmp_path):
        target = tmp_path / "t.csv"
        assert cli.main(["exact", "--n", "3", "--out", str(target)]) == 0
        data = target.read_bytes()
        assert b"\r" not in data and data.startswith(b"permutation,numerator,denominator,float\n")


class TestMarginal:
    def test_all(self, capsys):
        code, out, _ = run(capsys, "marginal", "--n", "3", "--which", "first", "--all")
        assert code == 0
        assert [(r["numerator"], r["denominator"]) for r in table(out)] == [("10", "27"), ("8", "27"), ("1", "3")]

    def test_rescaled(self, capsys):
        code, out, _ = run(capsys, "marginal", "--n", "10000", "--which", "first", "--j", "5000", "--rescale")
        row = table(out)[0]
        assert code == 0 and row["mode"] == "log"
        assert float(row["n_p"]) == pytest.approx(math.exp(-0.5), rel=0.02)

    def test_top_card_exact(self, capsys):
        _, out, _ = run(capsys, "marginal", "--n", "10000", "--which", "last", "--j", "10000")
        row = table(out)[0]
        assert (row["numerator"], row["denominator"], row["mode"]) == ("1", "10000", "exact")

    @pytest.mark.parametrize("extra", [["--j", "4"], ["--j", "0"], [], ["--j", "1", "--all"]])
    def test_invalid(self, capsys, extra):
        code, out, err = run(capsys, "marginal", "--n", "3", "--which", "last", *extra)
        assert code == 2 and out == "" and err.startswith("error:")


class TestLimits:
    def test_expectation_grid(self, capsys):
        _, out, _ = run(capsys, "limits", "--kind", "E", "--grid", "0:1:0.01")
        rows = table(out)
        assert len(rows) == 101
        best = max(rows, key=lambda r: float(r["E"]))
        assert float(best["b"]) == pytest.approx(0.72, abs=0.011)

    def test_constants(self, capsys):
        _, out, _ = run(capsys, "limits", "--kind", "constants", "--format", "json")
        vals = {r["name"]: r["value"] for r in json.loads(out)["rows"]}
        assert {"b_star", "b_bar", "b_hat", "b_tilde", "x_hat"} <= set(vals)
        assert round(vals["b_hat"], 3) == 0.768
        assert vals["b_star"] == round(vals["b_star"], 12)

    def test_flat_density(self, capsys):
        _, out, _ = run(capsys, "limits", "--kind", "f", "--b", "1", "--grid", "0:1:0.1")
        rows = table(out)
        assert len(rows) == 11 and all(float(r["f"]) == 1.0 for r in rows)

    @pytest.mark.parametrize(
        "argv",
        [
            ["--kind", "E", "--grid", "0:1"],
            ["--kind", "E", "--grid", "1:0:0.1"],
            ["--kind", "E", "--grid", "0:1:0"],
            ["--kind", "E", "--grid", "0:1:1e-7"],
            ["--kind", "E", "--grid", "0:2:0.5"],
            ["--kind", "f", "--grid", "0:1:0.1"],
            ["--kind", "G", "--b", "1.5", "--grid", "0:1:0.1"],
            ["--kind", "E"],
        ],
    )
    def test_malformed(self, capsys, argv):
        code, out, _ = run(capsys, "limits", *argv)
        assert code == 2 and out == ""

    def test_grid_parser(self):
        assert cli.parse_grid("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
        assert len(cli.parse_grid("0:1:0.1")) == 11


class TestSimulate:
    def test_position_reproducible(self, capsys):
        argv = ["simulate", "position", "--n", "200", "--card", "100", "--reps", "2000", "--seed", "7"]
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv, "--threads", "2")
        assert a == b
        rows = table(a)
        assert len(rows) == 200 and sum(int(r["count"]) for r in rows) == 2000

    def test_walk(self, capsys):
        _, out, _ = run(capsys, "simulate", "walk", "--n", "3", "--m", "5")
        rows = table(out)
        assert len(rows) == 5
        assert (rows[0]["tv_numerator"], rows[0]["tv_denominator"]) == ("1", "18")
        tvs = [float(r["tv"]) for r in rows]
        assert all(a > b for a, b in zip(tvs, tvs[1:]))

    def test_event_json(self, capsys):
        _, out, _ = run(
            capsys, "simulate", "event", "--n", "1000", "--M", "2", "--L", "8",
            "--reps", "500", "--seed", "1", "--format", "json",
        )
        doc = json.loads(out)
        row = doc["rows"][0]
        assert doc["config"]["seed"] == 1
        assert row["gap"] == pytest.approx(row["estimate"] - row["uniform"])

    def test_joint(self, capsys):
        _, out, _ = run(capsys, "simulate", "joint", "--n", "50", "--cards", "10,40", "--reps", "300")
        assert "# independence_gap," in out and "# left_of_frequency," in out

    def test_first_last(self, capsys):
        for kind in ("first", "last"):
            code, out, _ = run(capsys, "simulate", kind, "--n", "30", "--reps", "100")
            assert code == 0 and len(table(out)) == 30

    @pytest.mark.parametrize(
        "argv",
        [
            ["position", "--n", "10"],
            ["position", "--n", "10", "--card", "11"],
            ["event", "--n", "10", "--M", "1", "--L", "10"],
            ["event", "--n", "10", "--M", "-1", "--L", "2"],
            ["joint", "--n", "10", "--cards", "3,3"],
            ["joint", "--n", "10", "--cards", "a,b"],
            ["walk", "--n", "3", "--m", "0"],
            ["first", "--n", "3", "--reps", "0"],
            ["first", "--n", "3", "--seed", "-4"],
        ],
    )
    def test_invalid(self, capsys, argv):
        code, out, err = run(capsys, "simulate", *argv)
        assert code == 2 and out == "" and err


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["exact"])
    assert exc.value.code == 2


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "2,4")
    assert code == 0
    assert out.count("[PASS]") == 2 and "2/2 criteria passed" in out


def test_verify_unknown(capsys):
    code, _, _ = run(capsys, "verify", "--only", "99")
    assert code == 2


def test_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "cardcyclic.cli", "exact", "--n", "2"], capture_output=True, text=True
    )
    assert res.returncode == 0 and res.stdout.splitlines()[1] == "1 2,2,4,0.5"


def test_render_rejects_format():
    with pytest.raises(ValueError):
        render([{"a": 1}], {}, "xml")


def test_render_big_integers_as_strings():
    doc = json.loads(render([{"d": 3**60}], {"n": 60}, "json"))
    assert doc["rows"][0]["d"] == str(3**60)
