import json

import pytest

from cubictess import cli
from cubictess.combinatorics import tess_stats
from cubictess.errors import NewtonDivergence


def run_json(capsys, *argv):
    assert cli.run(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_count_row(capsys):
    row = run_json(capsys, "count", "--q", "3", "--p", "3")
    s = tess_stats(3, 3)
    assert (row["v_par"], row["e"], row["f"]) == (s.v_par, s.e, s.f) == (168, 384, 208)
    assert row["euler_holds"] is True


def test_count_table(capsys):
    assert cli.run(["count", "--table"]) == 0
    assert "4,3,3,8,168,384,208,0,0,0" in capsys.readouterr().out


def test_angle_coperiod(capsys):
    assert cli.run(["angle", "coperiod", "13/78"]) == 0
    assert capsys.readouterr().out == "1\n"
    assert cli.run(["angle", "coperiod", "1/9"]) == 0
    assert capsys.readouterr().out == "none\n"


def test_angle_list(capsys):
    out = run_json(capsys, "angle", "list", "--q", "2")
    assert out["count"] == 12 and out["angles"][0] == "1/24"


def test_four_ray_portraits(capsys):
    out = run_json(capsys, "portrait", "four-ray", "10/24", "11/24", "14/24", "17/24")
    assert [f["portrait"] for f in out["faces"]] == [
        "{1≃2≃3≃6}/8", "{2≃6}/8", "{1≃2, 3≃6}/8", "{1≃3}/8"]
    assert [e["kind"] for e in out["edges"]] == ["Primary", "Primary", "Secondary", "Secondary"]
    assert out["shift"] == [1]


def test_portrait_algebra(capsys):
    out = run_json(capsys, "portrait", "amalgamate", "--q", "2", "1~3", "2~6")
    assert out["portrait"] == "{1≃2≃3≃6}/8" and out["formal"] is True
    out = run_json(capsys, "portrait", "edge", "--q", "2", "2~6", "1~3")
    assert out["kind"] == "Secondary"


def test_centers(capsys):
    out = run_json(capsys, "centers", "B:1,1", "--p", "2")
    assert out["count"] == out["expected"] == 2
    assert out["centers"][0]["a"] == [-0.707106781187, 0.0]


def test_pray_json_is_byte_identical(capsys):
    argv = ["pray", "--region", "inner", "--phi", "5/6"]
    assert cli.run(argv) == 0
    first = capsys.readouterr().out
    assert cli.run(argv) == 0
    assert capsys.readouterr().out == first
    out = json.loads(first)
    assert out["phi"] == "5/6" and out["landing"]["kind"] == "Parabolic"


def test_exit_codes(capsys, monkeypatch):
    assert cli.run(["angle", "coperiod", "1/0"]) == 2
    assert cli.run(["count", "--p", "12"]) == 2
    assert cli.run(["nonsense"]) == 2
    assert cli.run(["count", "--q", "1", "stray"]) == 2
    assert cli.run(["ray", "--a", "0", "--v", "0", "--theta", "1/3", "--res", "0"]) == 2

    def boom(*_, **__):
        raise NewtonDivergence("diverged")

    monkeypatch.setattr(cli, "cmd_count", boom)
    assert cli.run(["count", "--p", "2"]) == 3
    assert "numeric failure" in capsys.readouterr().err


def test_negative_complex_flag_values(capsys):
    out = run_json(capsys, "ray", "--a", "0.4+0.1j", "--v", "-0.3+0.2j", "--theta", "1/4")
    assert out
    assert cli._glue_negative_values(["--v", "-0.3+0.2j", "-h"]) == ["--v=-0.3+0.2j", "-h"]


def test_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "c.conf"
    conf.write_text("# tolerances\nq = 2\np = 1\n", encoding="utf-8")
    row = run_json(capsys, "count", "--config", str(conf))
    assert (row["q"], row["p"]) == (2, 1)
    row = run_json(capsys, "count", "--config", str(conf), "--p", "2")
    assert (row["q"], row["p"]) == (2, 2)
    conf.write_text("bogus = 1\n", encoding="utf-8")
    assert cli.run(["count", "--config", str(conf)]) == 2


def test_json_output_file(tmp_path, capsys):
    out = tmp_path / "row.json"
    assert cli.run(["count", "--q", "1", "--p", "1", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text(encoding="utf-8"))["f"] == 3


def test_julia_png(tmp_path):
    out = tmp_path / "j.png"
    assert cli.run(["julia", "--a", "0", "--v", "0", "--res", "16", "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_clean_rounds_floats():
    assert cli.dumps({"x": 1 / 3, "z": 1 + 2j}) == '{\n  "x": 0.333333333333,\n  "z": [\n    1.0,\n    2.0\n  ]\n}'


@pytest.mark.parametrize("argv", [["--help"], ["angle", "--help"]])
def test_help_exits_cleanly(argv, capsys):
    assert cli.run(argv) == 0
    assert "usage" in capsys.readouterr().out
