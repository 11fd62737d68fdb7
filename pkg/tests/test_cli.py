import csv
import json

import numpy as np
import pytest

from dnls_nist import potentials as P
from dnls_nist.cli import main, read_config, UsageError
from dnls_nist.rhp import read_samples


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def zero_json(sd_zero, tmp_path):
    path = tmp_path / "zero.json"
    sd_zero.save(path)
    return str(path)


def test_soliton_exact_at_origin(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["soliton-exact", "--x", "0", "--t", "0", "--out", str(out)]) == 0
    (r,) = rows(out)
    assert complex(float(r["re_q"]), float(r["im_q"])) == pytest.approx(-2, abs=1e-14)


def test_soliton_exact_matches_builtin_at_t0(tmp_path):
    out = tmp_path / "s.csv"
    main(["soliton-exact", "--x", "-3:3:7", "--out", str(out)])
    q = np.array([complex(float(r["re_q"]), float(r["im_q"])) for r in rows(out)])
    assert np.array_equal(q, P.q_gi()(np.linspace(-3, 3, 7)))


def test_soliton_moves_at_constant_speed(tmp_path):
    out = tmp_path / "s.csv"
    main(["soliton-exact", "--x", "-8:8:1601", "--t", "0,1", "--out", str(out)])
    r = rows(out)
    a = np.array([float(v["abs_q"]) for v in r]).reshape(2, -1)
    x = np.linspace(-8, 8, 1601)
    # |q| depends on x only through X = -4 xi eta x - 16 xi eta (xi^2 - eta^2) t
    assert x[a[1].argmax()] - x[a[0].argmax()] == pytest.approx(-4 * (1 - 0.25), abs=0.02)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# soliton parameters\neta = 0.3\nxi=2\n")
    assert read_config(cfg) == {"eta": 0.3, "xi": 2.0}
    out = tmp_path / "s.csv"
    main(["--config", str(cfg), "soliton-exact", "--x", "0.4", "--eta", "0.5", "--out", str(out)])
    (r,) = rows(out)
    assert complex(float(r["re_q"]), float(r["im_q"])) == pytest.approx(
        P.soliton_gi(0.4, 0.0, xi=2.0, eta=0.5), abs=1e-14)


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = red\n")
    with pytest.raises(UsageError, match="colour"):
        read_config(cfg)
    assert main(["--config", str(cfg), "soliton-exact"]) == 1


@pytest.mark.parametrize("argv", [
    [],
    ["scatter", "nonsense"],
    ["soliton-exact", "--eta", "0"],
    ["soliton-exact", "--x", "1:2"],
    ["evolve", "missing.json"],
    ["fsm", "zero", "--N", "100"],
    ["evolve", "x.json", "--arm-slope", "2"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_flag_named_in_message(capsys):
    main(["fsm", "zero", "--dt", "-1"])
    assert "--dt" in capsys.readouterr().err


def test_corrupt_data_exits_2(sd_gi, tmp_path):
    d = sd_gi.to_dict()
    d["norming"] = []
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    assert main(["evolve", str(path), "--out", str(tmp_path / "f.csv")]) == 2


def test_evolve_zero_data_grid(zero_json, tmp_path):
    out = tmp_path / "f.csv"
    assert main(["evolve", zero_json, "--x", "-1:1:3", "--t", "0:2:3", "--out", str(out)]) == 0
    got = read_samples(out)
    assert len(got) == 9 and all(s.q == 0 for s in got)


def test_evolve_soliton_line_and_dump(sd_gi, tmp_path):
    data = tmp_path / "gi.json"
    sd_gi.save(data)
    out, dump = tmp_path / "f.csv", tmp_path / "c.json"
    assert main(["evolve", str(data), "--x", "-2:2:3", "--t", "1", "--out", str(out),
                 "--dump-rhp", str(dump)]) == 0
    for s in read_samples(out):
        assert abs(s.q - P.soliton_gi(s.x, s.t)) < 1e-6
    assert json.loads(dump.read_text())["level"].startswith("RHP")


def test_scatter_small_gaussian(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["scatter", "gauss:0.1", "--n1", "200", "--out", str(out)]) == 0
    assert "0 quartet(s)" in capsys.readouterr().out
    assert json.loads(out.read_text())["quartets"] == []


def test_scatter_sampled_file(tmp_path):
    x = np.linspace(-12, 12, 2401)
    q = 0.5 * np.exp(-x * x)
    src = tmp_path / "q.csv"
    np.savetxt(src, np.c_[x, q, 0 * q], delimiter=",", header="x,re_q,im_q", comments="")
    out = tmp_path / "g.json"
    assert main(["scatter", "file:" + str(src), "--n1", "120", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["quartets"] == []


def test_fsm_snapshots(tmp_path):
    out = tmp_path / "fsm.csv"
    assert main(["fsm", "gauss_sech", "--N", "256", "--dt", "1e-3", "--t-end", "0.1",
                 "--snapshots", "0,0.1", "--out", str(out)]) == 0
    assert {float(r["t"]) for r in rows(out)} == {0.0, 0.1}


def test_compare_zero_profile(zero_json, tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", zero_json, "zero", "--x", "-2:2:5", "--t", "0.1,0.2", "--N", "64",
                 "--dt", "1e-2", "--out", str(out)]) == 0
    assert all(float(r["error"]) == 0 for r in rows(out))


def test_compare_rejects_points_outside_box(zero_json, tmp_path):
    assert main(["compare", zero_json, "zero", "--x", "-50,0", "--out",
                 str(tmp_path / "c.csv")]) == 1
