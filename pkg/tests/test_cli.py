import json
import os
from fractions import Fraction

import pytest

from modgrowth.cli import main
from modgrowth.geometry import Point, Units
from modgrowth.group import ArithmeticOverflow, GroupElement
from modgrowth.io import (
    Config,
    RunManifest,
    UsageError,
    parse_matrix,
    parse_point,
    parse_radii,
    read_csv,
    render_csv,
    sha256_file,
    write_idempotent,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    lines = text.strip().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


# --- parsing ---------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("i", Point(0, 1)),
    ("2i", Point(0, 2)),
    ("1+i", Point(1, 1)),
    ("1/2+3/2*i", Point(Fraction(1, 2), Fraction(3, 2))),
    ("-1/3+1/4i", Point(Fraction(-1, 3), Fraction(1, 4))),
    ("0.5+2i", Point(Fraction(1, 2), 2)),
])
def test_parse_point(text, expected):
    assert parse_point(text) == expected


@pytest.mark.parametrize("text", ["", "x", "2", "1+-i", "3-i", "i+1"])
def test_parse_point_rejects(text):
    with pytest.raises(UsageError):
        parse_point(text)


def test_parse_matrix_and_radii():
    assert parse_matrix("2,1,1,1") == GroupElement(2, 1, 1, 1)
    with pytest.raises(UsageError):
        parse_matrix("1,2,3")
    with pytest.raises(UsageError):
        parse_matrix("1,1,1,1")
    assert parse_radii("1,3,2") == [1.0, 2.0, 3.0]
    assert parse_radii("8:9:0.5") == [8.0, 8.5, 9.0]
    with pytest.raises(UsageError):
        parse_radii("-1")


def test_config(tmp_path, monkeypatch):
    cfg = Config.parse("# comment\nunits = teich\ntolerance = 1e-8\nworkers = 2\ncache_dir = /tmp/x\n")
    assert cfg.units is Units.TEICHMULLER and cfg.tolerance == 1e-8 and cfg.workers == 2
    with pytest.raises(UsageError):
        Config.parse("colour = blue\n")
    with pytest.raises(UsageError):
        Config.parse("workers = 0\n")
    path = tmp_path / "mg.conf"
    path.write_text("units = teich\n")
    monkeypatch.setenv("MODGROWTH_CONFIG", str(path))
    assert Config.load().units is Units.TEICHMULLER
    monkeypatch.delenv("MODGROWTH_CONFIG")
    assert Config.load().units is Units.HYPERBOLIC


def test_idempotent_write(tmp_path):
    p = tmp_path / "a.csv"
    d1 = write_idempotent(p, "x\n1\n")
    mtime = os.stat(p).st_mtime_ns
    d2 = write_idempotent(p, "x\n1\n")
    assert d1 == d2 == sha256_file(p)
    assert os.stat(p).st_mtime_ns == mtime
    assert p.read_text() == "x\n1\n"


def test_csv_round_trip(tmp_path):
    rows = [{"R": 1.5, "units": "hyp", "count": 3, "variant": "omega"}]
    p = tmp_path / "r.csv"
    p.write_text(render_csv(rows))
    assert read_csv(p) == [{"R": "1.5", "units": "hyp", "count": "3", "variant": "omega"}]


def test_manifest_round_trip():
    m = RunManifest("ball", ["ball", "--center", "i"], radii=[1.0], outputs={"x": "y"})
    assert RunManifest.from_json(m.to_json()) == m


# --- commands --------------------------------------------------------------

def test_ball_examples(capsys):
    code, out, _ = run(capsys, "ball", "--center", "i", "--radius", "1.0", "--units", "hyp")
    assert code == 0
    got = {(r["variant"]): int(r["count"]) for r in rows_of(out)}
    assert got == {"omega": 10, "orbit": 5}
    code, out, _ = run(capsys, "ball", "--center", "i", "--radius", "0")
    assert {(r["variant"]): int(r["count"]) for r in rows_of(out)} == {"omega": 2, "orbit": 1}
    code, _, err = run(capsys, "ball", "--center", "one+i", "--radius", "1")
    assert code == 1 and "parse" in err


def test_ball_teich_units(capsys):
    _, out, _ = run(capsys, "ball", "--center", "i", "--radius", "0.5", "--units", "teich")
    rows = rows_of(out)
    assert rows[0]["units"] == "teich" and int(rows[0]["count"]) == 10


def test_ball_census(capsys):
    _, out, _ = run(capsys, "ball", "--center", "i", "--radius", "1,10", "--census")
    rows = rows_of(out)
    assert list(rows[0]) == ["R", "units", "count", "variant", "frac_hyp", "frac_par", "frac_ell"]
    assert float(rows[-1]["frac_hyp"]) > 0.95


def test_ball_overflow(capsys):
    code, _, err = run(capsys, "ball", "--center", "i", "--radius", "60")
    assert code == 3 and "overflow" in err


def test_overflow_propagates():
    with pytest.raises(ArithmeticOverflow):
        GroupElement(2**63, 0, 0, 1)


def test_conj_examples(capsys, tmp_path):
    out = tmp_path / "g.csv"
    code, _, _ = run(capsys, "conj", "--phi", "2,1,1,1", "--X", "i", "--Y", "i",
                     "--radii", "1.0,1.93", "--out", str(out))
    assert code == 0
    gamma = {float(r["R"]): int(r["count"]) for r in read_csv(out) if r["variant"] == "gamma"}
    assert gamma == {1.0: 0, 1.93: 4}
    variants = [r["variant"] for r in read_csv(out)]
    assert {"p_plus", "p_minus"} <= set(variants)
    man = json.loads((tmp_path / "g.csv.manifest.json").read_text())
    assert man["outputs"][str(out)] == sha256_file(out)
    assert man["extra"]["boundary_hits"] == {"1.0": 0, "1.93": 0}
    assert man["phi"] == "2,1,1,1"


def test_conj_off_axis_has_no_p_sets(capsys):
    _, out, _ = run(capsys, "conj", "--phi", "2,1,1,1", "--X", "2i", "--radii", "4")
    assert {r["variant"] for r in rows_of(out)} == {"gamma"}


def test_conj_rejects_parabolic(capsys):
    code, _, err = run(capsys, "conj", "--phi", "1,1,0,1", "--radii", "1")
    assert code == 1 and "hyperbolic" in err


def test_verify_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "identities")
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(capsys, "verify", "--suite", "inclusions", "--A", "0.01")
    rep = json.loads(out)
    assert code == 2 and not rep["passed"]
    bad = [c for c in rep["checks"] if not c["passed"]]
    assert bad and bad[0]["witnesses"]
    code, _, err = run(capsys, "verify", "--suite", "nonsense")
    assert code == 1 and "unknown suite" in err


def test_usage_errors_exit_1(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "ball")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


def test_constants_example(capsys):
    code, out, _ = run(capsys, "constants", "--N", "3", "--h", "2", "--A", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["teich"]["G_U"] == pytest.approx(8.15485, abs=1e-5)
    assert 2.3 <= rep["teich"]["L"] <= 2.5


def test_fit_on_exported_csv(capsys, tmp_path):
    out = tmp_path / "orb.csv"
    run(capsys, "ball", "--center", "i", "--radius", "8:14:1", "--out", str(out))
    code, text, _ = run(capsys, "fit", "--csv", str(out), "--variant", "omega")
    rep = json.loads(text)
    assert code == 0 and abs(rep["fit"]["slope"] - 1.0) < 0.05
    assert rep["slope_teich"] == pytest.approx(2 * rep["fit"]["slope"])
    code, _, _ = run(capsys, "fit", "--csv", str(tmp_path / "missing.csv"))
    assert code == 1


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--samples", "10000")
    rep = json.loads(out)
    assert code == 0 and rep["calibration"]["A_hyp"] <= 3.0 and rep["validation"]["passed"]
    assert run(capsys, "calibrate", "--samples", "10")[0] == 1


def test_outputs_reproduce_across_workers(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "ball", "--center", "1/3+2i", "--radius", "2:7:1", "--workers", "1", "--out", str(a))
    run(capsys, "ball", "--center", "1/3+2i", "--radius", "2:7:1", "--workers", "2", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_replay_reproduces(capsys, tmp_path):
    out = tmp_path / "r.csv"
    run(capsys, "conj", "--phi", "5,2,2,1", "--radii", "4,6,8", "--out", str(out))
    first = out.read_bytes()
    code, text, _ = run(capsys, "replay", str(tmp_path / "r.csv.manifest.json"))
    assert code == 0 and all(json.loads(text)["outputs"].values())
    assert out.read_bytes() == first


def test_cache_dir(capsys, tmp_path):
    cache = tmp_path / "cache"
    _, first, _ = run(capsys, "ball", "--center", "i", "--radius", "3", "--cache-dir", str(cache))
    assert list(cache.iterdir())
    _, second, _ = run(capsys, "ball", "--center", "i", "--radius", "3", "--cache-dir", str(cache))
    _, plain, _ = run(capsys, "ball", "--center", "i", "--radius", "3")
    assert first == second == plain
