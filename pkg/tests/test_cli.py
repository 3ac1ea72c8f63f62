import csv
import io
import json
import os
import subprocess
import sys

import pytest

from cursekit import cli
from cursekit._backend import thread_count
from cursekit.fooling import info_complexity_bound


def call(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), buf)
    return code, buf.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def nodes(tmp_path):
    path = tmp_path / "nodes.txt"
    assert call("generate", "rank1-lattice", "--d", "4", "--n", "16", "-o", str(path))[0] == 0
    return str(path)


@pytest.mark.parametrize("which,count", [("ctilde-q", 7), ("cp-a-half", 5), ("cpr-grid", 12)])
def test_tables(which, count):
    code, text = call("tables", which, "--format", "csv")
    assert code == 0
    table = rows(text)
    assert len(table) == count
    if which != "cpr-grid":
        assert max(float(r["abs_dev"]) for r in table) <= 1e-4


def test_cpr_grid_at_half_is_two():
    table = rows(call("tables", "cpr-grid", "--format", "csv")[1])
    for r in table:
        assert float(r["c_pr"]) == pytest.approx(2.0)
        assert float(r["c_pr_quadrature"]) == pytest.approx(2.0, rel=1e-9)


def test_certify_empty_set(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("d=3 n=0 weighted=0\n")
    table = rows(call("certify", str(path), "--format", "csv")[1])
    by = {r["theorem"]: r for r in table}
    assert float(by["thm1-exact"]["bound_normalized"]) == 1.0
    assert float(by["thm5"]["bound_normalized"]) == 0.5


def test_certify_no_anchor_default_uses_smooth_part_bound(nodes):
    table = rows(call("certify", nodes, "--space", "no-anchor-sobolev", "--format", "csv")[1])
    assert [r["theorem"] for r in table] == ["thm3-exact", "thm5"]
    assert "alpha3=" in table[0]["constants"]


def test_certify_large_d_uses_closed_form(tmp_path):
    path = tmp_path / "big.txt"
    call("generate", "uniform-random", "--d", "40", "--n", "8", "--seed", "1", "-o", str(path))
    table = rows(call("certify", str(path), "--space", "no-anchor-sobolev", "--theorem", "3",
                      "--format", "csv")[1])
    assert table[0]["theorem"] == "thm3-closed"


def test_generate_then_certify_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"g{i}.txt"
        call("generate", "uniform-random", "--d", "3", "--n", "9", "--seed", "7", "-o", str(path))
        outs.append(call("certify", str(path), "--format", "csv")[1])
    assert outs[0] == outs[1]


def test_csv_and_json_carry_identical_values(nodes):
    c = rows(call("certify", nodes, "--format", "csv")[1])
    j = json.loads(call("certify", nodes, "--format", "json")[1])
    recs = j["rows"] if isinstance(j, dict) else j
    assert len(recs) == len(c)
    for rc, rj in zip(c, recs):
        if isinstance(rj, list):
            rj = dict(zip(rc.keys(), rj))
        for key in ("bound_absolute", "bound_normalized"):
            assert float(rc[key]) == float(rj[key])


def test_pretty_output(nodes):
    code, text = call("certify", nodes)
    assert code == 0 and "bound_normalized" in text


def test_discrepancy_command(nodes):
    table = rows(call("discrepancy", nodes, "--format", "csv")[1])
    assert table[0]["backend"] == "box-exact"
    assert float(table[0]["value"]) > 0


def test_discrepancy_refusals(nodes):
    assert call("discrepancy", nodes, "--backend", "monte-carlo")[0] == 2
    assert call("discrepancy", nodes, "--backend", "closed-form-p2", "--p-exp", "3")[0] == 2
    code, text = call("discrepancy", nodes, "--backend", "monte-carlo", "--seed", "1",
                      "--samples", "2000", "--format", "csv")
    assert code == 0 and float(rows(text)[0]["stderr"]) > 0


def test_bad_inputs_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("d=2 n=1 weighted=0\n0.1\n")
    assert call("certify", str(bad))[0] == 1
    assert "line 2" in capsys.readouterr().err
    assert call("certify", str(tmp_path / "missing.txt"))[0] == 1
    assert call("curse", "--theorem", "1", "--eps", "0.1", "--d", "x:y")[0] == 1
    with pytest.raises(SystemExit) as info:
        call("certify")
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        call("certify", "f.txt", "--q", "0.5")
    assert info.value.code == 1


def test_curse_powers_of_two():
    table = rows(call("curse", "--theorem", "1", "--eps", "0.5", "--d", "1:8", "--log2",
                      "--format", "csv")[1])
    assert [int(r["n_lower"]) for r in table] == [2 ** (d - 1) for d in range(1, 9)]
    assert float(table[-1]["log2_n_lower"]) == 7.0


def test_curse_overrides_and_ranges():
    table = rows(call("curse", "--theorem", "5", "--c-tilde", "1.0198", "--eps", "0.25",
                      "--d", "100,500", "--format", "csv")[1])
    assert int(table[1]["n_lower"]) == info_complexity_bound("5", {"c_tilde": 1.0198}, 0.25, 500)
    assert call("curse", "--theorem", "5", "--eps", "0.7")[0] == 2
    assert call("curse", "--theorem", "1", "--space", "no-anchor-sobolev", "--eps", "0.1")[0] == 2


def test_curse_poly2_without_decomposition():
    table = rows(call("curse", "--theorem", "5", "--space", "poly2", "--eps", "0.1",
                      "--d", "1000", "--format", "csv")[1])
    assert int(table[0]["n_lower"]) >= 1


def test_curse_plot(tmp_path):
    svg = tmp_path / "c.svg"
    assert call("curse", "--theorem", "1", "--eps", "0.1", "--plot", str(svg))[0] == 0
    text = svg.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert "polyline" in text or "path" in text


def test_thread_env(monkeypatch):
    monkeypatch.setenv("CURSEKIT_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("CURSEKIT_THREADS", "junk")
    assert thread_count() == (os.cpu_count() or 1)


def test_weighted_gauss_certify(tmp_path):
    path = tmp_path / "real.txt"
    path.write_text("d=2 n=2 weighted=0\n-1.5 0.3\n2.0 -0.7\n")
    table = rows(call("certify", str(path), "--space", "weighted-gauss", "--theorem", "1",
                      "--format", "csv")[1])
    assert float(table[0]["bound_normalized"]) == pytest.approx(0.5)


def test_module_entry_point(nodes):
    proc = subprocess.run([sys.executable, "-m", "cursekit", "certify", nodes, "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == call("certify", nodes, "--format", "csv")[1]
