import json
import subprocess
import sys

import pytest

from quatpack import cli
from quatpack.orders import TABLE2


def run(args, tmp_path=None):
    return cli.main([str(a) for a in args])


def test_usage_errors(capsys):
    assert run(["enumerate"]) == cli.EXIT_USAGE
    assert run(["enumerate", "--cover", "nonsense"]) == cli.EXIT_USAGE
    assert run(["enumerate", "--cover", "m=5", "--bend", "-3"]) == cli.EXIT_USAGE
    assert run(["frobnicate"]) == cli.EXIT_USAGE
    assert run(["enumerate", "--cover", "dim4:-7,-21"]) == cli.EXIT_USAGE


def test_enumerate_writes_census(tmp_path):
    out = tmp_path / "c.jsonl"
    svg = tmp_path / "c.svg"
    assert run(["enumerate", "--cover", "m=5", "--bend", 30, "--out", out, "--svg", svg]) == cli.EXIT_OK
    lines = out.read_text().splitlines()
    head = json.loads(lines[0])
    assert head["saturated"] is True and head["count"] == len(lines) - 1
    assert svg.read_text().startswith("<svg")


def test_enumerate_depth_bound_is_unsaturated(tmp_path):
    out = tmp_path / "c.jsonl"
    assert run(["enumerate", "--cover", "m=5", "--bend", 200, "--depth", 1, "--out", out]) == \
        cli.EXIT_UNSATURATED


def test_enumerate_super_kind(tmp_path):
    out = tmp_path / "s.jsonl"
    assert run(["enumerate", "--cover", "dim4:-1,-6", "--kind", "super", "--bend", 24, "--out", out]) == 0
    assert json.loads(out.read_text().splitlines()[0])["kind"] == "super"


def test_verify_ok_and_not_covered(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify", "--cover", "disc=20", "--bend", 200, "--out", out]) == cli.EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["status"] == "ok" and rep["symbolic_pass"] and rep["empirical_pass"]
    assert rep["congruence_class"] == "sqrt(5/2) * ({5} + 10 Z)"
    assert run(["verify", "--cover", "dim5:-1,-1", "--out", out]) == cli.EXIT_OK
    assert json.loads(out.read_text())["status"] == "not_covered"


def test_verify_mismatch_exit(monkeypatch, tmp_path):
    from quatpack import forbidden

    def boom(ball, census):
        raise forbidden.CertificateFailure("forced")
    monkeypatch.setattr(forbidden, "verify_forbidden", boom)
    assert run(["verify", "--cover", "disc=20", "--bend", 50, "--out", tmp_path / "v.json"]) == \
        cli.EXIT_MISMATCH


def test_density_report(tmp_path):
    out = tmp_path / "d.json"
    assert run(["density", "--cover", "m=5", "--bend", 1000, "--out", out]) == 0
    rep = json.loads(out.read_text())
    assert rep["partial_density"][-1]["density"] < rep["upper_bound"]


def test_classify_dim4_family(tmp_path):
    out = tmp_path / "k.json"
    assert run(["classify", "--dim", 4, "--family", "(-1,n)", "--n", -6, "--out", out]) == 0
    assert "6" in out.read_text()


def test_classify_dim3(tmp_path):
    out = tmp_path / "k.json"
    assert run(["classify", "--dim", 3, "--disc-bound", 50, "--out", out]) == 0
    assert len(json.loads(out.read_text())["orders"]) == 16


def test_classify_dim5_golden_mismatch(monkeypatch, tmp_path):
    bad = [r if r[0] != "T2:(-1,-7)" else r[:4] + (11,) + r[5:] for r in TABLE2]
    monkeypatch.setattr(cli, "_golden_dim5", lambda: {r[0]: (r[4], tuple(r[5])) for r in bad})
    monkeypatch.setattr("quatpack.orders.dim5_catalog", _fake_dim5)
    assert run(["classify", "--dim", 5, "--out", tmp_path / "k.json"]) == cli.EXIT_MISMATCH


def _fake_dim5(gate=119, log_data=None):
    from quatpack import orders
    out = [orders.CatalogEntry(orders.table2_order(r[0]), orders.table2_cover(r[0]), r[0], tuple(r[5]))
           for r in TABLE2]
    lg = log_data or orders.Dim5SearchLog()
    return out, [], lg


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bend_bound": 20}))
    out = tmp_path / "c.jsonl"
    assert run(["--config", cfg, "enumerate", "--cover", "m=5", "--out", out]) == 0
    assert json.loads(out.read_text().splitlines()[0])["bend_bound"] == 20
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["--config", cfg, "enumerate", "--cover", "m=5"]) == cli.EXIT_USAGE


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "quatpack", "enumerate", "--cover", "zzz"],
                       capture_output=True, text=True)
    assert r.returncode == 1 and "error" in r.stderr


@pytest.mark.parametrize("sel", ["m=5", "dim3:5", "disc=20", "dim4:-1,-6", "dim5:-1,-7", "T2:(-2,-26)"])
def test_resolve_cover(sel):
    c = cli.resolve_cover(sel)
    assert c.nrm_u > 0
