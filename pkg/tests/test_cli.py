import json
from pathlib import Path

import pytest

from strongkkt.cli import EXIT_COMPUTE, EXIT_CONFIG, main
from strongkkt.convexsets import RealSet1D


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


KKT_CONFIG = """command: certify
objective: {id: linear}
constraints:
  - {fn: {id: recip_right}, beta: 1, gamma: 1, K: R}
xbar: 0
"""


def test_certify_kkt_config(tmp_path, capsys):
    code, rep = run(["certify", "--config", write(tmp_path, "c.yaml", KKT_CONFIG)], capsys)
    assert code == 0
    assert rep["result"]["certificate"]["classification"] == "KKT"
    assert "certificate" in rep["paper_anchors"]
    assert rep["result"]["growth"]["verified"]


def test_certify_nonminimizer_case(capsys):
    code, rep = run(["certify", "--case", "ex_5_1_fj_nonminimizer"], capsys)
    assert code == 2 and rep["result"]["certificate"]["classification"] == "NotCertifiable"


def test_certify_precondition(tmp_path, capsys):
    code, rep = run(["certify", "--config", write(tmp_path, "c.yaml", KKT_CONFIG.replace("xbar: 0", "xbar: 2"))], capsys)
    assert code == 3 and "precondition_failure" in rep["result"]


def test_corpus_command(capsys):
    code, rep = run(["corpus"], capsys)
    assert code == 0 and rep["result"]["passed"] == rep["result"]["total"]


def test_malformed_config(tmp_path, capsys):
    assert main(["certify", "--config", write(tmp_path, "bad.yaml", "objective: [unclosed")]) == EXIT_CONFIG
    assert main(["certify", "--config", write(tmp_path, "x.yaml", KKT_CONFIG + "bogus: 1\n")]) == EXIT_CONFIG
    assert main(["subdiff"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["certify", "--config", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG
    capsys.readouterr()


def test_compute_error(tmp_path, capsys):
    cfg = "command: subdiff\nfn: {id: recip_right}\nxbar: 3\nspec: {beta: 1, gamma: 1, K: R}\n"
    assert main(["subdiff", "--config", write(tmp_path, "s.yaml", cfg)]) == EXIT_COMPUTE
    capsys.readouterr()


def test_subdiff_json_and_report(tmp_path, capsys):
    cfg = json.dumps({"command": "subdiff", "fn": {"id": "recip_right"}, "xbar": 0,
                      "spec": {"beta": 1, "gamma": 1, "K": "R"}, "kinds": ["greenberg_pierskalla"]})
    out = tmp_path / "r.json"
    code, rep = run(["subdiff", "--config", write(tmp_path, "s.json", cfg), "--report", str(out)], capsys)
    assert code == 0
    assert RealSet1D.parse(rep["result"]["strong"]).approx_equal(RealSet1D.parse("(-inf,-1/2]"), 1e-6)
    assert rep["result"]["classical"]["greenberg_pierskalla"] == "(-inf,0)"
    assert json.loads(out.read_text()) == rep


def test_reports_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        main(["normalcone", "--case", "ex_5_3_gcq", "--report", str(p)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_plots_are_deterministic(tmp_path, capsys):
    paths = [tmp_path / "p1.svg", tmp_path / "p2.svg"]
    for p in paths:
        assert main(["normalcone", "--case", "ex_5_3_gcq", "--plot", str(p)]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_text().lstrip().startswith("<?xml")


def test_plot_empty_set(tmp_path, capsys):
    cfg = "command: subdiff\nfn: {id: recip_outside}\nxbar: 0\nspec: {beta: 1, gamma: 1, K: R}\n"
    p = tmp_path / "e.svg"
    assert main(["subdiff", "--config", write(tmp_path, "s.yaml", cfg), "--plot", str(p)]) == 0
    capsys.readouterr()
    assert p.stat().st_size > 0


@pytest.mark.parametrize("cmd,case", [("subdiff", "rem_4_1_fh_regular"), ("penalize", "penalization_dichotomy"),
                                      ("convexity", "strong_quasiconvexity_examples")])
def test_case_commands(cmd, case, capsys):
    code, rep = run([cmd, "--case", case], capsys)
    assert code == 0 and rep["command"] == cmd and rep["paper_anchors"]


def test_infinity_encoded_as_string(capsys):
    code, rep = run(["penalize", "--case", "penalization_dichotomy"], capsys)
    text = json.dumps(rep)
    assert "Infinity" not in text and "NaN" not in text


CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.yaml"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_sample_configs_run(path, capsys):
    cmd = path.stem.split("_")[0]
    code, rep = run([cmd, "--config", str(path)], capsys)
    assert code == 0 and rep["command"] == cmd
