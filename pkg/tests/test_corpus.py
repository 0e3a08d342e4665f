import pytest

from strongkkt import corpus
from strongkkt.convexsets import RealSet1D
from strongkkt.errors import ConfigError, UnknownCase


def test_list_cases():
    ids = corpus.list_cases()
    assert ids and len(ids) == len(set(ids))
    assert "ex_4_1_strict_normal_cone" in ids and "rem_4_1_fh_regular" in ids
    assert ids == corpus.list_cases()


def test_run_case_gcq():
    rep = corpus.run_case("ex_5_3_gcq")
    assert rep.passed
    first = rep.checks[0]
    assert first.module == "strongsub" and first.deviates_from_printed


def test_run_case_max_rule():
    rep = corpus.run_case("ex_3_1_max_rule_strict")
    assert rep.passed
    assert [c.computed for c in rep.checks] == ["empty", "empty", "InclusionOnly"]


def test_unknown_case():
    with pytest.raises(UnknownCase):
        corpus.run_case("no_such_case")


def test_compare():
    assert corpus.compare("empty", RealSet1D.empty())
    assert corpus.compare("[0.25,2]", RealSet1D.parse("[0.2504,2]"))
    assert not corpus.compare("[0.25,2]", RealSet1D.parse("[0.26,2]"))
    assert corpus.compare("Holds", "Holds") and not corpus.compare("Holds", "Fails")
    assert corpus.compare(1 / 6, 0.1667)


def test_failure_names_module_and_anchor():
    chk = {"quantity": "q", "op": "strong_set", "fn": {"id": "neg_part"}, "xbar": 0,
           "spec": {"beta": 1, "gamma": 1, "K": "[0,1]"}}
    computed = corpus.evaluate_check(chk)
    res = corpus.CheckResult("q", "strongsub", "[0,1]", str(computed), corpus.compare("[0,1]", computed), "A")
    assert not res.passed and "strongsub" in res.describe() and "(A)" in res.describe()


def test_every_case_passes():
    reports = corpus.run_all()
    assert all(r.passed for r in reports), [c.describe() for r in reports for c in r.failures]


def test_bad_corpus_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("schema_version: 2\ncases: []\n")
    with pytest.raises(ConfigError):
        corpus.list_cases(str(p))
    p.write_text("schema_version: 1\ncases:\n  - {id: a, checks: [{op: strong_set, expect: empty}]}\n")
    with pytest.raises(ConfigError):
        corpus.list_cases(str(p))
