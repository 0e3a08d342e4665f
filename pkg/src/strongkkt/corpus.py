"""Registry of worked examples with expected answers, runnable as an oracle suite."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

import numpy as np
import yaml

from .convexsets import RealSet1D, SetOracle, normal_cone_1d
from .errors import ConfigError, UnknownCase
from .funcspace import FnModel, catalog_instantiate
from .gencvx import QFPInstance, sq_check
from .levelcone import ConstraintSystem, max_rule_check, normal_cone_equality_check, normal_cone_lower
from .optcert import (FJCertificate, closure_hypotheses, fj_search, gcq_check, nnamc_check, penalize_certify,
                      qfp_sufficiency, sufficiency_growth)
from .strongsub import SubdiffSpec, classical_subdiff_1d, f_regularity_check, normal_operator_1d, strong_set_1d

DEFAULT_TOL = 1e-3
OP_MODULE = {
    "strong_set": "strongsub", "classical": "strongsub", "normal_operator": "strongsub", "regularity": "strongsub",
    "normal_cone": "convexsets", "lower_cone": "levelcone", "equality": "levelcone", "max_rule": "levelcone",
    "gcq": "optcert", "closure": "optcert", "fj": "optcert", "nnamc": "optcert", "sufficiency": "optcert",
    "penalize": "optcert", "qfp": "optcert", "sq_check": "gencvx",
}


@lru_cache(maxsize=None)
def _load(path: str | None = None) -> dict:
    if path is None:
        text = resources.files("strongkkt").joinpath("data/corpus.yaml").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict) or doc.get("schema_version") != 1:
        raise ConfigError("corpus file must declare schema_version: 1")
    ids = [c["id"] for c in doc["cases"]]
    if len(ids) != len(set(ids)):
        raise ConfigError("corpus case ids must be unique")
    for c in doc["cases"]:
        for chk in c["checks"]:
            if "anchor" not in chk or "expect" not in chk:
                raise ConfigError(f"{c['id']}: every check needs expect and anchor")
            if chk["op"] not in OP_MODULE:
                raise ConfigError(f"{c['id']}: unknown op {chk['op']}")
    return doc


def list_cases(path: str | None = None) -> list[str]:
    """Case ids in file order."""
    return [c["id"] for c in _load(path)["cases"]]


def get_case(case_id: str, path: str | None = None) -> dict:
    for c in _load(path)["cases"]:
        if c["id"] == case_id:
            return c
    raise UnknownCase(f"unknown corpus case {case_id!r}")


@dataclass(frozen=True)
class CheckResult:
    quantity: str
    module: str
    expected: str
    computed: str
    passed: bool
    anchor: str
    printed: str | None = None
    note: str | None = None

    @property
    def deviates_from_printed(self) -> bool:
        return self.printed is not None

    def to_record(self) -> dict:
        rec = {"quantity": self.quantity, "module": self.module, "expected": self.expected,
               "computed": self.computed, "passed": self.passed, "anchor": self.anchor}
        if self.printed is not None:
            rec["printed"] = self.printed
            rec["note"] = self.note
        return rec

    def describe(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return f"[{state}] {self.module}: {self.quantity}: expected {self.expected}, got {self.computed} ({self.anchor})"


@dataclass
class CaseReport:
    case_id: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_record(self) -> dict:
        return {"id": self.case_id, "passed": self.passed, "checks": [c.to_record() for c in self.checks]}


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _fn(ref, functions: Mapping) -> FnModel:
    if isinstance(ref, Mapping):
        return catalog_instantiate(ref["id"], ref.get("params", {}))
    if ref in functions:
        d = functions[ref]
        return catalog_instantiate(d["id"], d.get("params", {}))
    return catalog_instantiate(ref)


def _spec(d: Mapping) -> SubdiffSpec:
    return SubdiffSpec(float(d["beta"]), float(d["gamma"]), str(d.get("K", "R")))


def _system(chk: Mapping, functions: Mapping) -> ConstraintSystem:
    cons = chk["constraints"]
    gs = [_fn(c["fn"], functions) for c in cons]
    specs = [_spec(c) for c in cons]
    return ConstraintSystem(gs, specs, omega=chk.get("omega"))


def _cert(d: Mapping) -> FJCertificate:
    mu = {int(k): float(v) for k, v in d.get("mu", {}).items()}
    subs = {int(k): np.atleast_1d(np.asarray(v, dtype=float)) for k, v in d.get("subgradients", {}).items()}
    g0 = float(d["gamma0"])
    return FJCertificate(g0, mu, subs, np.atleast_1d(np.asarray(d["v"], dtype=float)), 0.0, 0.0,
                         "KKT" if g0 > 0 else "FJ", "config")


def evaluate_check(chk: Mapping, functions: Mapping | None = None) -> Any:
    """Compute the quantity a check describes: a RealSet1D, a verdict string or a number."""
    functions = functions or {}
    op = chk["op"]
    x = chk.get("xbar", 0.0)
    if op == "strong_set":
        return strong_set_1d(_fn(chk["fn"], functions), float(x), _spec(chk["spec"]))
    if op == "classical":
        return classical_subdiff_1d(_fn(chk["fn"], functions), float(x), chk["kind"]).value
    if op == "normal_operator":
        return normal_operator_1d(_fn(chk["fn"], functions), float(x), bool(chk.get("strict", False)))
    if op == "normal_cone":
        return normal_cone_1d(RealSet1D.parse(str(chk["set"])), float(x))
    if op == "regularity":
        return f_regularity_check(_fn(chk["fn"], functions), float(x), _spec(chk["spec"]),
                                  variant=chk.get("variant", "hadamard")).status.split(" ")[0]
    if op == "lower_cone":
        return normal_cone_lower(_system(chk, functions), x, zero_term=chk.get("zero_term", "normal_operator")).closed
    if op == "gcq":
        v = gcq_check(_system(chk, functions), x, zero_term=chk.get("zero_term", "horizon"))
        return "Holds" if v.holds else "FailsWitness"
    if op == "closure":
        r = closure_hypotheses(_system(chk, functions), x)
        return "Holds" if r["all_hold"] and r["identity_holds"] else "Fails"
    if op == "equality":
        r = normal_cone_equality_check(_system(chk, functions), x)
        return "Holds" if r["all_hypotheses_hold"] and r["equality"] else "Fails"
    if op == "max_rule":
        fns = [_fn(r, functions) for r in chk["fns"]]
        return max_rule_check(fns, float(x), [_spec(s) for s in chk["specs"]], str(chk["K"])).status
    if op == "fj":
        return fj_search(_fn(chk["objective"], functions), _system(chk, functions), x).classification
    if op == "nnamc":
        return nnamc_check(_fn(chk["objective"], functions), _system(chk, functions), x).status
    if op == "sufficiency":
        rep = sufficiency_growth(_fn(chk["objective"], functions), _system(chk, functions), x,
                                 _cert(chk["certificate"]))
        return rep.mu_bar if chk.get("field") == "mu_bar" else ("Holds" if rep.verified else "Fails")
    if op == "penalize":
        return penalize_certify(_fn(chk["objective"], functions), str(chk["omega"]), x).classification
    if op == "sq_check":
        return sq_check(_fn(chk["fn"], functions), RealSet1D.parse(str(chk["region"])),
                        gamma=float(chk["gamma"])).status
    if op == "qfp":
        inst = QFPInstance.from_params(chk["params"])
        rep = qfp_sufficiency(inst, float(chk["alpha_level"]), _fn(chk["objective"], functions), x)
        return rep.mu_bar if chk.get("field") == "mu_bar" else ("Holds" if rep.verified else "Fails")
    raise ConfigError(f"unknown op {op}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def compare(expected, computed, tol: float = DEFAULT_TOL) -> bool:
    if isinstance(computed, RealSet1D):
        return computed.approx_equal(RealSet1D.parse(str(expected)), tol)
    if isinstance(computed, (int, float)) and not isinstance(computed, bool):
        return math.isclose(float(computed), float(expected), rel_tol=0.0, abs_tol=tol)
    return str(computed) == str(expected)


def run_case(case_id: str, tolerances: Mapping | None = None, path: str | None = None) -> CaseReport:
    """Recompute every expected quantity of a case and compare."""
    case = get_case(case_id, path)
    tolerances = tolerances or {}
    functions = case.get("functions", {})
    rep = CaseReport(case_id)
    t0 = time.perf_counter()
    for chk in case["checks"]:
        tol = float(chk.get("tol", tolerances.get("set", DEFAULT_TOL)))
        computed = evaluate_check(chk, functions)
        ok = compare(chk["expect"], computed, tol)
        rep.checks.append(CheckResult(chk["quantity"], OP_MODULE[chk["op"]], str(chk["expect"]), _fmt(computed), ok,
                                      chk["anchor"], None if "printed" not in chk else str(chk["printed"]),
                                      chk.get("note")))
    rep.seconds = time.perf_counter() - t0
    return rep


def run_all(tolerances: Mapping | None = None, path: str | None = None) -> list[CaseReport]:
    return [run_case(cid, tolerances, path) for cid in list_cases(path)]
