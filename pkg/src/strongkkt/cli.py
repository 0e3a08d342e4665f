"""Command-line front end.

    strongkkt <command> [--config PATH] [--case ID] [--tol T] [--seed S] [--plot PATH] [--report PATH]

Commands: subdiff, convexity, normalcone, certify, penalize, corpus.  A run
is described by a YAML or JSON config (see README); ``--case`` instead takes
the matching check of a corpus case.  The JSON report goes to stdout and,
with ``--report``, to a file.

Exit codes: certify 0 = KKT, 1 = FJ only, 2 = not certifiable, 3 = failed
precondition; corpus 0 = all pass, 1 = some failure; other commands 0.
Configuration errors exit with 64, computation errors with 70.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from . import corpus
from .convexsets import RealSet1D, normal_cone_1d
from .errors import (ActiveLevelMismatch, CertificateNotValidated, ComputeError, ConfigError, InfeasiblePoint,
                     PointNotInSet, PointOutsideDomain, StrongKKTError)
from .funcspace import FnModel, catalog_instantiate, sublevel_interval_1d
from .gencvx import modulus_estimate, sq_check
from .levelcone import ConstraintSystem, normal_cone_equality_check, normal_cone_lower
from .optcert import (fj_search, gcq_check, nnamc_check, penalize_certify, sufficiency_growth)
from .strongsub import KINDS, SubdiffSpec, classical_subdiff_1d, normal_operator_1d, strong_set_1d

COMMANDS = ("subdiff", "convexity", "normalcone", "certify", "penalize", "corpus")
EXIT_CONFIG = 64
EXIT_COMPUTE = 70
CERTIFY_EXIT = {"KKT": 0, "FJ": 1, "NotCertifiable": 2}
PRECONDITION_ERRORS = (InfeasiblePoint, PointNotInSet, PointOutsideDomain, ActiveLevelMismatch,
                       CertificateNotValidated)

ALLOWED_KEYS = {
    "command", "functions", "fn", "objective", "constraints", "omega", "xbar", "spec", "kinds", "region",
    "gamma", "estimate_modulus", "delta", "k_schedule", "tol", "seed", "window", "sufficiency", "title",
}
CASE_OPS = {
    "subdiff": ("strong_set",), "convexity": ("sq_check",), "normalcone": ("lower_cone", "gcq", "equality"),
    "certify": ("fj",), "penalize": ("penalize",),
}
ANCHORS = {
    "strong": "ξ ∈ ∂^K_{β,γ} h(x̄) iff max(h(y),h(x̄)) ≥ h(x̄) + (λ/β)⟨ξ,y-x̄⟩ + (λ/2)(γ - λ/β - λγ)|y-x̄|² for y ∈ K, λ ∈ [0,1]",
    "normal_operator": "N_h(x̄) = (S_h(x̄) - x̄)°",
    "sublevel": "S_h(x̄) = {y : h(y) ≤ h(x̄)}",
    "classical": "regular / limiting / horizon / FM / GP / quasiconvex subdifferentials at x̄",
    "sq_check": "h(λy+(1-λ)x) ≤ max(h(y),h(x)) - λ(1-λ)γ|x-y|²/2",
    "normal_cone": "N(Ω, x̄)",
    "lower_cone": "∪_μ (Σ_{μ_j>0} μ_j ∂g_j(x̄) + Σ_{μ_j=0} N_{g_j}(x̄)) ⊂ N(Ω, x̄)",
    "gcq": "N(Ω,x̄) = ∪_μ (Σ_{μ_j>0} μ_j ∂g_j(x̄) + Σ_{μ_j=0} ∂^∞ g_j(x̄))",
    "equality": "N(Ω,x̄) = closure ∪_μ (Σ μ_j ∂g_j(x̄) + Σ ∂^∞ g_j(x̄)) under Slater, polar, regularity, compactness",
    "certificate": "0 ∈ γ0 ∂f(x̄) + γ̂0 ∂^∞f(x̄) + Σ_{μ_j>0} μ_j ∂g_j(x̄) + Σ_{μ_j=0} ∂^∞ g_j(x̄), γ0 + Σμ_j = 1",
    "nnamc": "0 = w + Σ μ_j v_j + Σ v_j^∞ ⇒ w = 0, I+ = ∅, v_j^∞ = 0",
    "growth": "μ̄|y-x̄|² ≤ γ0⟨v,y-x̄⟩ + γ̂0⟨v^∞,y-x̄⟩ on Ω ∩ V, μ̄ = ½Σβ_jγ_jμ_j",
    "penalization": "y_k ∈ argmin f + k dist(·,Ω)² + ½|·-x̄|², 0 ∈ v + N(Ω,x̄)",
}


@dataclass
class RunConfig:
    command: str
    data: dict = field(default_factory=dict)
    tol: float | None = None
    seed: int = 0
    plot: str | None = None
    report: str | None = None
    case: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        extra = set(self.data) - ALLOWED_KEYS
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if self.data.get("command", self.command) != self.command:
            raise ConfigError(f"config is for {self.data['command']!r}, not {self.command!r}")
        if self.command != "corpus" and self.case is None and not self.data:
            raise ConfigError(f"{self.command} needs --config or --case")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("--tol must be positive")

    # -- accessors ------------------------------------------------------------
    def function(self, ref) -> FnModel:
        fns = self.data.get("functions", {})
        try:
            if isinstance(ref, Mapping):
                return catalog_instantiate(ref["id"], ref.get("params", {}))
            if ref in fns:
                return catalog_instantiate(fns[ref]["id"], fns[ref].get("params", {}))
            return catalog_instantiate(str(ref))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad function reference {ref!r}") from exc

    def need(self, key: str):
        if key not in self.data:
            raise ConfigError(f"{self.command} needs {key!r} in the config")
        return self.data[key]

    def xbar(self):
        x = self.data.get("xbar", 0.0)
        try:
            arr = np.atleast_1d(np.asarray(x, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ConfigError("xbar must be a number or a list of numbers") from exc
        return float(arr[0]) if arr.size == 1 else arr

    def spec(self, d: Mapping | None = None) -> SubdiffSpec:
        d = d if d is not None else self.need("spec")
        try:
            return SubdiffSpec(float(d["beta"]), float(d["gamma"]), str(d.get("K", "R")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad spec {d!r}") from exc

    def system(self) -> ConstraintSystem:
        cons = self.need("constraints")
        if not isinstance(cons, list) or not cons:
            raise ConfigError("constraints must be a nonempty list")
        gs = [self.function(c.get("fn")) for c in cons]
        specs = [self.spec(c) for c in cons]
        return ConstraintSystem(gs, specs, omega=self.data.get("omega"))


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def config_from_case(command: str, case_id: str) -> dict:
    """Turn the first corpus check matching the command into a config mapping."""
    case = corpus.get_case(case_id)
    for chk in case["checks"]:
        if chk["op"] in CASE_OPS[command]:
            data = {k: v for k, v in chk.items() if k in ALLOWED_KEYS}
            data["functions"] = case.get("functions", {})
            return data
    raise ConfigError(f"case {case_id!r} has no check usable by {command}")


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, RealSet1D):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def render(report: Mapping) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_subdiff(cfg: RunConfig) -> tuple[dict, int, dict | None]:
    h = cfg.function(cfg.need("fn"))
    x = cfg.xbar()
    if not isinstance(x, float):
        raise ConfigError("subdiff works on the real line")
    spec = cfg.spec()
    S = strong_set_1d(h, x, spec)
    N = normal_operator_1d(h, x)
    lev = sublevel_interval_1d(h, x)
    kinds = cfg.data.get("kinds", [])
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise ConfigError(f"unknown subdifferential kinds {bad}; choose from {list(KINDS)}")
    classical = {k: str(classical_subdiff_1d(h, x, k).value) for k in kinds}
    result = {"function": h.name, "xbar": x, "spec": spec.describe(), "strong": S, "normal_operator": N,
              "sublevel": lev, "classical": classical}
    anchors = {"strong": ANCHORS["strong"], "normal_operator": ANCHORS["normal_operator"],
               "sublevel": ANCHORS["sublevel"]}
    if classical:
        anchors["classical"] = ANCHORS["classical"]
    plot = {"function": h, "xbar": x, "sublevel": lev, "subdiff": S, "normal_cone": N,
            "subdiff_label": "strong", "title": f"{h.name} at {x:g}", "window": cfg.data.get("window", 2.0)}
    return {"result": result, "paper_anchors": anchors}, 0, plot


def _cmd_convexity(cfg: RunConfig) -> tuple[dict, int, dict | None]:
    h = cfg.function(cfg.need("fn"))
    region = cfg.data.get("region")
    if isinstance(region, str):
        region = RealSet1D.parse(region)
    gamma = float(cfg.data.get("gamma", 0.0))
    rep = sq_check(h, region, gamma=gamma, seed=cfg.seed)
    result = {"function": h.name, "check": rep.to_record()}
    if cfg.data.get("estimate_modulus"):
        lo, hi = modulus_estimate(h, region)
        result["modulus_bracket"] = [lo, hi]
    return {"result": result, "paper_anchors": {"check": ANCHORS["sq_check"]}}, 0, None


def _cmd_normalcone(cfg: RunConfig) -> tuple[dict, int, dict | None]:
    cs = cfg.system()
    x = cfg.xbar()
    low = normal_cone_lower(cs, x)
    result: dict[str, Any] = {"lower_estimate": low.to_record()}
    anchors = {"lower_estimate": ANCHORS["lower_cone"]}
    plot = None
    if cs.dim == 1:
        N = normal_cone_1d(cs.omega_1d, x)
        result["normal_cone"] = N
        result["gcq"] = gcq_check(cs, x).to_record()
        result["equality"] = normal_cone_equality_check(cs, x)
        anchors.update(normal_cone=ANCHORS["normal_cone"], gcq=ANCHORS["gcq"], equality=ANCHORS["equality"])
        plot = {"function": cs.gs[0], "xbar": x, "feasible": cs.omega_1d, "subdiff": low.closed,
                "normal_cone": N, "subdiff_label": "lower estimate", "title": f"Omega = {cs.omega_1d}",
                "window": cfg.data.get("window", 2.0)}
    return {"result": result, "paper_anchors": anchors}, 0, plot


def _cmd_certify(cfg: RunConfig) -> tuple[dict, int, dict | None]:
    f = cfg.function(cfg.need("objective"))
    cs = cfg.system()
    x = cfg.xbar()
    tol = cfg.tol if cfg.tol is not None else float(cfg.data.get("tol", 1e-7))
    cert = fj_search(f, cs, x, tol=tol)
    result: dict[str, Any] = {"certificate": cert.to_record()}
    anchors = {"certificate": ANCHORS["certificate"]}
    plot = None
    if cs.dim == 1:
        result["gcq"] = gcq_check(cs, x).to_record()
        result["nnamc"] = nnamc_check(f, cs, x).to_record()
        anchors.update(gcq=ANCHORS["gcq"], nnamc=ANCHORS["nnamc"])
        plot = {"function": f, "xbar": x, "feasible": cs.omega_1d,
                "subdiff": normal_cone_lower(cs, x).closed, "normal_cone": normal_cone_1d(cs.omega_1d, x),
                "subdiff_label": "lower estimate", "title": f"{cert.classification} at {x:g}",
                "window": cfg.data.get("window", 2.0)}
    if cfg.data.get("sufficiency", True) and cert.classification != "NotCertifiable":
        result["growth"] = sufficiency_growth(f, cs, x, cert, seed=cfg.seed).to_record()
        anchors["growth"] = ANCHORS["growth"]
    return {"result": result, "paper_anchors": anchors}, CERTIFY_EXIT[cert.classification], plot


def _cmd_penalize(cfg: RunConfig) -> tuple[dict, int, dict | None]:
    f = cfg.function(cfg.need("objective"))
    omega = str(cfg.need("omega"))
    kw = {}
    if "delta" in cfg.data:
        kw["delta"] = float(cfg.data["delta"])
    if "k_schedule" in cfg.data:
        kw["k_schedule"] = [float(k) for k in cfg.data["k_schedule"]]
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    rep = penalize_certify(f, omega, cfg.xbar(), **kw)
    return {"result": rep.to_record(), "paper_anchors": {"result": ANCHORS["penalization"]}}, 0, None


def _cmd_corpus(cfg: RunConfig) -> tuple[dict, int, dict | None]:
    tols = {"set": cfg.tol} if cfg.tol is not None else None
    ids = [cfg.case] if cfg.case else corpus.list_cases()
    reports = [corpus.run_case(i, tols) for i in ids]
    anchors = {f"{r.case_id}/{c.quantity}": c.anchor for r in reports for c in r.checks}
    result = {"cases": [r.to_record() for r in reports], "passed": sum(r.passed for r in reports),
              "total": len(reports)}
    return {"result": result, "paper_anchors": anchors}, 0 if all(r.passed for r in reports) else 1, None


HANDLERS = {"subdiff": _cmd_subdiff, "convexity": _cmd_convexity, "normalcone": _cmd_normalcone,
            "certify": _cmd_certify, "penalize": _cmd_penalize, "corpus": _cmd_corpus}


def dispatch(cfg: RunConfig) -> tuple[dict, int]:
    """Run one command; returns the report and its exit code."""
    try:
        body, code, plot = HANDLERS[cfg.command](cfg)
    except PRECONDITION_ERRORS as exc:
        if cfg.command != "certify":
            raise
        body, code, plot = {"result": {"precondition_failure": f"{type(exc).__name__}: {exc}"},
                            "paper_anchors": {}}, 3, None
    report = {"command": cfg.command, "config": cfg.data, "seed": cfg.seed, "exit_code": code, **body}
    if cfg.plot:
        if plot is None:
            raise ConfigError(f"--plot is available for subdiff, normalcone and certify in dim 1, not {cfg.command}")
        from .plotting import emit_plot

        emit_plot(plot, cfg.plot)
        report["plot"] = cfg.plot
    return report, code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strongkkt", description="Strong subdifferentials and FJ/KKT certificates.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="YAML or JSON run configuration")
    p.add_argument("--case", help="corpus case id")
    p.add_argument("--tol", type=float, help="classification / comparison tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled grids")
    p.add_argument("--plot", help="write an SVG figure here")
    p.add_argument("--report", help="write the JSON report here")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        data = load_config(args.config)
        if args.case and args.command != "corpus" and not data:
            data = config_from_case(args.command, args.case)
        cfg = RunConfig(args.command, data, args.tol, args.seed, args.plot, args.report,
                        args.case if args.command == "corpus" else None)
        report, code = dispatch(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, TypeError) as exc:
        print(f"config error: invalid value: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ComputeError, StrongKKTError) as exc:
        print(f"compute error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    text = render(report)
    sys.stdout.write(text)
    if args.report:
        try:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write report: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
    return code
