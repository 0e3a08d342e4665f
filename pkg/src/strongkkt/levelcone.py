"""Normal cones of Omega = {x : g_j(x) <= 0 for all j} from strong subdifferentials.

In one dimension every ingredient (strong subdifferentials, horizon sets,
normal operators, tangent cones) is an exact interval union, so the cone
expressions are assembled by interval arithmetic.  Sign patterns of the
multipliers (mu_j > 0 versus mu_j = 0) are enumerated explicitly; the
magnitudes are absorbed by positive hulls because every expression is
positively homogeneous in mu.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .convexsets import (TOL, RealSet1D, SetOracle, as_realset, normal_cone_1d, polar_member, sample_points,
                         support_value, tangent_contains)
from .errors import InfeasiblePoint, InvalidParams, PointNotInSet, UnsupportedDim
from .funcspace import FnModel, _mask_to_set, eval_extended, pointwise_max
from .strongsub import (SubdiffSpec, classical_subdiff_1d, f_regularity_check, normal_operator_1d, strong_member,
                        strong_set_1d)

INF = math.inf
EPS_ACT = 1e-8
ZERO_SNAP = 1e-8


# ---------------------------------------------------------------------------
# constraint systems
# ---------------------------------------------------------------------------


def feasible_set_1d(gs: Sequence[FnModel], window: float = 10.0, n: int = 20001, far_field: float = 1e8) -> RealSet1D:
    """Grid reconstruction of {x : g_j(x) <= 0 for all j} on the line.

    Breakpoints are included exactly; a component still feasible at the end of
    the geometric far field is reported as unbounded.
    """
    bps = sorted({float(b) for g in gs for b in g.annotations.get("breakpoints", ())})
    tiny = np.geomspace(1e-12, 1e-3, 8)
    ff = np.geomspace(window, far_field, 64)
    parts = [np.linspace(-window, window, n), ff, -ff]
    for b in bps:
        parts += [np.array([b]), b + tiny, b - tiny]
    y = np.unique(np.concatenate(parts))
    mask = np.ones(y.size, dtype=bool)
    for g in gs:
        mask &= g.evaluate(y[:, None]) <= 0.0
    S = _mask_to_set(y, mask)
    if S.is_empty:
        return S
    from .convexsets import Interval

    ivs = list(S.intervals)
    if mask[-1]:
        ivs[-1] = Interval(ivs[-1].lo, INF, ivs[-1].lo_closed, False)
    if mask[0]:
        ivs[0] = Interval(-INF, ivs[0].hi, False, ivs[0].hi_closed)
    return RealSet1D(ivs)


@dataclass
class ConstraintSystem:
    """Constraints g_j <= 0 with per-constraint (beta_j, gamma_j, K_j) and the feasible set."""

    gs: Sequence[FnModel]
    specs: Sequence[SubdiffSpec]
    omega: SetOracle | RealSet1D | str | None = None
    names: Sequence[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gs = list(self.gs)
        self.specs = list(self.specs)
        if len(self.gs) != len(self.specs):
            raise InvalidParams("one SubdiffSpec per constraint is required")
        if self.gs and any(g.dim != self.gs[0].dim for g in self.gs):
            raise InvalidParams("constraints must share a dimension")
        if self.names is None:
            self.names = [g.name for g in self.gs]
        if isinstance(self.omega, (str, RealSet1D)):
            self.omega = SetOracle.from_interval(as_realset(self.omega), name="Omega")
        if self.omega is None and self.gs and self.gs[0].dim == 1:
            self.omega = SetOracle.from_interval(feasible_set_1d(self.gs), name="Omega")
            self.meta.setdefault("omega_source", "grid")

    @property
    def dim(self) -> int:
        return self.gs[0].dim if self.gs else (self.omega.dim if self.omega is not None else 1)

    @property
    def omega_1d(self) -> RealSet1D:
        if self.omega is None or self.omega.interval is None:
            raise UnsupportedDim("exact feasible set available in dim = 1 only")
        return self.omega.interval

    def values(self, xbar) -> np.ndarray:
        return np.array([eval_extended(g, xbar) for g in self.gs])


def active_set(cs: ConstraintSystem, xbar, eps_act: float = EPS_ACT) -> tuple[int, ...]:
    """Indices j (0-based) with |g_j(xbar)| <= eps_act."""
    vals = cs.values(xbar)
    if np.any(vals > eps_act):
        j = int(np.argmax(vals))
        raise InfeasiblePoint(f"constraint {cs.names[j]} is violated at {np.asarray(xbar).tolist()}: {vals[j]:g}")
    return tuple(int(j) for j in np.flatnonzero(np.abs(vals) <= eps_act))


def _scalar(xbar) -> float:
    return float(np.asarray(xbar, dtype=float).reshape(-1)[0])


@dataclass
class _Pieces:
    active: tuple[int, ...]
    strong: dict
    horizon: dict
    normal_op: dict


def constraint_pieces(cs: ConstraintSystem, xbar, eps_act: float = EPS_ACT) -> _Pieces:
    """Exact 1-D strong subdifferentials, horizon sets and normal operators of the active constraints."""
    if cs.dim != 1:
        raise UnsupportedDim("exact cone assembly needs dim = 1")
    x = _scalar(xbar)
    act = active_set(cs, x, eps_act)
    strong, hor, nop = {}, {}, {}
    for j in act:
        strong[j] = strong_set_1d(cs.gs[j], x, cs.specs[j])
        hor[j] = classical_subdiff_1d(cs.gs[j], x, "horizon").value
        nop[j] = normal_operator_1d(cs.gs[j], x)
    return _Pieces(act, strong, hor, nop)


# ---------------------------------------------------------------------------
# cone descriptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeDescription:
    """Union over multiplier sign patterns of sum_{mu_j>0} mu_j A_j + sum_{mu_j=0} Z_j."""

    families: tuple[dict, ...]
    union: RealSet1D | None
    closed: RealSet1D | None
    closure_flag: bool
    samples: np.ndarray | None = None
    flags: tuple[str, ...] = ()

    @property
    def value(self) -> RealSet1D | None:
        return self.closed

    def to_record(self) -> dict:
        return {
            "families": [{k: (str(v) if isinstance(v, RealSet1D) else v) for k, v in f.items()} for f in self.families],
            "union": None if self.union is None else str(self.union),
            "closure": None if self.closed is None else str(self.closed),
            "closure_changed": self.closure_flag,
            "flags": list(self.flags),
        }


def snap_zero(S: RealSet1D, eps: float = ZERO_SNAP) -> RealSet1D:
    """Move endpoints within eps of 0 onto 0 so bisection noise cannot flip a cone's sign."""
    from .convexsets import Interval

    def s(e):
        return 0.0 if abs(e) <= eps else e

    return RealSet1D([Interval(s(iv.lo), s(iv.hi), iv.lo_closed, iv.hi_closed) for iv in S.intervals])


def assemble_cone(active: Sequence[int], positive_sets: dict, zero_sets: dict) -> ConeDescription:
    """Exact 1-D union over sign patterns; an empty active set gives {0}."""
    fams = []
    union = RealSet1D.empty()
    active = tuple(active)
    if not active:
        union = RealSet1D.point(0.0)
        fams.append({"positive": [], "zero": [], "set": union})
    for pattern in itertools.product((True, False), repeat=len(active)):
        acc = RealSet1D.point(0.0)
        for j, pos in zip(active, pattern):
            acc = acc + (snap_zero(positive_sets[j]).positive_hull() if pos else zero_sets[j])
        fams.append({"positive": [j for j, p in zip(active, pattern) if p],
                     "zero": [j for j, p in zip(active, pattern) if not p], "set": acc})
        union = union | acc
    closed = union.closure()
    return ConeDescription(tuple(fams), union, closed, closed != union)


def _cone_samples(S: RealSet1D, n: int = 7) -> np.ndarray:
    """Finite elements of a 1-D cone-like set: endpoints, midpoints, far points."""
    pts = []
    for iv in S.intervals:
        lo = iv.lo if math.isfinite(iv.lo) else (iv.hi - 1e3 if math.isfinite(iv.hi) else -1e3)
        hi = iv.hi if math.isfinite(iv.hi) else lo + 1e3
        pts.extend(np.linspace(lo, hi, n))
    return np.array(pts, dtype=float)


def normal_cone_lower(cs: ConstraintSystem, xbar, zero_term: str = "normal_operator", grid=None,
                      subgradients: dict | None = None, tol: float = TOL) -> ConeDescription:
    """Lower estimate of N(Omega, xbar) from strong subdifferentials and normal operators.

    dim = 1 is exact.  In higher dimension the caller supplies sampled
    subgradients per active constraint; they are membership-checked, combined
    on a multiplier grid and every combination is tested against the polar of
    Omega - xbar.
    """
    if zero_term not in ("normal_operator", "horizon"):
        raise InvalidParams("zero_term must be 'normal_operator' or 'horizon'")
    if cs.dim == 1:
        pc = constraint_pieces(cs, xbar)
        zero = pc.normal_op if zero_term == "normal_operator" else pc.horizon
        desc = assemble_cone(pc.active, pc.strong, zero)
        flags = [f"empty strong subdifferential for {cs.names[j]}" for j in pc.active if pc.strong[j].is_empty]
        samples = _cone_samples(desc.closed) if not desc.closed.is_empty else np.zeros(0)
        if samples.size and cs.omega is not None:
            x = _scalar(xbar)
            g = grid if grid is not None else sample_points(cs.omega, x, far_field=1e4)
            for v in samples:
                pv = polar_member(cs.omega, x, v, g, tol=tol * max(1.0, abs(v)))
                if not pv.member:
                    flags.append(f"sample {v:g} not polar to Omega at witness {pv.witness.tolist()}")
        return ConeDescription(desc.families, desc.union, desc.closed, desc.closure_flag,
                               samples.reshape(-1, 1), tuple(flags))
    return _normal_cone_lower_nd(cs, xbar, subgradients or {}, grid, tol)


def _normal_cone_lower_nd(cs: ConstraintSystem, xbar, subgradients: dict, grid, tol) -> ConeDescription:
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    act = active_set(cs, xbar)
    members = {}
    flags = []
    for j in act:
        cand = np.atleast_2d(np.asarray(subgradients.get(j, np.zeros((0, cs.dim))), dtype=float))
        keep = [w for w in cand if cand.size and strong_member(cs.gs[j], xbar, cs.specs[j], w).member]
        if cand.size and len(keep) < cand.shape[0]:
            flags.append(f"{cand.shape[0] - len(keep)} supplied subgradients of {cs.names[j]} rejected")
        members[j] = np.array(keep).reshape(-1, cs.dim)
    mus = np.linspace(0.0, 2.0, 5)
    combos = [np.zeros(cs.dim)]
    for j in act:
        if members[j].shape[0] == 0:
            continue
        combos = [c + mu * w for c in combos for mu in mus for w in members[j]]
    samples = np.unique(np.array(combos), axis=0)
    if cs.omega is not None and samples.shape[0]:
        g = grid if grid is not None else sample_points(cs.omega, xbar, n_uniform=4096)
        for v in samples:
            pv = polar_member(cs.omega, xbar, v, g, tol=tol * max(1.0, float(np.linalg.norm(v))))
            if not pv.member:
                flags.append(f"sample {v.tolist()} not polar to Omega")
    fam = ({"positive": list(act), "zero": [], "set": "sampled"},)
    return ConeDescription(fam, None, None, False, samples, tuple(flags))


# ---------------------------------------------------------------------------
# Slater-type conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlaterVerdict:
    holds: bool
    direction: np.ndarray | None
    supports: dict
    vacuous: bool = False
    variant: str = "S_N"

    @property
    def status(self) -> str:
        if self.holds:
            return "Holds"
        return "NotFound (vacuous: empty strong subdifferential)" if self.vacuous else "NotFound"

    def to_record(self) -> dict:
        return {"status": self.status, "variant": self.variant,
                "direction": None if self.direction is None else self.direction.tolist(),
                "supports": {str(k): v for k, v in self.supports.items()}}


def _in_feasible_directions(K: SetOracle, xbar: np.ndarray, d: np.ndarray) -> bool:
    """d in R_+(K - xbar): some positive multiple of d lands in K."""
    ts = np.geomspace(1e-8, 1e3, 48)
    return bool(np.any(K.contains(xbar[None, :] + ts[:, None] * d[None, :])))


def slater_check(cs: ConstraintSystem, xbar, variant: str = "S_N", candidate_dirs=None, K=None,
                 subdiffs: dict | None = None) -> SlaterVerdict:
    """Search a direction with sigma(strong subdifferential of g_j; d) < 0 for every active j.

    Variant "S" asks d in D(K, xbar) for the common set K; "S_N" asks d in the
    tangent cone of every K_j.  Default candidates are y - xbar for sampled
    feasible y together with coordinate directions.
    """
    if variant not in ("S", "S_N"):
        raise InvalidParams("variant must be 'S' or 'S_N'")
    xb = np.asarray(xbar, dtype=float).reshape(-1)
    act = active_set(cs, xb)
    if subdiffs is None:
        if cs.dim != 1:
            raise UnsupportedDim("supply subdifferentials when dim > 1")
        subdiffs = {j: strong_set_1d(cs.gs[j], float(xb[0]), cs.specs[j]) for j in act}
    if not act:
        return SlaterVerdict(True, np.zeros(cs.dim), {}, False, variant)
    if any(isinstance(subdiffs[j], RealSet1D) and subdiffs[j].is_empty for j in act):
        return SlaterVerdict(False, None, {j: -INF for j in act}, True, variant)
    if candidate_dirs is None:
        cands = list(np.vstack([np.eye(cs.dim), -np.eye(cs.dim)]))
        if cs.omega is not None:
            Y = sample_points(cs.omega, xb, n_uniform=256, far_field=10.0)
            Y = Y[np.any(Y != xb[None, :], axis=1)]
            cands += list(Y[:: max(1, Y.shape[0] // 64)] - xb[None, :])
    else:
        cands = [np.atleast_1d(np.asarray(d, dtype=float)) for d in candidate_dirs]
    for d in cands:
        if variant == "S":
            Kor = K if isinstance(K, SetOracle) else SetOracle.from_interval(as_realset(K if K is not None else "R"))
            if not _in_feasible_directions(Kor, xb, d):
                continue
        else:
            if not all(tangent_contains(cs.specs[j].oracle, xb, d) for j in act):
                continue
        sup = {j: support_value(subdiffs[j], d) for j in act}
        if all(v < 0 for v in sup.values()):
            return SlaterVerdict(True, np.asarray(d, dtype=float), sup, False, variant)
    return SlaterVerdict(False, None, {}, False, variant)


# ---------------------------------------------------------------------------
# equality theorem
# ---------------------------------------------------------------------------


def _tangent_1d(K: SetOracle, x: float) -> RealSet1D:
    S = K.interval
    if S is None:
        raise UnsupportedDim("tangent cone of a non-interval set")
    return normal_cone_1d(S.closure(), x).polar()


def _usc_1d(g: FnModel, x: float, sched_t: np.ndarray) -> tuple[str, bool]:
    ann = g.annotations.get("usc")
    if ann is not None:
        return ("verified-exact" if ann else "failed(annotated not usc)"), bool(ann)
    gx = eval_extended(g, x)
    vals = g.evaluate(np.concatenate([x + sched_t, x - sched_t])[:, None])
    ok = bool(np.all(vals <= gx + 1e-6))
    return ("verified-sampled" if ok else "failed(sampled)"), ok


def normal_cone_equality_check(cs: ConstraintSystem, xbar) -> dict:
    """Hypotheses (Slater, polar inclusion, horizon/usc/F_H-regularity, compactness) and the equality itself."""
    if cs.dim != 1:
        raise UnsupportedDim("the equality check is exact in dim = 1 only")
    x = _scalar(xbar)
    pc = constraint_pieces(cs, x)
    hyp: dict[str, Any] = {}
    flags: list[str] = []

    sl = slater_check(cs, x, "S_N", subdiffs=pc.strong)
    hyp["a_slater"] = {"status": "verified-exact" if sl.holds else ("vacuous-flagged" if sl.vacuous else "failed"),
                       "direction": None if sl.direction is None else sl.direction.tolist()}

    lhs = RealSet1D.real_line()
    tang = RealSet1D.real_line()
    for j in pc.active:
        if pc.horizon[j].is_empty or pc.strong[j].is_empty:
            flags.append(f"cone of an empty set taken as {{0}} for {cs.names[j]}")
        lhs = lhs & pc.horizon[j].cone().polar() & snap_zero(pc.strong[j]).cone().polar()
        tang = tang & _tangent_1d(cs.specs[j].oracle, x)
    ok_b = lhs.issubset(tang)
    hyp["b_polar_inclusion"] = {"status": "verified-exact" if ok_b else "failed",
                                "lhs": str(lhs), "tangent": str(tang),
                                "witness": None if ok_b else lhs.witness_outside(tang)}

    ts = np.geomspace(1e-2, 1e-8, 16)
    c_items = {}
    ok_c = True
    for j in pc.active:
        inc = pc.horizon[j].issubset(pc.normal_op[j])
        usc_status, usc_ok = _usc_1d(cs.gs[j], x, ts)
        reg = f_regularity_check(cs.gs[j], x, cs.specs[j], variant="hadamard", subdiff=pc.strong[j])
        c_items[cs.names[j]] = {"horizon_in_normal_operator": inc, "usc": usc_status, "fh_regular": reg.status}
        ok_c &= inc and usc_ok and reg.regular
    hyp["c_horizon_usc_regular"] = {"status": "verified-sampled" if ok_c else "failed", "items": c_items}

    d_items = {}
    ok_d = True
    for j in pc.active:
        S = snap_zero(pc.strong[j])
        d1 =(not S.is_empty) and S.is_bounded
        cone = S.cone()
        d2 = (not S.is_empty) and cone == cone.closure() and not S.contains(0.0)
        d_items[cs.names[j]] = {"d1_compact": d1, "d2_closed_cone_without_zero": d2}
        ok_d &= d1 or d2
    hyp["d_compact_or_pointed"] = {"status": "verified-exact" if ok_d else "failed", "items": d_items}

    rhs_desc = assemble_cone(pc.active, pc.strong, pc.horizon)
    rhs = rhs_desc.union.hull().closure()
    N = normal_cone_1d(cs.omega_1d, x)
    all_ok = sl.holds and ok_b and ok_c and ok_d
    equal = rhs == N
    return {
        "active": list(pc.active),
        "hypotheses": hyp,
        "all_hypotheses_hold": all_ok,
        "rhs": str(rhs),
        "normal_cone": str(N),
        "equality": equal,
        "inclusion": rhs.issubset(N),
        "consistent": equal or not all_ok,
        "flags": flags,
        "strong": {cs.names[j]: str(pc.strong[j]) for j in pc.active},
        "horizon": {cs.names[j]: str(pc.horizon[j]) for j in pc.active},
    }


# ---------------------------------------------------------------------------
# max rule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaxRuleReport:
    status: str
    union_side: RealSet1D
    sup_side: RealSet1D
    witness: float | None
    forward_ok: bool
    hypotheses: dict
    gamma_m: float

    def to_record(self) -> dict:
        return {"status": self.status, "union_side": str(self.union_side), "sup_side": str(self.sup_side),
                "witness": self.witness, "forward_inclusion": self.forward_ok, "gamma_m": self.gamma_m,
                "hypotheses": self.hypotheses}


def max_rule_check(gs: Sequence[FnModel], xbar, specs: Sequence[SubdiffSpec], K, tol: float = 1e-6) -> MaxRuleReport:
    """Compare the closed convex hull of the active pieces with the subdifferential of the max."""
    gs, specs = list(gs), list(specs)
    if gs[0].dim != 1:
        raise UnsupportedDim("max_rule_check is exact in dim = 1 only")
    betas = {s.beta for s in specs}
    if len(betas) != 1:
        raise InvalidParams("the max rule uses a common beta")
    beta = betas.pop()
    x = _scalar(xbar)
    g = pointwise_max(gs)
    gx = eval_extended(g, x)
    act = [j for j, gj in enumerate(gs) if abs(eval_extended(gj, x) - gx) <= EPS_ACT]
    gamma_m = min(specs[j].gamma for j in act)
    Kset = as_realset(K) if not isinstance(K, SetOracle) else K.interval
    for j in act:
        if not Kset.issubset(specs[j].oracle.interval):
            raise InvalidParams("K must lie inside every active K_j")
    pieces = {j: strong_set_1d(gs[j], x, specs[j]) for j in act}
    union = RealSet1D.empty()
    for j in act:
        union = union | pieces[j]
    union_side = union.hull().closure()
    sup_spec = SubdiffSpec(beta, gamma_m, Kset)
    sup_side = strong_set_1d(g, x, sup_spec)

    forward_ok = True
    for v in _cone_samples(union_side, 5) if not union_side.is_empty else []:
        if not strong_member(g, x, sup_spec, v).member:
            forward_ok = False
            break

    hyp: dict[str, Any] = {}
    # level-shift so the active pieces vanish at xbar; strong subdifferentials are shift invariant
    shifted = [FnModel(gs[j].dim, lambda X, gj=gs[j], c=gx: gj.evaluate(X) - c, gs[j].domain, gs[j].annotations,
                       gs[j].name) for j in act]
    sub = ConstraintSystem(shifted, [specs[j] for j in act], omega=Kset)
    sl = slater_check(sub, x, "S", K=Kset, subdiffs={i: pieces[j] for i, j in enumerate(act)})
    hyp["slater_S"] = sl.status
    hyp["compact"] = all((not pieces[j].is_empty) and pieces[j].is_bounded for j in act)
    hyp["f_regular"] = all(f_regularity_check(gs[j], x, specs[j], variant="dini", subdiff=pieces[j]).regular
                           for j in act)
    pol = RealSet1D.real_line()
    for j in act:
        pol = pol & snap_zero(pieces[j]).cone().polar()
    feas_dirs = Kset.shift(-x).positive_hull() | RealSet1D.point(0.0)
    hyp["polar_in_cone_K"] = pol.issubset(feas_dirs)

    if union_side.approx_equal(sup_side, tol):
        status, wit = "Equality", None
    else:
        status = "InclusionOnly"
        wit = sup_side.witness_outside(union_side)
    return MaxRuleReport(status, union_side, sup_side, wit, forward_ok, hyp, gamma_m)
