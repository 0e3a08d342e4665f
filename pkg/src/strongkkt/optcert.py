"""Fritz-John / KKT certificates, constraint qualifications, sufficiency and penalization.

Every certificate is normalized by gamma0 + sum(mu) = 1.  The objective
contributes gamma0 * df(x) when gamma0 > 0 and the horizon set of f when
gamma0 = 0; active constraints contribute mu_j times their strong
subdifferential when mu_j > 0 and their horizon set when mu_j = 0.

In one dimension every term is an interval union, so the residual of a
multiplier vector is the exact distance from 0 to a Minkowski sum.  The
classification uses the scale-free residual |sum| / sum |term|, which does
not vanish merely because the multipliers on the nonzero terms are small.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .convexsets import TOL, RealSet1D, SetOracle, as_realset, min_norm_in_hull, normal_cone_1d, sample_points
from .errors import (ActiveLevelMismatch, CertificateNotValidated, InvalidParams, InvariantViolation,
                     NoGridMinimizer, UnsupportedDim, UnvalidatedSubgradient)
from .funcspace import FnModel, eval_extended, sublevel_interval_1d
from .gencvx import QFPInstance
from .levelcone import ConstraintSystem, active_set, assemble_cone, constraint_pieces, snap_zero
from .strongsub import classical_subdiff_1d, strong_member

INF = math.inf
RESIDUAL_TOL = 1e-7
SIMPLEX_STEP = 64
REFINE_STEP = 512
DEFAULT_RADIUS = 0.5
CLASSES = ("KKT", "FJ", "NotCertifiable")


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class FJCertificate:
    """Multipliers, selected vectors and residuals of a generalized FJ condition."""

    gamma0: float
    mu: dict
    subgradients: dict
    objective_vector: np.ndarray
    residual: float = INF
    relative_residual: float = INF
    classification: str = "NotCertifiable"
    source: str = "search"
    flags: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma0 < 0 or any(m < 0 for m in self.mu.values()):
            raise InvariantViolation("multipliers must be nonnegative")
        total = self.gamma0 + sum(self.mu.values())
        if abs(total - 1.0) > 1e-9:
            raise InvariantViolation(f"gamma0 + sum(mu) = {total:.12g}, expected 1")
        if self.classification not in CLASSES:
            raise InvariantViolation(f"unknown classification {self.classification}")
        self.objective_vector = np.atleast_1d(np.asarray(self.objective_vector, dtype=float))
        self.subgradients = {int(j): np.atleast_1d(np.asarray(v, dtype=float)) for j, v in self.subgradients.items()}
        if self.gamma0_hat == 1 and self.source == "penalization":
            n = float(np.linalg.norm(self.objective_vector))
            if abs(n - 1.0) > 1e-9:
                raise InvariantViolation("a horizon objective vector from penalization must have unit norm")

    @property
    def gamma0_hat(self) -> int:
        return 1 if self.gamma0 == 0 else 0

    @property
    def multipliers(self) -> dict:
        """mu_j / gamma0, defined for KKT certificates."""
        if self.gamma0 <= 0:
            return {}
        return {j: m / self.gamma0 for j, m in self.mu.items()}

    def to_record(self) -> dict:
        return {
            "classification": self.classification,
            "gamma0": self.gamma0,
            "gamma0_hat": self.gamma0_hat,
            "mu": {str(j): m for j, m in sorted(self.mu.items())},
            "objective_vector": self.objective_vector.tolist(),
            "subgradients": {str(j): v.tolist() for j, v in sorted(self.subgradients.items())},
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "source": self.source,
            "flags": list(self.flags),
            **{k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool, list))},
        }


def _classify(gamma0: float, rel: float, tol: float) -> str:
    if rel <= tol:
        return "KKT" if gamma0 > 0 else "FJ"
    return "NotCertifiable"


# ---------------------------------------------------------------------------
# 1-D ingredients
# ---------------------------------------------------------------------------


def objective_sets_1d(f: FnModel, x: float) -> tuple[RealSet1D, RealSet1D]:
    """(limiting subdifferential, horizon subdifferential) of f at x.

    A declared gradient of a locally Lipschitz f gives the exact pair ({f'(x)}, {0}).
    """
    grad = f.annotations.get("gradient")
    if grad is not None and f.annotations.get("locally_lipschitz"):
        gx = float(np.asarray(grad(np.array([x]))).reshape(-1)[0])
        return RealSet1D.point(gx), RealSet1D.point(0.0)
    lim = classical_subdiff_1d(f, x, "limiting").value
    hor = classical_subdiff_1d(f, x, "horizon").value
    return lim, hor


def _decompose(target: float, sets: Sequence[RealSet1D]) -> list[float] | None:
    """Points x_i in the closures of the sets with sum x_i = target, each kept near 0."""
    comps = [S.closure().intervals for S in sets]
    slack = 1e-12 * (1.0 + abs(target))
    for combo in itertools.product(*comps):
        lo = sum(iv.lo for iv in combo)
        hi = sum(iv.hi for iv in combo)
        if lo - slack <= target <= hi + slack:
            break
    else:
        return None
    x = [min(max(0.0, iv.lo), iv.hi) for iv in combo]
    r = target - sum(x)
    for i, iv in enumerate(combo):
        if r == 0.0:
            break
        room = (iv.hi - x[i]) if r > 0 else (iv.lo - x[i])
        step = min(r, room) if r > 0 else max(r, room)
        x[i] += step
        r -= step
    return x


@dataclass(frozen=True)
class _Eval:
    gamma0: float
    mu: tuple
    residual: float
    relative: float
    parts: tuple | None


def _eval_1d(gamma0: float, mu: Sequence[float], obj: RealSet1D, obj_hor: RealSet1D, active: Sequence[int],
             strong: Mapping, horizon: Mapping) -> _Eval:
    sets = [obj.scale(gamma0) if gamma0 > 0 else obj_hor]
    for j, m in zip(active, mu):
        sets.append(strong[j].scale(m) if m > 0 else horizon[j])
    total = RealSet1D.point(0.0)
    for S in sets:
        total = total + S
        if total.is_empty:
            return _Eval(gamma0, tuple(mu), INF, INF, None)
    t = total.project(0.0)
    parts = _decompose(t, sets)
    if parts is None:
        return _Eval(gamma0, tuple(mu), INF, INF, None)
    s = float(sum(parts))
    scale = float(sum(abs(p) for p in parts))
    rel = abs(s) / scale if scale > 0 else 0.0
    return _Eval(gamma0, tuple(mu), abs(s), rel, tuple(parts))


def simplex_grid(k: int, n: int) -> np.ndarray:
    """All points of the probability simplex in R^k with coordinates in (1/n) Z."""
    if k == 1:
        return np.ones((1, 1))
    rows = []
    for c in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + c + (n + k - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    return np.asarray(rows, dtype=float) / n


def _refined_grid(center: np.ndarray, coarse: int, fine: int, width: int = 1) -> np.ndarray:
    """Simplex points on the fine lattice within `width` coarse cells of center."""
    k = center.size
    if k == 1:
        return center[None, :]
    c = np.rint(center * fine).astype(int)
    r = width * fine // coarse
    offs = np.arange(-r, r + 1)
    pts = []
    for d in itertools.product(offs, repeat=k - 1):
        p = np.empty(k, dtype=int)
        p[1:] = c[1:] + np.asarray(d)
        p[0] = fine - p[1:].sum()
        if np.all(p >= 0):
            pts.append(p)
    return np.asarray(pts, dtype=float) / fine


def _best(evals: Sequence[_Eval], positive_gamma: bool | None) -> _Eval | None:
    pool = [e for e in evals if positive_gamma is None or (e.gamma0 > 0) == positive_gamma]
    if not pool:
        return None
    return min(pool, key=lambda e: (e.relative, e.residual, -e.gamma0))


# ---------------------------------------------------------------------------
# residual and search
# ---------------------------------------------------------------------------


def _in_set_1d(S: RealSet1D, v: float, tol: float) -> bool:
    return (not S.is_empty) and S.closure().distance(v) <= tol * max(1.0, abs(v))


def fj_residual(f: FnModel, cs: ConstraintSystem, xbar, cert: FJCertificate, tol: float = 1e-6,
                validated: bool = False) -> float:
    """Norm of gamma0 v + gamma0_hat v_inf + sum_{mu>0} mu_j xi_j + sum_{mu=0} zeta_j.

    Strong subgradients are checked with strong_member; horizon selections and
    the objective vector are checked exactly in 1-D.  In higher dimension the
    horizon and objective selections must be declared validated by the caller.
    """
    xb = np.atleast_1d(np.asarray(xbar, dtype=float))
    act = active_set(cs, xb)
    if set(cert.mu) != set(act):
        raise UnvalidatedSubgradient(f"multipliers given for {sorted(cert.mu)}, active set is {list(act)}")
    total = np.zeros(cs.dim)
    one_d = cs.dim == 1
    if one_d:
        obj, obj_hor = objective_sets_1d(f, float(xb[0]))
        S = obj if cert.gamma0 > 0 else obj_hor
        if not _in_set_1d(S, float(cert.objective_vector[0]), tol):
            raise UnvalidatedSubgradient(f"objective vector {cert.objective_vector.tolist()} not in {S}")
    elif not validated:
        raise UnvalidatedSubgradient("objective and horizon selections need external validation when dim > 1")
    total += (cert.gamma0 if cert.gamma0 > 0 else 1.0) * cert.objective_vector
    for j in act:
        w = cert.subgradients.get(j)
        if w is None:
            raise UnvalidatedSubgradient(f"no selection for active constraint {j}")
        if cert.mu[j] > 0:
            mv = strong_member(cs.gs[j], xb, cs.specs[j], w, tol=tol)
            if not mv.member:
                raise UnvalidatedSubgradient(f"{w.tolist()} is not a strong subgradient of {cs.names[j]}")
            total += cert.mu[j] * w
        else:
            if one_d:
                H = classical_subdiff_1d(cs.gs[j], float(xb[0]), "horizon").value
                if not _in_set_1d(H, float(w[0]), tol):
                    raise UnvalidatedSubgradient(f"{w.tolist()} is not a horizon subgradient of {cs.names[j]}")
            total += w
    return float(np.linalg.norm(total))


def fj_search(f: FnModel, cs: ConstraintSystem, xbar, tol: float = RESIDUAL_TOL, step: int = SIMPLEX_STEP,
              refine: int = REFINE_STEP, subgradients: Mapping | None = None) -> FJCertificate:
    """Minimal-residual certificate over the normalized multiplier simplex.

    dim = 1 evaluates each grid point exactly.  dim > 1 needs sampled
    selections: subgradients = {"objective": (k, n), "objective_horizon": (k, n),
    "strong": {j: (k, n)}, "horizon": {j: (k, n)}} and minimizes the norm over
    the convex hull of all products.
    """
    xb = np.atleast_1d(np.asarray(xbar, dtype=float))
    if cs.dim != 1:
        return _fj_search_nd(f, cs, xb, tol, step, subgradients or {})
    x = float(xb[0])
    pc = constraint_pieces(cs, x)
    obj, obj_hor = objective_sets_1d(f, x)
    act = pc.active

    def run(grid):
        return [_eval_1d(float(p[0]), p[1:], obj, obj_hor, act, pc.strong, pc.horizon) for p in grid]

    coarse = run(simplex_grid(len(act) + 1, step))
    grid_min = min(e.relative for e in coarse)
    evals = list(coarse)
    for positive in (True, False):
        b = _best(coarse, positive)
        if b is not None and math.isfinite(b.relative) and b.relative > 0:
            evals += run(_refined_grid(np.array((b.gamma0,) + b.mu), step, refine))
    kkt, fj = _best(evals, True), _best(evals, False)
    if kkt is not None and kkt.relative <= tol:
        best = kkt
    elif fj is not None and fj.relative <= tol:
        best = fj
    else:
        best = _best(evals, None)
    return _cert_from_eval(best, act, tol, grid_min, obj if best.gamma0 > 0 else obj_hor)


def _cert_from_eval(e: _Eval, act: Sequence[int], tol: float, grid_min: float, obj_set: RealSet1D) -> FJCertificate:
    mu = {int(j): float(m) for j, m in zip(act, e.mu)}
    flags = []
    if e.parts is None:
        v = np.array([obj_set.sample_point() if not obj_set.is_empty else np.nan])
        subs = {}
        flags.append("some term is empty for every multiplier vector")
    else:
        p0 = e.parts[0]
        v = np.array([p0 / e.gamma0 if e.gamma0 > 0 else p0])
        subs = {int(j): np.array([p / m if m > 0 else p]) for j, m, p in zip(act, e.mu, e.parts[1:])}
    return FJCertificate(float(e.gamma0), mu, subs, v, e.residual, e.relative,
                         _classify(e.gamma0, e.relative, tol), "search", flags,
                         {"grid_min_relative_residual": grid_min, "tol": tol})


def _fj_search_nd(f: FnModel, cs: ConstraintSystem, xb: np.ndarray, tol: float, step: int,
                  sub: Mapping) -> FJCertificate:
    act = active_set(cs, xb)
    n = cs.dim
    grad = f.annotations.get("gradient")
    obj = np.atleast_2d(sub.get("objective", grad(xb) if grad is not None else np.zeros((0, n)))).reshape(-1, n)
    obj_hor = np.atleast_2d(sub.get("objective_horizon",
                                    np.zeros((1, n)) if f.annotations.get("locally_lipschitz") else np.zeros((0, n))))
    strong = {j: np.atleast_2d(sub.get("strong", {}).get(j, np.zeros((0, n)))).reshape(-1, n) for j in act}
    hor = {j: np.atleast_2d(sub.get("horizon", {}).get(j, np.zeros((0, n)))).reshape(-1, n) for j in act}
    for j in act:
        for w in strong[j]:
            if not strong_member(cs.gs[j], xb, cs.specs[j], w).member:
                raise UnvalidatedSubgradient(f"{w.tolist()} is not a strong subgradient of {cs.names[j]}")
    best = None
    for p in simplex_grid(len(act) + 1, step):
        g0, mu = float(p[0]), p[1:]
        blocks = [g0 * obj if g0 > 0 else obj_hor]
        blocks += [mu[i] * strong[j] if mu[i] > 0 else hor[j] for i, j in enumerate(act)]
        if any(b.shape[0] == 0 for b in blocks):
            continue
        idx = list(itertools.product(*[range(b.shape[0]) for b in blocks]))
        P = np.array([sum(b[i] for b, i in zip(blocks, ix)) for ix in idx])
        scale = np.array([sum(np.linalg.norm(b[i]) for b, i in zip(blocks, ix)) for ix in idx])
        z, res = min_norm_in_hull(P)
        denom = float(np.max(scale)) if scale.size else 0.0
        rel = res / denom if denom > 0 else 0.0
        if best is None or (rel, -g0) < (best[0], -best[1]):
            best = (rel, g0, mu.copy(), res, blocks, P)
    if best is None:
        return FJCertificate(1.0 if not act else 0.0, {j: (1.0 if i == 0 else 0.0) for i, j in enumerate(act)}
                             if act else {}, {}, np.full(n, np.nan), INF, INF, "NotCertifiable", "search",
                             ["some term has no sampled selection"])
    rel, g0, mu, res, blocks, _ = best
    v = blocks[0][0] / g0 if g0 > 0 else blocks[0][0]
    subs = {j: (blocks[i + 1][0] / mu[i] if mu[i] > 0 else blocks[i + 1][0]) for i, j in enumerate(act)}
    return FJCertificate(g0, {j: float(mu[i]) for i, j in enumerate(act)}, subs, v, res, rel,
                         _classify(g0, rel, tol), "search", ["sampled selections; vectors are representatives"],
                         {"tol": tol})


# ---------------------------------------------------------------------------
# constraint qualifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CQVerdict:
    holds: bool
    witness: float | None
    union: RealSet1D
    normal_cone: RealSet1D
    variant: str
    flags: tuple = ()

    @property
    def status(self) -> str:
        return "Holds" if self.holds else f"FailsWitness(v={self.witness:g})"

    def to_record(self) -> dict:
        return {"status": self.status, "variant": self.variant, "union": str(self.union),
                "normal_cone": str(self.normal_cone), "witness": self.witness, "flags": list(self.flags)}


def gcq_check(cs: ConstraintSystem, xbar, zero_term: str = "horizon") -> CQVerdict:
    """Compare N(Omega, xbar) with the union over multipliers, without closure.

    zero_term="horizon" is the qualification itself; "normal_operator"
    replaces the mu_j = 0 terms by N_{g_j} for comparison.
    """
    if cs.dim != 1:
        raise UnsupportedDim("gcq_check is exact in dim = 1 only")
    x = float(np.asarray(xbar, dtype=float).reshape(-1)[0])
    pc = constraint_pieces(cs, x)
    zero = pc.horizon if zero_term == "horizon" else pc.normal_op
    union = assemble_cone(pc.active, pc.strong, zero).union
    N = normal_cone_1d(cs.omega_1d, x)
    wit = N.witness_outside(union)
    if wit is None:
        wit = union.witness_outside(N)
    flags = tuple(f"empty strong subdifferential for {cs.names[j]}" for j in pc.active if pc.strong[j].is_empty)
    return CQVerdict(wit is None, wit, union, N, zero_term, flags)


def closure_hypotheses(cs: ConstraintSystem, xbar) -> dict:
    """Pointedness, 0 outside each strong set, trivial horizon-polar intersections; and the resulting identity."""
    if cs.dim != 1:
        raise UnsupportedDim("closure_hypotheses is exact in dim = 1 only")
    x = float(np.asarray(xbar, dtype=float).reshape(-1)[0])
    pc = constraint_pieces(cs, x)
    N = normal_cone_1d(cs.omega_1d, x)
    pointed = (N & -N) == RealSet1D.point(0.0)
    items = {}
    ok = pointed
    for j in pc.active:
        S = pc.strong[j]
        lev = sublevel_interval_1d(cs.gs[j], x)
        Kj = cs.specs[j].oracle.interval
        base = (lev & Kj) if Kj is not None else lev
        polar = base.shift(-x).cone().polar()
        inter = S.horizon() & polar if not S.is_empty else RealSet1D.point(0.0)
        zero_out = not S.contains(0.0)
        trivial = inter == RealSet1D.point(0.0)
        items[cs.names[j]] = {"zero_not_in_strong": zero_out, "horizon_polar_intersection": str(inter),
                              "trivial_intersection": trivial, "strong": str(S)}
        ok = ok and zero_out and trivial
    pos = RealSet1D.point(0.0)
    for pattern in itertools.product((True, False), repeat=len(pc.active)):
        acc = RealSet1D.point(0.0)
        if not any(pattern):
            continue
        for j, p in zip(pc.active, pattern):
            if p:
                acc = acc + snap_zero(pc.strong[j]).positive_hull()
        pos = pos | acc
    return {"pointed": pointed, "items": items, "all_hold": ok, "normal_cone": str(N),
            "zero_union_positive": str(pos), "identity_holds": pos == N}


@dataclass(frozen=True)
class NNAMCVerdict:
    holds: bool
    witness: dict | None

    @property
    def status(self) -> str:
        return "Holds" if self.holds else "AbnormalWitness"

    def to_record(self) -> dict:
        return {"status": self.status, "witness": self.witness}


def _nontrivial_zero(sets: Sequence[RealSet1D], must_use: Sequence[int]) -> list[float] | None:
    """A selection summing to 0 that is nonzero somewhere (or uses a forced positive term)."""
    if any(S.is_empty for S in sets):
        return None
    zero = RealSet1D.point(0.0)
    for k in (must_use[:1] if must_use else range(len(sets))):
        lead = sets[k] if must_use else sets[k].difference(zero)
        others = [S for i, S in enumerate(sets) if i != k]
        rest = sum(others[1:], others[0]) if others else zero
        hit = lead & -rest
        a = hit.sample_point()
        if a is None:
            continue
        parts = _decompose(-a, others) if others else []
        if parts is None:
            continue
        parts.insert(k, a)
        return parts
    return None


def nnamc_check(f: FnModel, cs: ConstraintSystem, xbar, subgradients: Mapping | None = None,
                step: int = 16) -> NNAMCVerdict:
    """Search a nonzero abnormal combination 0 = w + sum mu_j v_j + sum v_j^inf."""
    xb = np.atleast_1d(np.asarray(xbar, dtype=float))
    if cs.dim != 1:
        return _nnamc_nd(f, cs, xb, subgradients or {}, step)
    x = float(xb[0])
    pc = constraint_pieces(cs, x)
    _, hor_f = objective_sets_1d(f, x)
    act = pc.active
    for pattern in itertools.product((True, False), repeat=len(act)):
        sets = [hor_f] + [snap_zero(pc.strong[j]).positive_hull() if p else pc.horizon[j] for j, p in zip(act, pattern)]
        forced = [i + 1 for i, p in enumerate(pattern) if p]
        parts = _nontrivial_zero(sets, forced)
        if parts is not None:
            wit = {"w": parts[0], "positive": [act[i - 1] for i in forced],
                   "terms": {str(j): parts[i + 1] for i, j in enumerate(act)}}
            return NNAMCVerdict(False, wit)
    return NNAMCVerdict(True, None)


def _nnamc_nd(f, cs, xb, sub, step) -> NNAMCVerdict:
    act = active_set(cs, xb)
    n = cs.dim
    W = np.atleast_2d(sub.get("objective_horizon", np.zeros((1, n)))).reshape(-1, n)
    strong = {j: np.atleast_2d(sub.get("strong", {}).get(j, np.zeros((0, n)))).reshape(-1, n) for j in act}
    hor = {j: np.atleast_2d(sub.get("horizon", {}).get(j, np.zeros((1, n)))).reshape(-1, n) for j in act}
    for pattern in itertools.product((True, False), repeat=len(act)):
        blocks = [W] + [strong[j] if p else hor[j] for j, p in zip(act, pattern)]
        if any(b.shape[0] == 0 for b in blocks):
            continue
        for ix in itertools.product(*[range(b.shape[0]) for b in blocks]):
            vecs = [b[i] for b, i in zip(blocks, ix)]
            if not any(pattern) and all(np.linalg.norm(v) == 0 for v in vecs):
                continue
            # conic combination with coefficients >= 0 (positive on forced terms) reaching 0
            P = np.array(vecs)
            z, res = min_norm_in_hull(P)
            if res <= 1e-9:
                return NNAMCVerdict(False, {"vectors": P.tolist(), "pattern": list(pattern)})
    return NNAMCVerdict(True, None)


# ---------------------------------------------------------------------------
# sufficiency
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    mu_bar: float
    neighborhood: str
    verified: bool
    worst_gap: float
    kkt_gap: float | None = None
    pseudo_alpha: float | None = None
    pseudo_gap: float | None = None
    sample_count: int = 0
    flags: tuple = ()

    def to_record(self) -> dict:
        return {"mu_bar": self.mu_bar, "neighborhood": self.neighborhood, "verified": self.verified,
                "worst_gap": self.worst_gap, "kkt_gap": self.kkt_gap, "pseudo_alpha": self.pseudo_alpha,
                "pseudo_gap": self.pseudo_gap, "sample_count": self.sample_count, "flags": list(self.flags)}


def mu_bar(cs: ConstraintSystem, cert: FJCertificate) -> float:
    """Half the sum of beta_j gamma_j mu_j over mu_j > 0."""
    return 0.5 * sum(cs.specs[j].beta * cs.specs[j].gamma * m for j, m in cert.mu.items() if m > 0)


def _ball_in(omega: SetOracle, xb: np.ndarray, radius: float) -> SetOracle:
    if omega.dim == 1 and omega.interval is not None:
        return SetOracle.from_interval(omega.interval & RealSet1D.interval(xb[0] - radius, xb[0] + radius,
                                                                           False, False), name="Omega∩V")
    return omega.intersect(SetOracle.ball(xb, radius))


def _growth_grid(region: SetOracle, xb: np.ndarray, grid, radius: float, seed: int) -> np.ndarray:
    if grid is not None:
        Y = np.asarray(grid, dtype=float).reshape(-1, region.dim)
        return Y[region.contains(Y)] if Y.shape[0] else Y
    return sample_points(region, xb, n_uniform=2048, radius=radius, far_field=radius, seed=seed)


def _pseudo_alpha(f: FnModel) -> float | None:
    if not f.annotations.get("locally_lipschitz"):
        return None
    if "alpha_pseudoconvex" in f.annotations:
        return float(f.annotations["alpha_pseudoconvex"])
    if f.annotations.get("convex"):
        return 0.0
    return None


def sufficiency_growth(f: FnModel, cs: ConstraintSystem, xbar, cert: FJCertificate, V: SetOracle | None = None,
                       grid=None, tol: float = 1e-9, radius: float = DEFAULT_RADIUS, seed: int = 0) -> GrowthReport:
    """Check mu_bar |y - x|^2 <= gamma0 <v, y - x> + gamma0_hat <v_inf, y - x> on sampled Omega ∩ V."""
    if cert.classification == "NotCertifiable" or not cert.relative_residual <= max(tol, RESIDUAL_TOL):
        raise CertificateNotValidated("sufficiency needs a certificate with vanishing residual")
    xb = np.atleast_1d(np.asarray(xbar, dtype=float))
    act = active_set(cs, xb)
    flags = []
    for j in act:
        ann = cs.gs[j].annotations
        if "sq_modulus" not in ann:
            flags.append(f"modulus of {cs.names[j]} not annotated; using gamma_j = {cs.specs[j].gamma:g}")
        elif ann["sq_modulus"] < cs.specs[j].gamma:
            flags.append(f"gamma_j exceeds the annotated modulus of {cs.names[j]}")
        if not (ann.get("isc") or ann.get("isc_claimed")):
            flags.append(f"inner semicontinuity of the sublevel map of {cs.names[j]} not established")
    mb = mu_bar(cs, cert)
    region = V if V is not None else _ball_in(cs.omega, xb, radius)
    Y = _growth_grid(region, xb, grid, radius, seed)
    D = Y - xb[None, :]
    sq = np.einsum("ij,ij->i", D, D)
    lin = D @ cert.objective_vector
    rhs = (cert.gamma0 if cert.gamma0 > 0 else 1.0) * lin
    gap = rhs - mb * sq
    worst = float(np.min(gap)) if gap.size else 0.0
    kkt_gap = None
    if cert.gamma0 > 0 and gap.size:
        kkt_gap = float(np.min(lin - mb / cert.gamma0 * sq))
    alpha = _pseudo_alpha(f)
    pseudo_gap = None
    if alpha is not None and cert.gamma0 > 0 and gap.size:
        fx = eval_extended(f, xb)
        pseudo_gap = float(np.min(f.evaluate(Y) - fx - alpha * sq))
    verified = worst >= -tol and (kkt_gap is None or kkt_gap >= -tol) and (pseudo_gap is None or pseudo_gap >= -tol)
    desc = region.name if V is not None else f"Omega ∩ B({xb.tolist()}, {radius:g})"
    return GrowthReport(mb, desc, verified, worst, kkt_gap, alpha, pseudo_gap, int(Y.shape[0]), tuple(flags))


# ---------------------------------------------------------------------------
# penalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PenaltyReport:
    steps: tuple
    classification: str
    v_limit: np.ndarray | None
    residual: float
    normal_cone: str | None
    flags: tuple = ()

    def to_record(self) -> dict:
        return {"classification": self.classification,
                "v_limit": None if self.v_limit is None else self.v_limit.tolist(),
                "residual": self.residual, "normal_cone": self.normal_cone, "flags": list(self.flags),
                "steps": [{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in s.items()}
                          for s in self.steps]}


def _dist_to_normal_cone(omega: SetOracle, xb: np.ndarray, u: np.ndarray, grid: np.ndarray) -> float:
    """dist(u, N(Omega, xb)) = max of <u, d> over unit feasible directions d (Omega convex)."""
    if omega.dim == 1 and omega.interval is not None:
        return normal_cone_1d(omega.interval, float(xb[0])).distance(float(u[0]))
    D = grid - xb[None, :]
    n = np.linalg.norm(D, axis=1)
    D = D[n > 1e-12] / n[n > 1e-12, None]
    return max(0.0, float(np.max(D @ u))) if D.shape[0] else float(np.linalg.norm(u))


def _ball_grid(xb: np.ndarray, r: float, n1: int, n2: int) -> np.ndarray:
    if xb.size == 1:
        return np.linspace(xb[0] - r, xb[0] + r, n1)[:, None]
    t = np.linspace(-r, r, n2)
    G = np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1).reshape(-1, 2)
    G = G[np.einsum("ij,ij->i", G, G) <= r * r]
    return G + xb[None, :]


def penalize_certify(f: FnModel, omega: SetOracle | RealSet1D | str, xbar, delta: float = 1.0,
                     k_schedule: Sequence[float] = tuple(2.0 ** np.arange(0, 13)), n_grid: int = 4001,
                     n_grid_2d: int = 201, tol: float = 1e-6) -> PenaltyReport:
    """Minimize f + k dist(., Omega)^2 + |. - x|^2 / 2 over B(x, delta/2) for each k.

    At each minimizer y_k the Fermat rule gives the regular subgradient
    v_k = -(2k (y_k - proj y_k) + (y_k - x)).  Bounded v_k give case (i)
    with 0 in v + N(Omega, x); growing v_k give case (ii) with the normalized
    direction; minimizers that stay away from x give NonStationaryEvidence.
    """
    if not isinstance(omega, SetOracle):
        omega = SetOracle.from_interval(as_realset(omega))
    xb = np.atleast_1d(np.asarray(xbar, dtype=float))
    if xb.size > 2:
        raise UnsupportedDim("penalize_certify supports dim <= 2")
    if not delta > 0:
        raise InvalidParams("delta must be positive")
    r = 0.5 * delta
    G = _ball_grid(xb, r, n_grid, n_grid_2d)
    fG = f.evaluate(G)
    if G.shape[0] == 0 or not np.any(np.isfinite(fG)):
        raise NoGridMinimizer("no finite value of f on the ball grid")
    projG = np.array([omega.project(g) for g in G])
    dG = np.einsum("ij,ij->i", G - projG, G - projG)
    qG = 0.5 * np.einsum("ij,ij->i", G - xb, G - xb)
    h = 2 * r / (n_grid - 1) if xb.size == 1 else 2 * r / (n_grid_2d - 1)
    steps = []
    for k in k_schedule:
        k = float(k)
        phi = fG + k * dG + qG
        i = int(np.argmin(phi))
        y = G[i].copy()

        def obj(z, k=k):
            z = np.atleast_1d(z)
            if np.linalg.norm(z - xb) > r:
                return INF
            p = omega.project(z)
            return float(f.evaluate(z[None, :])[0] + k * np.dot(z - p, z - p) + 0.5 * np.dot(z - xb, z - xb))

        if xb.size == 1:
            lo, hi = max(y[0] - h, xb[0] - r), min(y[0] + h, xb[0] + r)
            res = minimize_scalar(lambda s: obj(np.array([s])), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-13})
            cand = np.array([res.x])
        else:
            res = minimize(obj, y, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
            cand = np.asarray(res.x)
        if obj(cand) <= obj(y):
            y = cand
        p = omega.project(y)
        v = -(2.0 * k * (y - p) + (y - xb))
        steps.append({"k": k, "y": y, "proj": np.asarray(p), "v": v, "dist_to_x": float(np.linalg.norm(y - xb)),
                      "interior": bool(np.linalg.norm(y - xb) < r - h)})
    N_desc = None
    if omega.dim == 1 and omega.interval is not None:
        N_desc = str(normal_cone_1d(omega.interval, float(xb[0])))
    last = steps[-1]
    flags = []
    if last["dist_to_x"] > max(10 * h, 4.0 / last["k"]) or not last["interior"]:
        return PenaltyReport(tuple(steps), "NonStationaryEvidence", None, INF, N_desc,
                             ("penalized minimizers stay away from the point",))
    norms = np.array([float(np.linalg.norm(s["v"])) for s in steps])
    tail = norms[len(norms) // 2:]
    growing = bool(np.all(np.diff(tail) > 0) and tail[-1] >= 8.0 * max(1.0, tail[0]))
    Yg = _ball_grid(xb, r, 257, 41)
    Yg = Yg[omega.contains(Yg)]
    if growing:
        v_lim = last["v"] / norms[-1]
        cls = "case_ii"
    else:
        v_lim = last["v"]
        cls = "case_i"
    res = _dist_to_normal_cone(omega, xb, -v_lim, Yg)
    if res > tol:
        flags.append(f"limit residual {res:.3g} exceeds tol")
    return PenaltyReport(tuple(steps), cls, v_lim, res, N_desc, tuple(flags))


# ---------------------------------------------------------------------------
# quadratic fractional programs
# ---------------------------------------------------------------------------


def qfp_sufficiency(inst: QFPInstance, alpha_level: float, f: FnModel, xbar, gamma0: float | None = None,
                    v=None, grid=None, radius: float = DEFAULT_RADIUS, tol: float = 1e-9, level_tol: float = 1e-8,
                    seed: int = 0) -> GrowthReport:
    """Growth inequality for min f s.t. g1/g2 <= alpha with the Fenchel-Moreau subgradient of g1 - alpha g2.

    g1 is the numerator quadratic (modulus lambda_min(A)) and g2 the affine
    denominator; Omega = {x in K : g1(x) <= alpha g2(x)} and mu_bar = gamma mu / 2.
    """
    if np.any(inst.B):
        raise InvalidParams("the denominator must be affine (B = 0)")
    xb = np.atleast_1d(np.asarray(xbar, dtype=float))
    g1 = float(inst.f(xb[None, :])[0])
    g2 = float(inst.g(xb[None, :])[0])
    if abs(g1 - alpha_level * g2) > level_tol * max(1.0, abs(g1)):
        raise ActiveLevelMismatch(f"g1(x) = {g1:.6g} differs from alpha g2(x) = {alpha_level * g2:.6g}")
    gamma = float(np.linalg.eigvalsh(inst.A)[0])
    w = inst.A @ xb + inst.a - alpha_level * inst.b
    # minorant test of the Fenchel-Moreau subgradient on a local grid
    box = inst.region(inst.box)
    Yl = _growth_grid(SetOracle.ball(xb, 1.0), xb, None, 1.0, seed)
    gl = inst.f(Yl) - alpha_level * inst.g(Yl)
    if np.any(gl < (g1 - alpha_level * g2) + (Yl - xb) @ w - 1e-9):
        raise CertificateNotValidated("the gradient of g1 - alpha g2 fails the minorant test")
    if v is None:
        grad = f.annotations.get("gradient")
        if grad is None:
            raise InvalidParams("an objective subgradient v is required")
        v = grad(xb)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if gamma0 is None:
        gamma0 = _qfp_multiplier(v, w)
    mu = 1.0 - gamma0
    if not mu > 0:
        raise InvalidParams("the multiplier of the constraint must be positive")
    resid = float(np.linalg.norm(gamma0 * v + mu * w)) if gamma0 > 0 else float(np.linalg.norm(v + mu * w))
    flags = []
    if resid > 1e-7 * max(1.0, float(np.linalg.norm(w))):
        flags.append(f"inclusion residual {resid:.3g}")
    mb = 0.5 * gamma * mu

    def in_omega(X, box=box):
        return box.contains(X) & (inst.f(X) <= alpha_level * inst.g(X) + TOL)

    omega = SetOracle(dim=inst.dim, contains_fn=in_omega, convex=True,
                      bounds=(xb - radius, xb + radius), name="Omega")
    region = omega.intersect(SetOracle.ball(xb, radius))
    Y = _growth_grid(region, xb, grid, radius, seed)
    D = Y - xb[None, :]
    sq = np.einsum("ij,ij->i", D, D)
    gap = (gamma0 if gamma0 > 0 else 1.0) * (D @ v) - mb * sq
    worst = float(np.min(gap)) if gap.size else 0.0
    alpha = _pseudo_alpha(f)
    pseudo_gap = None
    if alpha is not None and gap.size:
        pseudo_gap = float(np.min(f.evaluate(Y) - eval_extended(f, xb) - alpha * sq))
    verified = not flags and worst >= -tol and (pseudo_gap is None or pseudo_gap >= -tol)
    return GrowthReport(mb, f"Omega ∩ B({xb.tolist()}, {radius:g})", verified, worst, None, alpha, pseudo_gap,
                        int(Y.shape[0]), tuple(flags + [f"gamma0={gamma0:.12g}", f"mu={mu:.12g}"]))


def _qfp_multiplier(v: np.ndarray, w: np.ndarray) -> float:
    """gamma0 in [0, 1) minimizing |gamma0 v + (1 - gamma0) w|, refined from the 1/64 grid."""
    c = simplex_grid(2, SIMPLEX_STEP)[:, 0]
    c = c[c < 1.0]
    vals = [np.linalg.norm(t * v + (1 - t) * w) for t in c]
    t0 = float(c[int(np.argmin(vals))])
    d = v - w
    dd = float(d @ d)
    if dd > 0:
        t = float(np.clip(-(w @ d) / dd, 0.0, 1.0 - 1e-12))
        if np.linalg.norm(t * v + (1 - t) * w) <= np.linalg.norm(t0 * v + (1 - t0) * w):
            return t
    return t0
