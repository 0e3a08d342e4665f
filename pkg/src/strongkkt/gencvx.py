"""Generalized convexity: strong quasiconvexity checks, moduli, quadratic fractions.

Every positive verdict here is a statement about samples.  Refutations carry
an explicit witness (x, y, lambda) that violates

    h(lam*y + (1-lam)*x) <= max(h(x), h(y)) - lam*(1-lam)*(gamma/2)*|x-y|^2

by more than the tolerance, so they are conclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .convexsets import TOL, RealSet1D, SetOracle, as_realset, sample_points
from .errors import InvalidParams, InvariantViolation, NotQuasiconvex, PointNotInSet
from .funcspace import FnModel, eval_extended

INF = math.inf
SQ_GRID = 128
SQ_LAMBDAS = 33
DEFAULT_BOX = 10.0


def _as_oracle(region, dim: int) -> SetOracle:
    if isinstance(region, SetOracle):
        return region
    if region is None:
        return SetOracle.whole_space(dim)
    return SetOracle.from_interval(as_realset(region))


def _bounded(region: SetOracle, box: float) -> tuple[SetOracle, bool]:
    lo, hi = region._lo(), region._hi()
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        return region, False
    return region.intersect(SetOracle.box(np.full(region.dim, -box), np.full(region.dim, box))), True


def region_grid(region: SetOracle, n: int = SQ_GRID, seed: int = 0, max_draws: int = 200_000) -> np.ndarray:
    """n deterministic points of a bounded region (uniform in 1-D, seeded rejection in nD)."""
    lo, hi = region._lo(), region._hi()
    if region.dim == 1:
        x = np.linspace(lo[0], hi[0], n) if hi[0] > lo[0] else np.array([lo[0]])
        if region.interval is not None and not region.interval.is_interval:
            x = np.unique(np.concatenate([x, [e for iv in region.interval.intervals for e in (iv.lo, iv.hi)]]))
        X = x.reshape(-1, 1)
        return X[region.contains(X)]
    rng = np.random.default_rng(seed)
    out, drawn = [], 0
    while sum(len(o) for o in out) < n and drawn < max_draws:
        U = lo + (hi - lo) * rng.random((4 * n, region.dim))
        drawn += U.shape[0]
        out.append(U[region.contains(U)])
    X = np.vstack(out) if out else np.zeros((0, region.dim))
    return X[:n]


# ---------------------------------------------------------------------------
# strong quasiconvexity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SQReport:
    status: str
    gamma: float
    region: SetOracle
    sample_count: int
    violation: float
    witness: tuple | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def verified(self) -> bool:
        return self.status == "Verified"

    def to_record(self) -> dict:
        rec: dict[str, Any] = {
            "status": self.status,
            "gamma": self.gamma,
            "region": self.region.name,
            "sample_count": self.sample_count,
            "max_violation": self.violation,
            "evidence": "sampled" if self.verified else "witness",
        }
        if self.witness is not None:
            x, y, lam = self.witness
            rec["witness"] = {"x": np.asarray(x).tolist(), "y": np.asarray(y).tolist(), "lambda": float(lam)}
        rec.update(self.meta)
        return rec


def sq_violation(h: FnModel, x, y, lam: float, gamma: float) -> float:
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    vals = h.evaluate(np.vstack([x, y, lam * y + (1.0 - lam) * x]))
    top = max(vals[0], vals[1])
    if not math.isfinite(top):
        return -INF
    return float(vals[2] - top + 0.5 * gamma * lam * (1.0 - lam) * float(np.sum((x - y) ** 2)))


def _polish(h: FnModel, region: SetOracle, gamma: float, x0, y0, l0) -> tuple[float, tuple]:
    dim = h.dim

    def neg(z):
        x, y, lam = z[:dim], z[dim:2 * dim], z[-1]
        if not (0.0 <= lam <= 1.0) or not region.contains(np.vstack([x, y])).all():
            return 1e30
        v = sq_violation(h, x, y, lam, gamma)
        return -v if math.isfinite(v) else 1e30

    z0 = np.concatenate([x0, y0, [l0]])
    res = minimize(neg, z0, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400 * (2 * dim + 1)})
    z = res.x if res.fun <= neg(z0) else z0
    return -float(min(res.fun, neg(z0))), (z[:dim].copy(), z[dim:2 * dim].copy(), float(z[-1]))


def sq_check(h: FnModel, region=None, gamma: float = 0.0, n_grid: int = SQ_GRID, n_lambda: int = SQ_LAMBDAS,
             seed: int = 0, tol: float = TOL, polish: bool = True, box: float = DEFAULT_BOX,
             _pairs=None) -> SQReport:
    """Sampled check of strong quasiconvexity with modulus gamma on a convex region.

    All pairs of an n_grid-point region grid are combined with n_lambda values
    of lambda (endpoints and midpoint included).  The worst samples are then
    polished by Nelder-Mead on the violation; only a violation above tol
    refutes.  Unbounded regions are truncated to a box of half-width ``box``.
    """
    if gamma < 0:
        raise InvalidParams("gamma must be nonnegative")
    reg, truncated = _bounded(_as_oracle(region, h.dim), box)
    if _pairs is None:
        X = region_grid(reg, n_grid, seed)
        ii, jj = np.triu_indices(X.shape[0], k=1)
        PX, PY = X[ii], X[jj]
    else:
        PX, PY = _pairs
    lam = np.linspace(0.0, 1.0, n_lambda)
    meta = {"truncated_box": box} if truncated else {}
    if PX.shape[0] == 0:
        return SQReport("Verified", gamma, reg, 0, -INF, None, meta)
    hx, hy = h.evaluate(PX), h.evaluate(PY)
    Z = lam[None, :, None] * PY[:, None, :] + (1.0 - lam)[None, :, None] * PX[:, None, :]
    hz = h.evaluate(Z.reshape(-1, h.dim)).reshape(PX.shape[0], lam.size)
    dist2 = np.sum((PX - PY) ** 2, axis=1)
    viol, p, l = _kernels.sq_max_violation(hx, hy, hz, dist2, lam, gamma)
    witness = (PX[p].copy(), PY[p].copy(), float(lam[l]))
    n = PX.shape[0] * lam.size
    if viol <= tol and polish and math.isfinite(viol):
        pv, pw = _polish(h, reg, gamma, *witness)
        if pv > viol:
            viol, witness = pv, pw
    if viol > tol:
        return SQReport("Refuted", gamma, reg, n, float(viol), witness, meta)
    return SQReport("Verified", gamma, reg, n, float(viol), None, meta)


def modulus_estimate(h: FnModel, region=None, bracket: tuple[float, float] = (0.0, 1.0), resolution: float = 1e-3,
                     n_grid: int = SQ_GRID, seed: int = 0, gamma_cap: float = 1e6) -> tuple[float, float]:
    """Bisection on gamma with ``sq_check`` as predicate: (gamma_lo Verified, gamma_hi Refuted)."""
    reg, _ = _bounded(_as_oracle(region, h.dim), DEFAULT_BOX)
    X = region_grid(reg, n_grid, seed)
    ii, jj = np.triu_indices(X.shape[0], k=1)
    pairs = (X[ii], X[jj])

    def ok(g):
        return sq_check(h, reg, g, _pairs=pairs).verified

    if not ok(0.0):
        raise NotQuasiconvex(f"{h.name} fails the quasiconvexity inequality on samples")
    lo, hi = bracket
    if not ok(lo):
        lo, hi = 0.0, lo
    while ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > gamma_cap:
            return lo, INF
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


# ---------------------------------------------------------------------------
# quadratic fractional family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QFPInstance:
    """h(x) = (1/2<Ax,x> + <a,x> + alpha) / (1/2<Bx,x> + <b,x> + beta_const) on K = {m <= g <= M}."""

    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    b: np.ndarray
    alpha: float
    beta_const: float
    m: float
    M: float
    case: str | None = None
    box: float = DEFAULT_BOX

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def modulus(self) -> float:
        return float(np.linalg.eigvalsh(self.A)[0]) / self.M

    def f(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) + X @ self.a + self.alpha

    def g(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.B, X) + X @ self.b + self.beta_const

    def region(self, box: float | None = None) -> SetOracle:
        """K, optionally truncated to the box [-box, box]^dim."""
        m, M, g = self.m, self.M, self.g
        dim = self.dim
        lo = np.full(dim, -INF)
        hi = np.full(dim, INF)
        if box is not None:
            lo, hi = np.full(dim, -float(box)), np.full(dim, float(box))

        def pred(X, lo=lo, hi=hi):
            gx = g(X)
            return (gx >= m - TOL) & (gx <= M + TOL) & np.all((X >= lo) & (X <= hi), axis=1)

        interval = None
        if dim == 1 and not np.any(self.B):
            b0, c0 = float(self.b[0]), self.beta_const
            if b0 == 0.0:
                interval = RealSet1D.real_line() if m <= c0 <= M else RealSet1D.empty()
            else:
                ends = sorted([(m - c0) / b0, (M - c0) / b0])
                interval = RealSet1D.interval(*ends)
            if box is not None:
                interval = interval & RealSet1D.interval(-box, box)
        name = "K" if box is None else f"K∩box({box:g})"
        if interval is not None:
            return SetOracle.from_interval(interval, name=name)
        return SetOracle(dim=dim, contains_fn=pred, convex=not np.any(self.B), bounds=(lo, hi), name=name)

    def conditions(self, n_samples: int = 512, seed: int = 0) -> dict:
        """Status of positive definiteness and of the three alternative conditions."""
        eig_a = np.linalg.eigvalsh(self.A)
        eig_b = np.linalg.eigvalsh(self.B)
        out: dict[str, Any] = {"A_positive_definite": bool(eig_a[0] > 0), "m_positive": self.m > 0}
        out["a"] = "exact" if not np.any(self.B) else "fails"
        X = region_grid(self.region(self.box), n_samples, seed)
        fx = self.f(X) if X.shape[0] else np.zeros(0)
        if eig_b[-1] <= 1e-12:
            out["b"] = "sampled" if np.all(fx >= -TOL) else "fails"
        else:
            out["b"] = "fails"
        if eig_b[0] >= -1e-12:
            out["c"] = "sampled" if np.all(fx <= TOL) else "fails"
        else:
            out["c"] = "fails"
        return out

    def validate(self) -> dict:
        if self.A.shape != (self.dim, self.dim) or self.B.shape != self.A.shape:
            raise InvariantViolation("A and B must be square matrices of the same size")
        if self.a.shape != (self.dim,) or self.b.shape != (self.dim,):
            raise InvariantViolation("a and b must be vectors matching A")
        if not (np.allclose(self.A, self.A.T) and np.allclose(self.B, self.B.T)):
            raise InvariantViolation("A and B must be symmetric")
        if not (0 < self.m <= self.M):
            raise InvariantViolation("need 0 < m <= M")
        cond = self.conditions()
        if not cond["A_positive_definite"]:
            raise InvariantViolation("A must be positive definite")
        if self.case is not None:
            if cond[self.case] == "fails":
                raise InvariantViolation(f"declared condition ({self.case}) fails")
        elif all(cond[k] == "fails" for k in "abc"):
            raise InvariantViolation("none of the conditions (a) B = 0, (b) f >= 0 on K with B <= 0, "
                                     "(c) f <= 0 on K with B >= 0 holds")
        return cond

    @classmethod
    def from_params(cls, p: Mapping) -> "QFPInstance":
        """Build from config entries; matrices are row-major nested lists or flat lists."""
        if "A" not in p:
            raise InvalidParams("qfp needs A")
        A = np.asarray(p["A"], dtype=float)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        if A.ndim == 1:
            n = int(round(math.sqrt(A.size)))
            if n * n != A.size:
                raise InvalidParams("flat A must have a square number of entries")
            A = A.reshape(n, n)
        n = A.shape[0]

        def mat(key):
            if key not in p:
                return np.zeros((n, n))
            M_ = np.asarray(p[key], dtype=float)
            return M_.reshape(n, n) if M_.size == n * n else np.full((n, n), np.nan)

        def vec(key):
            v = np.asarray(p.get(key, np.zeros(n)), dtype=float).reshape(-1)
            return v if v.size == n else np.full(n, np.nan)

        inst = cls(A=A, B=mat("B"), a=vec("a"), b=vec("b"), alpha=float(p.get("alpha", 0.0)),
                   beta_const=float(p.get("beta_const", 1.0)), m=float(p.get("m", 1.0)), M=float(p.get("M", 1.0)),
                   case=p.get("case"), box=float(p.get("box", DEFAULT_BOX)))
        if np.isnan(inst.B).any() or np.isnan(inst.a).any() or np.isnan(inst.b).any():
            raise InvalidParams("qfp: B, a, b must match the size of A")
        if inst.case is not None and inst.case not in ("a", "b", "c"):
            raise InvalidParams("qfp: case must be one of a, b, c")
        return inst

    def to_record(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist(), "a": self.a.tolist(), "b": self.b.tolist(),
                "alpha": self.alpha, "beta_const": self.beta_const, "m": self.m, "M": self.M,
                "modulus": self.modulus}


def qfp_build(inst: QFPInstance) -> FnModel:
    """f/g restricted to K (+inf outside), annotated with modulus lambda_min(A)/M."""
    cond = inst.validate()
    K = inst.region()

    def h(X, inst=inst, K=K):
        val = inst.f(X) / inst.g(X)
        return np.where(K.contains(X), val, INF)

    return FnModel(inst.dim, h, K,
                   {"lsc": True, "sq_modulus": inst.modulus, "quasiconvex": True, "qfp": inst,
                    "qfp_conditions": cond, "locally_lipschitz_on_K": True},
                   "qfp")


# ---------------------------------------------------------------------------
# strong minima
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrongMinVerdict:
    holds: bool
    margin: float
    witness: np.ndarray | None
    n_samples: int

    @property
    def status(self) -> str:
        return "Holds" if self.holds else "Fails"

    def to_record(self) -> dict:
        rec = {"status": self.status, "margin": self.margin, "n_samples": self.n_samples}
        if self.witness is not None:
            rec["witness"] = self.witness.tolist()
        return rec


def strong_minimum_check(h: FnModel, region, xbar, gamma: float, grid=None, tol: float = TOL) -> StrongMinVerdict:
    """h(x) >= h(xbar) + gamma*|x - xbar|^2 on sampled points of the region."""
    reg = _as_oracle(region, h.dim)
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    if not reg.contains(xbar):
        raise PointNotInSet("xbar must lie in the region")
    hx = eval_extended(h, xbar)
    if grid is None:
        bps = h.annotation("breakpoints", ())
        grid = sample_points(reg, xbar, far_field=1e4, breakpoints=bps)
    Y = np.asarray(grid, dtype=float).reshape(-1, h.dim)
    Y = Y[reg.contains(Y)]
    if Y.shape[0] == 0:
        return StrongMinVerdict(True, 0.0, None, 0)
    with np.errstate(invalid="ignore"):
        gap = h.evaluate(Y) - hx - gamma * np.sum((Y - xbar[None, :]) ** 2, axis=1)
    gap = np.where(np.isnan(gap), INF, gap)
    i = int(np.argmin(gap))
    if gap[i] >= -tol:
        return StrongMinVerdict(True, float(gap[i]), None, Y.shape[0])
    return StrongMinVerdict(False, float(gap[i]), Y[i].copy(), Y.shape[0])
