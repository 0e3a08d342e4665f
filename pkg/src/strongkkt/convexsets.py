"""Exact 1-D interval unions and sampled cone/polar predicates in R^n.

``RealSet1D`` is the exact algebra used for every one-dimensional answer
(subdifferential intervals, normal cones, horizon sets).  ``SetOracle``
describes a general set by a vectorised membership predicate plus optional
halfspace or generator data; questions about it are answered on grids and
reported as sampled verdicts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import EmptyGrid, EmptyInput, PointNotInSet

TOL = 1e-9
STRICT_MARGIN = 1e-12

INF = math.inf


# ---------------------------------------------------------------------------
# RealSet1D
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isinf(lo):
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(hi):
            object.__setattr__(self, "hi_closed", False)

    @property
    def is_empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = (x >= self.lo) if self.lo_closed else (x > self.lo)
        below = (x <= self.hi) if self.hi_closed else (x < self.hi)
        return above & below


def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _parse_num(tok: str) -> float:
    tok = tok.strip().replace("∞", "inf").replace("−", "-")
    if tok in ("+inf", "inf"):
        return INF
    if tok == "-inf":
        return -INF
    if "/" in tok:
        num, den = tok.split("/")
        return float(num) / float(den)
    return float(tok)


class RealSet1D:
    """Finite union of disjoint, sorted real intervals (possibly empty)."""

    __slots__ = ("_ivs",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        self._ivs: tuple[Interval, ...] = _normalise(list(intervals))

    # -- constructors -------------------------------------------------------
    @classmethod
    def empty(cls) -> "RealSet1D":
        return cls(())

    @classmethod
    def real_line(cls) -> "RealSet1D":
        return cls((Interval(-INF, INF, False, False),))

    @classmethod
    def point(cls, a: float) -> "RealSet1D":
        return cls((Interval(a, a, True, True),))

    @classmethod
    def interval(cls, lo: float, hi: float, lo_closed: bool = True, hi_closed: bool = True) -> "RealSet1D":
        return cls((Interval(lo, hi, lo_closed, hi_closed),))

    @classmethod
    def nonneg(cls) -> "RealSet1D":
        return cls.interval(0.0, INF)

    @classmethod
    def nonpos(cls) -> "RealSet1D":
        return cls.interval(-INF, 0.0)

    @classmethod
    def parse(cls, text: str) -> "RealSet1D":
        """Parse canonical notation, e.g. ``"(-inf,-0.5] U {2}"`` or ``"empty"``."""
        s = text.strip()
        if s in ("empty", "∅", "{}", ""):
            return cls.empty()
        if s in ("R", "ℝ"):
            return cls.real_line()
        parts = [p.strip() for p in re.split(r"\s+U\s+|\s*∪\s*", s)]
        ivs = []
        for p in parts:
            if p.startswith("{") and p.endswith("}"):
                inner = p[1:-1].strip()
                if not inner:
                    continue
                for tok in inner.split(","):
                    a = _parse_num(tok)
                    ivs.append(Interval(a, a))
                continue
            if len(p) < 5 or p[0] not in "[(" or p[-1] not in "])":
                raise ValueError(f"cannot parse interval {p!r}")
            body = p[1:-1].split(",")
            if len(body) != 2:
                raise ValueError(f"cannot parse interval {p!r}")
            lo, hi = _parse_num(body[0]), _parse_num(body[1])
            if lo > hi:
                raise ValueError(f"reversed interval {p!r}")
            ivs.append(Interval(lo, hi, p[0] == "[", p[-1] == "]"))
        return cls(ivs)

    @classmethod
    def from_record(cls, rec: Sequence) -> "RealSet1D":
        return cls(Interval(_parse_num(str(r["lo"])), _parse_num(str(r["hi"])), r["lo_closed"], r["hi_closed"]) for r in rec)

    # -- basic protocol ----------------------------------------------------
    @property
    def intervals(self) -> tuple[Interval, ...]:
        return self._ivs

    @property
    def is_empty(self) -> bool:
        return not self._ivs

    @property
    def inf(self) -> float:
        return self._ivs[0].lo if self._ivs else INF

    @property
    def sup(self) -> float:
        return self._ivs[-1].hi if self._ivs else -INF

    @property
    def is_bounded(self) -> bool:
        return self.is_empty or (math.isfinite(self.inf) and math.isfinite(self.sup))

    @property
    def is_closed(self) -> bool:
        return all(
            (iv.lo_closed or math.isinf(iv.lo)) and (iv.hi_closed or math.isinf(iv.hi)) for iv in self._ivs
        )

    @property
    def is_interval(self) -> bool:
        return len(self._ivs) <= 1

    def __eq__(self, other) -> bool:
        return isinstance(other, RealSet1D) and self._ivs == other._ivs

    def __hash__(self) -> int:
        return hash(self._ivs)

    def __str__(self) -> str:
        if not self._ivs:
            return "empty"
        out = []
        for iv in self._ivs:
            if iv.lo == iv.hi:
                out.append("{" + _fmt(iv.lo) + "}")
            else:
                out.append(
                    ("[" if iv.lo_closed else "(") + _fmt(iv.lo) + "," + _fmt(iv.hi) + ("]" if iv.hi_closed else ")")
                )
        return " U ".join(out)

    def __repr__(self) -> str:
        return f"RealSet1D({str(self)!r})"

    def to_record(self) -> list[dict]:
        return [
            {"lo": _fmt(iv.lo), "hi": _fmt(iv.hi), "lo_closed": iv.lo_closed, "hi_closed": iv.hi_closed}
            for iv in self._ivs
        ]

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        res = np.zeros(x.shape, dtype=bool)
        for iv in self._ivs:
            res |= iv.contains(x)
        return bool(res) if res.ndim == 0 else res

    def __contains__(self, x) -> bool:
        return bool(self.contains(float(x)))

    # -- algebra -----------------------------------------------------------
    def union(self, other: "RealSet1D") -> "RealSet1D":
        return RealSet1D(self._ivs + other._ivs)

    __or__ = union

    def intersection(self, other: "RealSet1D") -> "RealSet1D":
        out = []
        for a in self._ivs:
            for b in other._ivs:
                if a.lo > b.lo or (a.lo == b.lo and not a.lo_closed):
                    lo, lc = a.lo, a.lo_closed
                else:
                    lo, lc = b.lo, b.lo_closed
                if a.hi < b.hi or (a.hi == b.hi and not a.hi_closed):
                    hi, hc = a.hi, a.hi_closed
                else:
                    hi, hc = b.hi, b.hi_closed
                if lo < hi or (lo == hi and lc and hc):
                    out.append(Interval(lo, hi, lc, hc))
        return RealSet1D(out)

    __and__ = intersection

    def __add__(self, other: "RealSet1D") -> "RealSet1D":
        """Minkowski sum; A + empty = empty."""
        if self.is_empty or other.is_empty:
            return RealSet1D.empty()
        out = []
        for a in self._ivs:
            for b in other._ivs:
                out.append(Interval(a.lo + b.lo, a.hi + b.hi, a.lo_closed and b.lo_closed, a.hi_closed and b.hi_closed))
        return RealSet1D(out)

    def scale(self, c: float) -> "RealSet1D":
        c = float(c)
        if self.is_empty:
            return self
        if c == 0.0:
            return RealSet1D.point(0.0)
        out = []
        for iv in self._ivs:
            if c > 0:
                out.append(Interval(c * iv.lo, c * iv.hi, iv.lo_closed, iv.hi_closed))
            else:
                out.append(Interval(c * iv.hi, c * iv.lo, iv.hi_closed, iv.lo_closed))
        return RealSet1D(out)

    def __neg__(self) -> "RealSet1D":
        return self.scale(-1.0)

    def shift(self, a: float) -> "RealSet1D":
        return RealSet1D(Interval(iv.lo + a, iv.hi + a, iv.lo_closed, iv.hi_closed) for iv in self._ivs)

    def closure(self) -> "RealSet1D":
        return RealSet1D(Interval(iv.lo, iv.hi, True, True) for iv in self._ivs)

    def hull(self) -> "RealSet1D":
        if self.is_empty:
            return self
        a, b = self._ivs[0], self._ivs[-1]
        return RealSet1D((Interval(a.lo, b.hi, a.lo_closed, b.hi_closed),))

    def complement(self) -> "RealSet1D":
        out = []
        prev, prev_closed = -INF, False
        for iv in self._ivs:
            if prev < iv.lo or (prev == iv.lo and not prev_closed and not iv.lo_closed):
                out.append(Interval(prev, iv.lo, not prev_closed if math.isfinite(prev) else False, not iv.lo_closed))
            prev, prev_closed = iv.hi, iv.hi_closed
        if prev < INF:
            out.append(Interval(prev, INF, not prev_closed, False))
        return RealSet1D(out)

    def difference(self, other: "RealSet1D") -> "RealSet1D":
        return self.intersection(other.complement())

    def positive_hull(self) -> "RealSet1D":
        """Union of mu*S over mu > 0."""
        parts = []
        for iv in self._ivs:
            if iv.hi > 0:
                parts.append(Interval(0.0, INF, False, False))
            if iv.lo < 0:
                parts.append(Interval(-INF, 0.0, False, False))
            if iv.contains(0.0):
                parts.append(Interval(0.0, 0.0))
        return RealSet1D(parts)

    def cone(self) -> "RealSet1D":
        """{0} together with mu*S for mu > 0; cone of the empty set is {0}."""
        return self.positive_hull().union(RealSet1D.point(0.0))

    def polar(self) -> "RealSet1D":
        """{v : v*s <= 0 for all s in S}."""
        out = RealSet1D.real_line()
        if self.sup > 0:
            out = out & RealSet1D.nonpos()
        if self.inf < 0:
            out = out & RealSet1D.nonneg()
        return out

    def horizon(self) -> "RealSet1D":
        return horizon_set_1d(self)

    def support(self, d: float) -> float:
        return support_value(self, d)

    def distance(self, x: float) -> float:
        if self.is_empty:
            return INF
        if self.contains(x):
            return 0.0
        best = INF
        for iv in self._ivs:
            best = min(best, abs(x - iv.lo) if math.isfinite(iv.lo) else INF, abs(x - iv.hi) if math.isfinite(iv.hi) else INF)
        return best

    def project(self, x: float) -> float:
        """Nearest point of the closure."""
        if self.is_empty:
            raise EmptyInput("projection onto the empty set")
        best, arg = INF, x
        for iv in self._ivs:
            p = min(max(x, iv.lo), iv.hi)
            if abs(p - x) < best:
                best, arg = abs(p - x), p
        return arg

    def sample_point(self) -> float | None:
        """A deterministic element of the set (None when empty)."""
        for iv in self._ivs:
            if iv.lo == iv.hi:
                return iv.lo
            if math.isfinite(iv.lo) and math.isfinite(iv.hi):
                return 0.5 * (iv.lo + iv.hi)
            if math.isfinite(iv.lo):
                return iv.lo + 1.0
            if math.isfinite(iv.hi):
                return iv.hi - 1.0
            return 0.0
        return None

    def approx_equal(self, other: "RealSet1D", tol: float) -> bool:
        """Same component count and endpoints within ``tol`` (closedness ignored)."""
        a, b = self._ivs, other._ivs
        if len(a) != len(b):
            return False
        for x, y in zip(a, b):
            for u, v in ((x.lo, y.lo), (x.hi, y.hi)):
                if math.isinf(u) or math.isinf(v):
                    if u != v:
                        return False
                elif abs(u - v) > tol:
                    return False
        return True

    def witness_outside(self, other: "RealSet1D") -> float | None:
        """A point of ``self`` not in ``other``, or None if self is a subset."""
        diff = self.difference(other)
        return diff.sample_point()

    def merge_close(self, tol: float) -> "RealSet1D":
        """Bridge gaps of length <= tol between consecutive components."""
        out: list[Interval] = []
        for iv in self._ivs:
            if out and iv.lo - out[-1].hi <= tol:
                last = out.pop()
                iv = Interval(last.lo, max(last.hi, iv.hi), last.lo_closed,
                              iv.hi_closed if iv.hi >= last.hi else last.hi_closed)
            out.append(iv)
        return RealSet1D(out)

    def issubset(self, other: "RealSet1D") -> bool:
        return self.difference(other).is_empty


def _normalise(ivs: list[Interval]) -> tuple[Interval, ...]:
    ivs = sorted((iv for iv in ivs if not iv.is_empty), key=lambda iv: (iv.lo, not iv.lo_closed))
    out: list[Interval] = []
    for iv in ivs:
        if out:
            last = out[-1]
            touching = last.hi > iv.lo or (last.hi == iv.lo and (last.hi_closed or iv.lo_closed))
            if touching:
                if iv.hi > last.hi:
                    hi, hc = iv.hi, iv.hi_closed
                elif iv.hi == last.hi:
                    hi, hc = last.hi, last.hi_closed or iv.hi_closed
                else:
                    hi, hc = last.hi, last.hi_closed
                out[-1] = Interval(last.lo, hi, last.lo_closed, hc)
                continue
        out.append(iv)
    return tuple(out)


def as_realset(obj) -> RealSet1D:
    if isinstance(obj, RealSet1D):
        return obj
    if isinstance(obj, SetOracle) and obj.interval is not None:
        return obj.interval
    if isinstance(obj, str):
        return RealSet1D.parse(obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a 1-D set")


# ---------------------------------------------------------------------------
# SetOracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetOracle:
    """Membership oracle for a subset of R^dim.

    ``contains_fn`` maps an (N, dim) array to a boolean array.  When
    ``halfspaces`` is given as (A, b) the predicate is exactly ``A x <= b``
    (with the closed-inequality tolerance).  ``bounds`` is a bounding box used
    only for sampling; ``interval`` carries the exact description in 1-D.
    """

    dim: int
    contains_fn: Callable[[np.ndarray], np.ndarray]
    generators: np.ndarray | None = None
    halfspaces: tuple[np.ndarray, np.ndarray] | None = None
    convex: bool = False
    bounds: tuple[np.ndarray, np.ndarray] | None = None
    interval: RealSet1D | None = None
    name: str = "set"
    meta: dict = field(default_factory=dict, compare=False)

    def contains(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim <= 1 and (X.ndim == 0 or X.shape[0] == self.dim)
        Xb = X.reshape(-1, self.dim)
        out = np.asarray(self.contains_fn(Xb), dtype=bool).reshape(-1)
        return bool(out[0]) if single else out

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_interval(cls, S: RealSet1D | str, name: str | None = None) -> "SetOracle":
        S = as_realset(S)
        lo = S.inf if not S.is_empty else 0.0
        hi = S.sup if not S.is_empty else 0.0
        return cls(
            dim=1,
            contains_fn=lambda X, S=S: S.contains(X[:, 0]),
            convex=S.is_interval,
            bounds=(np.array([lo]), np.array([hi])),
            interval=S,
            name=name or str(S),
        )

    @classmethod
    def whole_space(cls, dim: int) -> "SetOracle":
        if dim == 1:
            return cls.from_interval(RealSet1D.real_line(), name="R")
        return cls(
            dim=dim,
            contains_fn=lambda X: np.ones(X.shape[0], dtype=bool),
            convex=True,
            bounds=(np.full(dim, -INF), np.full(dim, INF)),
            name=f"R^{dim}",
        )

    @classmethod
    def empty_set(cls, dim: int) -> "SetOracle":
        if dim == 1:
            return cls.from_interval(RealSet1D.empty(), name="empty")
        return cls(dim=dim, contains_fn=lambda X: np.zeros(X.shape[0], dtype=bool), convex=True, name="empty")

    @classmethod
    def from_halfspaces(cls, A, b, bounds=None, name: str = "polyhedron", tol: float = TOL) -> "SetOracle":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        dim = A.shape[1]

        def pred(X, A=A, b=b):
            return np.all(X @ A.T <= b[None, :] + tol, axis=1)

        interval = None
        if dim == 1:
            lo, hi = -INF, INF
            for a, c in zip(A[:, 0], b):
                if a > 0:
                    hi = min(hi, c / a)
                elif a < 0:
                    lo = max(lo, c / a)
                elif c < 0:
                    lo, hi = 1.0, 0.0
            interval = RealSet1D.interval(lo, hi) if lo <= hi else RealSet1D.empty()
        if bounds is None:
            bounds = (np.full(dim, -INF), np.full(dim, INF))
        return cls(dim=dim, contains_fn=pred, halfspaces=(A, b), convex=True,
                   bounds=(np.asarray(bounds[0], float), np.asarray(bounds[1], float)), interval=interval, name=name)

    @classmethod
    def box(cls, lo, hi, name: str = "box") -> "SetOracle":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        dim = lo.size
        A = np.vstack([np.eye(dim), -np.eye(dim)])
        b = np.concatenate([hi, -lo])
        keep = np.isfinite(b)
        return cls.from_halfspaces(A[keep] if keep.any() else np.zeros((1, dim)), b[keep] if keep.any() else np.zeros(1),
                                   bounds=(lo, hi), name=name)

    @classmethod
    def ball(cls, center, radius: float, name: str = "ball") -> "SetOracle":
        c = np.atleast_1d(np.asarray(center, dtype=float))
        r = float(radius)
        if c.size == 1:
            return cls.from_interval(RealSet1D.interval(c[0] - r, c[0] + r), name=name)
        return cls(
            dim=c.size,
            contains_fn=lambda X, c=c, r=r: np.linalg.norm(X - c[None, :], axis=1) <= r + TOL,
            convex=True,
            bounds=(c - r, c + r),
            name=name,
            meta={"center": c, "radius": r},
        )

    @classmethod
    def from_points(cls, points, name: str = "points") -> "SetOracle":
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[0] == 1 and P.shape[1] != 1 and np.asarray(points).ndim == 1:
            P = P.T
        dim = P.shape[1]

        def pred(X, P=P):
            d = np.abs(X[:, None, :] - P[None, :, :]).max(axis=2)
            return (d <= TOL).any(axis=1)

        interval = None
        if dim == 1:
            interval = RealSet1D([Interval(p, p) for p in P[:, 0]])
        return cls(dim=dim, contains_fn=pred, generators=P, convex=P.shape[0] == 1,
                   bounds=(P.min(axis=0), P.max(axis=0)), interval=interval, name=name)

    def intersect(self, other: "SetOracle") -> "SetOracle":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        if self.interval is not None and other.interval is not None:
            return SetOracle.from_interval(self.interval & other.interval)
        lo = np.maximum(self._lo(), other._lo())
        hi = np.minimum(self._hi(), other._hi())
        hs = None
        if self.halfspaces is not None and other.halfspaces is not None:
            hs = (np.vstack([self.halfspaces[0], other.halfspaces[0]]),
                  np.concatenate([self.halfspaces[1], other.halfspaces[1]]))
        return SetOracle(
            dim=self.dim,
            contains_fn=lambda X, a=self, b=other: a.contains_fn(X) & b.contains_fn(X),
            halfspaces=hs,
            convex=self.convex and other.convex,
            bounds=(lo, hi),
            name=f"{self.name}∩{other.name}",
        )

    def _lo(self):
        return self.bounds[0] if self.bounds is not None else np.full(self.dim, -INF)

    def _hi(self):
        return self.bounds[1] if self.bounds is not None else np.full(self.dim, INF)

    def project(self, x) -> np.ndarray:
        """Euclidean projection (exact in 1-D, Dykstra for halfspaces)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.interval is not None:
            return np.array([self.interval.project(float(x[0]))])
        if "center" in self.meta:
            c, r = self.meta["center"], self.meta["radius"]
            v = x - c
            n = np.linalg.norm(v)
            return x.copy() if n <= r else c + v * (r / n)
        if self.halfspaces is None:
            raise NotImplementedError("projection needs halfspace data")
        return dykstra_project(x, *self.halfspaces)


def dykstra_project(x, A, b, iters: int = 2000, tol: float = 1e-13) -> np.ndarray:
    """Projection onto {z : A z <= b} by Dykstra's alternating scheme."""
    A = np.atleast_2d(A)
    z = np.array(x, dtype=float)
    incs = np.zeros((A.shape[0], z.size))
    for _ in range(iters):
        z_old = z.copy()
        for i in range(A.shape[0]):
            a = A[i]
            y = z + incs[i]
            viol = a @ y - b[i]
            p = y - (viol / (a @ a)) * a if viol > 0 else y
            incs[i] = y - p
            z = p
        if np.linalg.norm(z - z_old) <= tol:
            break
    return z


def contains(S, x):
    """Membership for either a SetOracle or a RealSet1D."""
    if isinstance(S, RealSet1D):
        return S.contains(x)
    return S.contains(x)


# ---------------------------------------------------------------------------
# 1-D cones and support values
# ---------------------------------------------------------------------------


def normal_cone_1d(S: RealSet1D, xbar: float) -> RealSet1D:
    """Exact normal cone of a closed 1-D set at one of its points."""
    S = as_realset(S)
    if not S.is_closed:
        raise PointNotInSet("normal_cone_1d expects a closed set")
    for iv in S.intervals:
        if iv.contains(xbar):
            if iv.lo == iv.hi:
                return RealSet1D.real_line()
            if xbar == iv.lo:
                return RealSet1D.nonpos()
            if xbar == iv.hi:
                return RealSet1D.nonneg()
            return RealSet1D.point(0.0)
    raise PointNotInSet(f"{xbar} not in {S}")


def horizon_set_1d(S: RealSet1D) -> RealSet1D:
    S = as_realset(S)
    if S.is_empty:
        return RealSet1D.empty()
    out = RealSet1D.point(0.0)
    if S.sup == INF:
        out = out | RealSet1D.nonneg()
    if S.inf == -INF:
        out = out | RealSet1D.nonpos()
    return out


def support_value(S, d) -> float:
    """sigma(S; d) = sup over S of <s, d>; -inf on the empty set."""
    if isinstance(S, RealSet1D):
        d = float(np.asarray(d).reshape(-1)[0])
        if S.is_empty:
            return -INF
        if d > 0:
            return d * S.sup
        if d < 0:
            return d * S.inf
        return 0.0
    P = np.atleast_2d(np.asarray(S, dtype=float))
    if P.size == 0:
        return -INF
    return float(np.max(P @ np.asarray(d, dtype=float).reshape(-1)))


# ---------------------------------------------------------------------------
# sampled predicates in R^n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarVerdict:
    member: bool
    margin: float
    witness: np.ndarray | None
    n_samples: int

    @property
    def status(self) -> str:
        return "Member" if self.member else "NonMember"


def polar_member(S, xbar, v, grid, tol: float = TOL) -> PolarVerdict:
    """Check <v, y - xbar> <= tol over the grid points lying in S."""
    S_or = S if isinstance(S, SetOracle) else SetOracle.from_interval(as_realset(S))
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    Y = np.asarray(grid, dtype=float).reshape(-1, S_or.dim)
    Y = Y[S_or.contains(Y)] if Y.shape[0] else Y
    if Y.shape[0] == 0:
        raise EmptyGrid("no grid point lies in the set")
    vals = (Y - xbar[None, :]) @ v
    i = int(np.argmax(vals))
    worst = float(vals[i])
    if worst <= tol:
        return PolarVerdict(True, -worst, None, Y.shape[0])
    return PolarVerdict(False, -worst, Y[i].copy(), Y.shape[0])


def tangent_contains(S, xbar, d, sched=None, n_jitter: int = 16) -> bool:
    """Is d in the tangent cone of S at xbar (searched over the schedule)?"""
    from .funcspace import LimitSchedule

    sched = sched or LimitSchedule()
    S_or = S if isinstance(S, SetOracle) else SetOracle.from_interval(as_realset(S))
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if not S_or.contains(xbar):
        raise PointNotInSet("tangent cone requested at a point outside the set")
    if np.all(d == 0):
        return True
    ts = sched.tail_steps()
    if S_or.convex:
        return bool(np.all(S_or.contains(xbar[None, :] + ts[:, None] * d[None, :])))
    rng = np.random.default_rng(0)
    U = rng.normal(size=(n_jitter, d.size))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    for t in ts:
        eps = math.sqrt(t) * np.linalg.norm(d)
        D = np.vstack([d[None, :], d[None, :] + eps * U])
        if not S_or.contains(xbar[None, :] + t * D).any():
            return False
    return True


def min_norm_in_hull(points) -> tuple[np.ndarray, float]:
    """Minimum-norm point of the convex hull of finitely many vectors."""
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise EmptyInput("min_norm_in_hull needs at least one point")
    P = np.atleast_2d(P)
    x = _kernels.min_norm_point(P)
    return x, float(np.linalg.norm(x))


def hull_distance_gap(points, x) -> float:
    """Duality gap |x| - min_i <x,p_i>/|x| bounding the suboptimality of x."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n = float(np.linalg.norm(x))
    if n == 0.0:
        return 0.0
    return n - float(np.min(P @ x)) / n


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------


def sample_points(K, center, n_uniform: int = 2048, n_refined: int = 64, radius: float = 10.0,
                  far_field: float = 1e8, breakpoints: Sequence[float] = (), seed: int = 0) -> np.ndarray:
    """Deterministic sample grid of K around ``center`` as an (N, dim) array.

    In 1-D: uniform points over K within ``radius`` of the centre, geometric
    refinement on both sides of the centre, the endpoints of K (nudged inside
    when open), points around declared breakpoints, and a geometric far field
    reaching ``far_field`` along unbounded directions.
    """
    S_or = K if isinstance(K, SetOracle) else SetOracle.from_interval(as_realset(K))
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if S_or.dim == 1 and S_or.interval is not None:
        return _sample_1d(S_or.interval, float(c[0]), n_uniform, n_refined, radius, far_field, breakpoints)
    return _sample_nd(S_or, c, n_uniform, n_refined, radius, seed)


def _sample_1d(S: RealSet1D, c: float, n_uniform, n_refined, radius, far_field, breakpoints) -> np.ndarray:
    if S.is_empty:
        return np.zeros((0, 1))
    lo = max(S.inf, c - radius) if math.isfinite(S.inf) else c - radius
    hi = min(S.sup, c + radius) if math.isfinite(S.sup) else c + radius
    if math.isfinite(S.inf) and math.isfinite(S.sup):
        lo, hi = S.inf, S.sup
    pts = [np.linspace(lo, hi, n_uniform)] if hi > lo else [np.array([lo])]
    offs = np.geomspace(1e-10, max(radius, 1.0), n_refined)
    pts += [c + offs, c - offs, np.array([c])]
    tiny = np.geomspace(1e-12, 1e-3, 8)
    for iv in S.intervals:
        for e, closed in ((iv.lo, iv.lo_closed), (iv.hi, iv.hi_closed)):
            if math.isfinite(e):
                pts.append(np.array([e]) if closed else np.array([]))
                pts.append(e + tiny)
                pts.append(e - tiny)
    for b in breakpoints:
        pts.append(np.array([b]))
        pts.append(b + tiny)
        pts.append(b - tiny)
    ff = np.geomspace(max(radius, 1.0), far_field, 48)
    if S.sup == INF:
        pts.append(c + ff)
    if S.inf == -INF:
        pts.append(c - ff)
    y = np.unique(np.concatenate(pts))
    y = y[S.contains(y)]
    return y.reshape(-1, 1)


def _sample_nd(S: SetOracle, c: np.ndarray, n_uniform, n_refined, radius, seed) -> np.ndarray:
    dim = S.dim
    lo = np.where(np.isfinite(S._lo()), S._lo(), c - radius)
    hi = np.where(np.isfinite(S._hi()), S._hi(), c + radius)
    lo = np.maximum(lo, c - radius)
    hi = np.minimum(hi, c + radius)
    per_axis = max(2, int(round(n_uniform ** (1.0 / dim))))
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(dim)]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    rng = np.random.default_rng(seed)
    dirs = np.vstack([np.eye(dim), -np.eye(dim), rng.normal(size=(4 * dim, dim))])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.geomspace(1e-9, max(radius, 1.0), n_refined)
    rays = (c[None, None, :] + radii[None, :, None] * dirs[:, None, :]).reshape(-1, dim)
    parts = [lattice, rays, c[None, :]]
    if S.generators is not None:
        parts.append(np.asarray(S.generators, dtype=float).reshape(-1, dim))
    Y = np.vstack(parts)
    Y = Y[S.contains(Y)]
    return np.unique(Y, axis=0)
