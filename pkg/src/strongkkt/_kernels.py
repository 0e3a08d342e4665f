"""Hot numerical kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the environment:

* ``STRONGKKT_BACKEND=numpy`` or ``STRONGKKT_DISABLE_NUMBA=1`` forces numpy;
* otherwise numba is used when it imports cleanly.

``use_backend`` switches temporarily (tests and the benchmark use it to
compare both paths on identical inputs).
"""

from __future__ import annotations

import contextlib
import os
from typing import Iterator

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba as nb

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover
    nb = None
    _HAVE_NUMBA = False


def _env_backend() -> str:
    if os.environ.get("STRONGKKT_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    choice = os.environ.get("STRONGKKT_BACKEND", "").strip().lower()
    if choice == "numpy" or not _HAVE_NUMBA:
        return "numpy"
    return "numba"


_BACKEND = _env_backend()


def backend() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return _BACKEND


@contextlib.contextmanager
def use_backend(name: str) -> Iterator[None]:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    old = _BACKEND
    _BACKEND = name
    try:
        yield
    finally:
        _BACKEND = old


def _njit(fn):
    if not _HAVE_NUMBA:
        return fn
    return nb.njit(cache=True, fastmath=False)(fn)


# ---------------------------------------------------------------------------
# strong-subdifferential margins
# ---------------------------------------------------------------------------
#
# For one grid row with s = <xi,d>/beta + gamma|d|^2/2 and
# c = (1/beta + gamma)|d|^2/2 the lambda-part is phi(l) = l*s - l^2*c, whose
# maximum over [0,1] sits at the clamped vertex s/(2c).  Rows whose right-hand
# side vanishes are scored by the initial slope: sup phi <= 0 iff s <= 0, and
# the slope measures the violation linearly instead of quadratically.


def _strong_margins_numpy(xd, dd, rhs, beta, gamma):
    xd = np.asarray(xd, dtype=np.float64)
    dd = np.asarray(dd, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    s = xd / beta + 0.5 * gamma * dd
    c = 0.5 * (1.0 / beta + gamma) * dd
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = np.where(c > 0, s * s / (4.0 * c), 0.0)
    sup = np.where(s <= 0.0, 0.0, np.where(s >= 2.0 * c, s - c, vertex))
    out = rhs - sup
    zero_rhs = rhs == 0.0
    out = np.where(zero_rhs, -np.maximum(s, 0.0), out)
    out = np.where(dd == 0.0, np.where(np.isinf(rhs), np.inf, 0.0), out)
    out = np.where(np.isposinf(rhs), np.inf, out)
    return out


@_njit
def _strong_margins_loop(xd, dd, rhs, beta, gamma):
    n = xd.shape[0]
    out = np.empty(n)
    for i in range(n):
        r = rhs[i]
        if r == np.inf:
            out[i] = np.inf
            continue
        q = dd[i]
        if q == 0.0:
            out[i] = 0.0
            continue
        s = xd[i] / beta + 0.5 * gamma * q
        if r == 0.0:
            out[i] = -s if s > 0.0 else 0.0
            continue
        c = 0.5 * (1.0 / beta + gamma) * q
        if s <= 0.0:
            sup = 0.0
        elif s >= 2.0 * c:
            sup = s - c
        else:
            sup = s * s / (4.0 * c)
        out[i] = r - sup
    return out


def strong_margins(xd, dd, rhs, beta: float, gamma: float) -> np.ndarray:
    """Per-row margin RHS - sup_lambda phi (slope-scored where RHS = 0)."""
    xd = np.ascontiguousarray(xd, dtype=np.float64)
    dd = np.ascontiguousarray(dd, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if _BACKEND == "numba":
        return _strong_margins_loop(xd, dd, rhs, float(beta), float(gamma))
    return _strong_margins_numpy(xd, dd, rhs, float(beta), float(gamma))


# ---------------------------------------------------------------------------
# strong quasiconvexity violation over (pair, lambda) samples
# ---------------------------------------------------------------------------


def _sq_violation_numpy(hx, hy, hz, dist2, lam, gamma):
    top = np.maximum(hx, hy)[:, None]
    bonus = 0.5 * gamma * (lam * (1.0 - lam))[None, :] * dist2[:, None]
    with np.errstate(invalid="ignore"):
        viol = hz - top + bonus
    viol = np.where(np.isposinf(top), -np.inf, viol)
    viol = np.where(np.isnan(viol), -np.inf, viol)
    flat = int(np.argmax(viol))
    p, l = divmod(flat, viol.shape[1])
    return float(viol[p, l]), p, l


@_njit
def _sq_violation_loop(hx, hy, hz, dist2, lam, gamma):
    best = -np.inf
    bp = 0
    bl = 0
    npair = hz.shape[0]
    nl = hz.shape[1]
    for p in range(npair):
        top = hx[p] if hx[p] > hy[p] else hy[p]
        if top == np.inf:
            continue
        for l in range(nl):
            v = hz[p, l] - top + 0.5 * gamma * lam[l] * (1.0 - lam[l]) * dist2[p]
            if v > best:
                best = v
                bp = p
                bl = l
    return best, bp, bl


def sq_max_violation(hx, hy, hz, dist2, lam, gamma: float):
    """Largest h(z) - max(h(x),h(y)) + lam(1-lam)(gamma/2)|x-y|^2 over samples.

    Returns (violation, pair index, lambda index); pairs whose max is +inf are
    vacuous.
    """
    hx = np.ascontiguousarray(hx, dtype=np.float64)
    hy = np.ascontiguousarray(hy, dtype=np.float64)
    hz = np.ascontiguousarray(hz, dtype=np.float64)
    dist2 = np.ascontiguousarray(dist2, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    if hz.size == 0:
        return -np.inf, 0, 0
    if _BACKEND == "numba":
        v, p, l = _sq_violation_loop(hx, hy, hz, dist2, lam, float(gamma))
        return float(v), int(p), int(l)
    return _sq_violation_numpy(hx, hy, hz, dist2, lam, float(gamma))


# ---------------------------------------------------------------------------
# minimum-norm point of a convex hull (Wolfe's corral method)
# ---------------------------------------------------------------------------


def _affine_min(Q):
    k = Q.shape[0]
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = Q @ Q.T
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=-1.0)[0]
    return sol[:k]


_affine_min_k = _njit(_affine_min)


def _wolfe_impl(P, tol, max_iter):
    m = P.shape[0]
    norms2 = np.empty(m)
    for i in range(m):
        norms2[i] = np.dot(P[i], P[i])
    scale = max(norms2.max(), 1e-300)
    corral = np.empty(m, dtype=np.int64)
    w = np.zeros(m)
    k = 1
    corral[0] = int(np.argmin(norms2))
    w[0] = 1.0
    x = P[corral[0]].copy()
    eps_w = 1e-14
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if dots[j] >= np.dot(x, x) - tol * scale:
            break
        present = False
        for q in range(k):
            if corral[q] == j:
                present = True
        if present:
            break
        corral[k] = j
        w[k] = 0.0
        k += 1
        for _minor in range(max_iter):
            Q = np.ascontiguousarray(P[corral[:k]])
            a = _affine_min_k(Q)
            if a.min() > eps_w:
                w[:k] = a
                break
            theta = 1.0
            for q in range(k):
                if a[q] <= eps_w:
                    den = w[q] - a[q]
                    if den > 0.0:
                        cand = w[q] / den
                        if cand < theta:
                            theta = cand
            for q in range(k):
                w[q] = theta * a[q] + (1.0 - theta) * w[q]
            # drop vanished weights, keep at least one point
            nk = 0
            for q in range(k):
                if w[q] > eps_w or (nk == 0 and q == k - 1):
                    corral[nk] = corral[q]
                    w[nk] = w[q]
                    nk += 1
            k = nk
            tot = w[:k].sum()
            w[:k] = w[:k] / tot
        x = np.zeros(P.shape[1])
        for q in range(k):
            x += w[q] * P[corral[q]]
    return x


_wolfe_loop = _njit(_wolfe_impl)


def _wolfe_numpy(P, tol, max_iter):
    m = P.shape[0]
    norms2 = np.einsum("ij,ij->i", P, P)
    scale = max(float(norms2.max()), 1e-300)
    corral = [int(np.argmin(norms2))]
    w = np.array([1.0])
    x = P[corral[0]].copy()
    eps_w = 1e-14
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if dots[j] >= x @ x - tol * scale or j in corral:
            break
        corral.append(j)
        w = np.append(w, 0.0)
        for _minor in range(max_iter):
            a = _affine_min(P[corral])
            if a.min() > eps_w:
                w = a
                break
            mask = a <= eps_w
            den = w[mask] - a[mask]
            ratios = np.where(den > 0, w[mask] / np.where(den > 0, den, 1.0), 1.0)
            theta = min(1.0, float(ratios.min())) if ratios.size else 1.0
            w = theta * a + (1.0 - theta) * w
            keep = w > eps_w
            if not keep.any():
                keep[-1] = True
            corral = [c for c, kflag in zip(corral, keep) if kflag]
            w = w[keep] / w[keep].sum()
        x = w @ P[corral]
    return x


def min_norm_point(points: np.ndarray, tol: float = 1e-15, max_iter: int = 10_000) -> np.ndarray:
    """Minimum-norm point of conv(points); rows of ``points`` are vectors."""
    P = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    if _BACKEND == "numba":
        return _wolfe_loop(P, float(tol), int(max_iter))
    return _wolfe_numpy(P, float(tol), int(max_iter))


# ---------------------------------------------------------------------------
# distance from 0 to interval-valued sums (1-D multiplier search)
# ---------------------------------------------------------------------------


def _interval_sum_numpy(lo, hi):
    # lo, hi: (rows, terms), already scaled; NaN marks an empty term.
    empty = np.isnan(lo).any(axis=1) | np.isnan(hi).any(axis=1)
    with np.errstate(invalid="ignore"):
        L = np.nansum(lo, axis=1)
        U = np.nansum(hi, axis=1)
        L = np.where(np.isneginf(lo).any(axis=1), -np.inf, L)
        U = np.where(np.isposinf(hi).any(axis=1), np.inf, U)
    dist = np.where(L > 0, L, np.where(U < 0, -U, 0.0))
    with np.errstate(invalid="ignore"):
        den_lo = np.nansum(np.abs(lo), axis=1)
        den_hi = np.nansum(np.abs(hi), axis=1)
    den = np.where(L > 0, den_lo, np.where(U < 0, den_hi, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(dist == 0.0, 0.0, dist / den)
    dist = np.where(empty, np.inf, dist)
    rel = np.where(empty, np.inf, rel)
    return dist, rel


@_njit
def _interval_sum_loop(lo, hi):
    R, T = lo.shape
    dist = np.empty(R)
    rel = np.empty(R)
    for r in range(R):
        L = 0.0
        U = 0.0
        dl = 0.0
        du = 0.0
        empty = False
        for t in range(T):
            a = lo[r, t]
            b = hi[r, t]
            if np.isnan(a) or np.isnan(b):
                empty = True
                break
            L += a
            U += b
            dl += abs(a)
            du += abs(b)
        if empty:
            dist[r] = np.inf
            rel[r] = np.inf
            continue
        if L > 0.0:
            dist[r] = L
            rel[r] = L / dl
        elif U < 0.0:
            dist[r] = -U
            rel[r] = -U / du
        else:
            dist[r] = 0.0
            rel[r] = 0.0
    return dist, rel


def interval_sum_residuals(lo: np.ndarray, hi: np.ndarray):
    """Distance from 0 to [sum lo, sum hi] per row, plus the relative version.

    The relative residual divides by the summed magnitudes of the endpoint
    selections that attain the distance; NaN entries mark empty terms.
    """
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if _BACKEND == "numba":
        d, r = _interval_sum_loop(lo, hi)
        return d, r
    return _interval_sum_numpy(lo, hi)
