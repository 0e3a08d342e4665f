import numpy as np
import pytest

from strongkkt import _kernels as K

pytestmark = pytest.mark.skipif(not K._HAVE_NUMBA, reason="numba not importable")


def both(fn, *args):
    with K.use_backend("numpy"):
        a = fn(*args)
    with K.use_backend("numba"):
        b = fn(*args)
    return a, b


def test_backend_switch():
    before = K.backend()
    with K.use_backend("numpy"):
        assert K.backend() == "numpy"
    assert K.backend() == before
    with pytest.raises(ValueError):
        with K.use_backend("fortran"):
            pass


def test_strong_margins_agree():
    rng = np.random.default_rng(1)
    n = 5000
    xd = rng.normal(size=n)
    dd = np.abs(rng.normal(size=n))
    dd[:50] = 0.0
    rhs = np.abs(rng.normal(size=n))
    rhs[50:100] = 0.0
    rhs[100:150] = np.inf
    for beta, gamma in ((1.0, 1.0), (0.5, 0.0), (3.0, 2.5)):
        a, b = both(K.strong_margins, xd, dd, rhs, beta, gamma)
        assert np.array_equal(np.isinf(a), np.isinf(b))
        fin = np.isfinite(a)
        assert np.allclose(a[fin], b[fin], rtol=0, atol=1e-12)


def test_sq_violation_agree():
    rng = np.random.default_rng(2)
    P, L = 400, 33
    hx, hy = rng.normal(size=P), rng.normal(size=P)
    hy[:5] = np.inf
    hz = rng.normal(size=(P, L))
    dist2 = np.abs(rng.normal(size=P))
    lam = np.linspace(0, 1, L)
    a, b = both(K.sq_max_violation, hx, hy, hz, dist2, lam, 0.7)
    assert a[0] == pytest.approx(b[0], abs=1e-12) and a[1:] == b[1:]


def test_min_norm_agree():
    rng = np.random.default_rng(3)
    for _ in range(50):
        P = rng.normal(size=(int(rng.integers(1, 8)), int(rng.integers(1, 4))))
        a, b = both(K.min_norm_point, P)
        assert np.allclose(a, b, atol=1e-9)


def test_interval_sums_agree():
    rng = np.random.default_rng(4)
    lo = rng.normal(size=(1000, 3))
    hi = lo + np.abs(rng.normal(size=(1000, 3)))
    lo[:10, 0] = np.nan
    (d1, r1), (d2, r2) = both(K.interval_sum_residuals, lo, hi)
    assert np.array_equal(np.isinf(d1), np.isinf(d2))
    fin = np.isfinite(d1)
    assert np.allclose(d1[fin], d2[fin], atol=1e-12) and np.allclose(r1[fin], r2[fin], atol=1e-12)


def test_env_flag_selects_numpy():
    import os
    import subprocess
    import sys

    env = dict(os.environ, STRONGKKT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from strongkkt._kernels import backend; print(backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
