import math

import mpmath as mp
import numpy as np
import pytest

from euler_elastica import elliptic as el
from euler_elastica.cuttime import f1, k0, p1, p11, t_bound, u11
from euler_elastica.strata import Covector, Stratum, from_elliptic

mp.mp.dps = 30


def test_k0_root_and_bracket():
    k = k0()
    assert 0 < k < 1
    assert abs(2 * el.complete_E(k) - el.complete_K(k)) < 1e-12
    assert abs(k - 0.902) < 0.01
    assert 2 * el.complete_E(0.5) - el.complete_K(0.5) > 0
    assert 2 * el.complete_E(0.95) - el.complete_K(0.95) < 0
    m = mp.findroot(lambda m: 2 * mp.ellipe(m) - mp.ellipk(m), (0.8, 0.85), solver="anderson")
    assert k == pytest.approx(float(mp.sqrt(mp.re(m))), abs=1e-14)


def test_f1_at_zero():
    for k in (0.1, 0.5, 0.9):
        assert f1(0.0, k) == 0.0


@pytest.mark.parametrize("k", np.linspace(0.02, 0.98, 13))
def test_p11_root(k):
    K = el.complete_K(k)
    r = p11(k)
    assert K < r < 3 * K
    assert abs(f1(r, k)) < 1e-12
    # independent high-precision root in the amplitude u = am p
    m = mp.mpf(k) ** 2

    def g(u):
        s_, c_ = mp.sin(u), mp.cos(u)
        return s_ * mp.sqrt(1 - m * s_ ** 2) - c_ * (2 * mp.ellipe(u, m) - mp.ellipf(u, m))

    u = mp.findroot(g, el.am(r, k))
    want = mp.ellipf(u, m)
    assert r == pytest.approx(float(want), rel=1e-12)


def test_p11_sign_change_by_sampling():
    for k in (0.3, 0.95):
        K = el.complete_K(k)
        ps = np.linspace(1e-3, 3 * K - 1e-3, 4000)
        vals = np.array([f1(p, k) for p in ps])
        first = ps[np.nonzero(vals < 0)[0][0]]
        assert abs(first - p11(k)) < ps[1] - ps[0]
    K = el.complete_K(0.95)
    assert K < p11(0.95) < 2 * K


def test_p11_at_k0_and_monotone_amplitude():
    k = k0()
    assert abs(p11(k) - 2 * el.complete_K(k)) < 1e-8
    ks = np.linspace(k + 1e-3, 0.999, 60)
    us = [u11(x) for x in ks]
    assert np.all(np.diff(us) < 0)
    assert u11(1 - 1e-9) == pytest.approx(math.pi / 2, abs=2e-3)


def test_p1_branches():
    assert p1(0.5) == 2 * el.complete_K(0.5)
    assert abs(2 * el.complete_K(k0()) - p11(k0())) < 1e-8
    assert p11(0.95) < 2 * el.complete_K(0.95)
    assert p1(0.95) == p11(0.95)
    # continuity across k0
    k = k0()
    for d in (1e-4, 1e-6):
        assert abs(p1(k + d) - p1(k - d)) < 50 * d ** (1 / 3)


def test_t_bound_examples():
    assert t_bound(Covector(0.0, 0.0, 1.0)) == math.inf
    assert t_bound(Covector(0.0, 4 * math.pi, 0.0)) == pytest.approx(0.5, abs=1e-15)
    lam = from_elliptic(0.2, 0.5, 4.0, Stratum.N1)
    assert t_bound(lam) == pytest.approx(p1(0.5), rel=1e-12)
    lam = from_elliptic(0.2, 0.5, 4.0, Stratum.N2plus)
    assert t_bound(lam) == pytest.approx(0.5 * 2 * el.complete_K(0.5) / 2, rel=1e-12)
    for lam in (Covector(math.pi, 0, 1), Covector(0, 2, 1), Covector(0, 0, 0)):
        assert t_bound(lam) == math.inf


def test_t_bound_grows_toward_separatrix_and_scales():
    for st in (Stratum.N1, Stratum.N2plus):
        ts = [t_bound(from_elliptic(0.1, 1 - 10.0 ** -e, 1.0, st), 1e-15) for e in (3, 6, 12)]
        assert ts[0] < ts[1] < ts[2]
        lam = from_elliptic(0.1, 0.7, 1.0, st)
        lam4 = Covector(lam.beta, 2 * lam.c, 4 * lam.r)
        assert t_bound(lam4) == pytest.approx(t_bound(lam) / 2, rel=1e-12)
