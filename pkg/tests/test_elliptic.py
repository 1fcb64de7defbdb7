import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from euler_elastica import elliptic as el

mp.mp.dps = 30
KS = [0.0, 0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.99, 0.999999, 1.0 - 1e-9]


def mp_jacobi(p, k):
    m = mp.mpf(k) ** 2
    return tuple(float(mp.ellipfun(f, p, m=m)) for f in ("sn", "cn", "dn"))


@pytest.mark.parametrize("k", KS)
def test_complete_integrals_against_mpmath(k):
    m = mp.mpf(k) ** 2
    assert el.complete_K(k) == pytest.approx(float(mp.ellipk(m)), rel=1e-13)
    assert el.complete_E(k) == pytest.approx(float(mp.ellipe(m)), rel=1e-13)


def test_complete_special_values():
    assert el.complete_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert el.complete_E(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert el.complete_E(1.0) == 1.0
    k = 1.0 - 1e-12
    K = el.complete_K(k)
    # K ~ ln(4 / k') for k' -> 0
    assert K > 14.0
    assert K == pytest.approx(math.log(4.0 / el.kprime(k)), rel=1e-10)


def test_complete_k_agm_oracle():
    # independent arithmetic-geometric mean: K = pi / (2 AGM(1, k'))
    k = 0.8
    a, b = 1.0, math.sqrt(1 - k * k)
    for _ in range(30):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    assert el.complete_K(k) == pytest.approx(math.pi / (2 * a), rel=1e-14)
    val, _ = quad(lambda u: 1 / math.sqrt(1 - (k * math.sin(u)) ** 2), 0, math.pi / 2,
                  epsabs=1e-14, epsrel=1e-14)
    assert el.complete_K(k) == pytest.approx(val, rel=1e-12)


def test_complete_errors():
    with pytest.raises(el.DivergenceError):
        el.complete_K(1.0)
    for bad in (-0.1, 1.5):
        with pytest.raises(ValueError):
            el.complete_K(bad)
        with pytest.raises(ValueError):
            el.complete_E(bad)


def test_monotone_in_k():
    ks = np.linspace(0, 0.999, 200)
    K = [el.complete_K(k) for k in ks]
    E = [el.complete_E(k) for k in ks]
    assert np.all(np.diff(K) > 0)
    assert np.all(np.diff(E) < 0)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
def test_legendre_relation(k):
    kp = el.kprime(k)
    K, E = el.complete_K(k), el.complete_E(k)
    Kp, Ep = el.complete_K(kp), el.complete_E(kp)
    assert abs(E * Kp + Ep * K - K * Kp - math.pi / 2) < 1e-12


def test_kprime_without_cancellation():
    k = 1.0 - 1e-12
    assert el.kprime(k) == pytest.approx(float(mp.sqrt(1 - mp.mpf(k) ** 2)), rel=1e-12)


@pytest.mark.parametrize("k", KS[1:])
def test_jacobi_against_mpmath(k):
    K = el.complete_K(k)
    rng = np.random.default_rng(0)
    ps = np.concatenate([rng.uniform(-4 * K, 4 * K, 40), K * np.arange(-4, 5)])
    for p in ps:
        got = el.sn_cn_dn(p, k)
        want = mp_jacobi(p, k)
        assert np.allclose(got, want, rtol=0, atol=5e-14 * max(1.0, abs(p))), (p, got, want)


def test_jacobi_degenerate_moduli():
    for p in (-2.0, 0.3, 5.0):
        assert el.sn_cn_dn(p, 0.0) == pytest.approx((math.sin(p), math.cos(p), 1.0), abs=1e-15)
        t, s = math.tanh(p), 1 / math.cosh(p)
        assert el.sn_cn_dn(p, 1.0) == pytest.approx((t, s, s), abs=1e-15)
    assert el.sn_cn_dn(800.0, 1.0)[1] == 0.0


@pytest.mark.parametrize("k", [0.3, 0.8, 0.99])
def test_jacobi_at_quarter_period(k):
    sn, cn, dn = el.sn_cn_dn(el.complete_K(k), k)
    assert sn == pytest.approx(1.0, abs=1e-15)
    assert abs(cn) < 1e-15
    assert dn == pytest.approx(el.kprime(k), rel=1e-13)


def test_identities_on_grid():
    for k in KS:
        K = el.complete_K(k)
        for p in np.linspace(-4 * K, 4 * K, 200):
            sn, cn, dn = el.sn_cn_dn(p, k)
            assert abs(sn * sn + cn * cn - 1) < 1e-12
            assert abs(dn * dn + k * k * sn * sn - 1) < 1e-12


@pytest.mark.parametrize("k", [0.2, 0.7, 0.95])
def test_periods_after_many_shifts(k):
    K = el.complete_K(k)
    E = el.complete_E(k)
    p = 0.37
    sn0, cn0, dn0 = el.sn_cn_dn(p, k)
    sn1, cn1, _ = el.sn_cn_dn(p + 40 * K, k)
    _, _, dn1 = el.sn_cn_dn(p + 20 * K, k)
    assert (sn1, cn1, dn1) == pytest.approx((sn0, cn0, dn0), abs=1e-11)
    assert el.am(p + 20 * K, k) == pytest.approx(el.am(p, k) + 10 * math.pi, abs=1e-11)
    assert el.eps_int(p + 20 * K, k) == pytest.approx(el.eps_int(p, k) + 20 * E, abs=1e-11)


def test_am_values():
    assert el.am(0.7, 0.0) == pytest.approx(0.7, abs=1e-15)
    for k in (0.3, 0.9):
        assert el.am(el.complete_K(k), k) == pytest.approx(math.pi / 2, abs=1e-14)
    for p in (-3.0, 0.5, 2.0):
        assert el.am(p, 1.0) == pytest.approx(2 * math.atan(math.exp(p)) - math.pi / 2, abs=1e-14)
        assert abs(el.am(p, 1.0)) < math.pi / 2


@pytest.mark.parametrize("k", [0.2, 0.6, 0.95])
def test_derivatives_in_p(k):
    h = 1e-6
    for p in (-1.3, 0.4, 2.9):
        _, _, dn = el.sn_cn_dn(p, k)
        dam = (el.am(p + h, k) - el.am(p - h, k)) / (2 * h)
        deps = (el.eps_int(p + h, k) - el.eps_int(p - h, k)) / (2 * h)
        assert abs(dam - dn) < 1e-6
        assert abs(deps - dn * dn) < 1e-6


def test_eps_int_values():
    assert el.eps_int(0.0, 0.4) == 0.0
    for k in (0.3, 0.8):
        K = el.complete_K(k)
        assert el.eps_int(2 * K, k) == pytest.approx(2 * el.complete_E(k), rel=1e-14)
        assert el.eps_int(-0.8, k) == pytest.approx(-el.eps_int(0.8, k), abs=1e-15)
    want = float(mp.quad(lambda t: mp.ellipfun("dn", t, m=mp.mpf(0.7) ** 2) ** 2, [0, 1]))
    assert abs(el.eps_int(1.0, 0.7) - want) < 1e-12
    # E(am p) for p within a quarter period
    k = 0.6
    for p in (0.2, 1.0, 1.7):
        u = el.am(p, k)
        assert el.eps_int(p, k) == pytest.approx(el.incomplete_E(u, k), abs=1e-14)


@pytest.mark.parametrize("k", [0.0, 0.4, 0.9, 0.999])
def test_incomplete_against_mpmath(k):
    m = mp.mpf(k) ** 2
    for u in (-4.0, -1.2, 0.3, 1.5, 2.2, 7.0):
        assert el.incomplete_F(u, k) == pytest.approx(float(mp.ellipf(u, m)), rel=1e-13, abs=1e-15)
        assert el.incomplete_E(u, k) == pytest.approx(float(mp.ellipe(u, m)), rel=1e-13, abs=1e-15)


def test_incomplete_special_values():
    assert el.incomplete_F(0.9, 0.0) == pytest.approx(0.9, abs=1e-15)
    assert el.incomplete_E(0.9, 0.0) == pytest.approx(0.9, abs=1e-15)
    for k in (0.3, 0.95):
        assert el.incomplete_F(math.pi / 2, k) == pytest.approx(el.complete_K(k), rel=1e-14)
        assert el.incomplete_E(math.pi / 2, k) == pytest.approx(el.complete_E(k), rel=1e-14)
        u = 0.4
        assert el.incomplete_F(u + math.pi, k) == pytest.approx(
            el.incomplete_F(u, k) + 2 * el.complete_K(k), rel=1e-14)
        assert el.incomplete_E(u + math.pi, k) == pytest.approx(
            el.incomplete_E(u, k) + 2 * el.complete_E(k), rel=1e-14)
        assert el.incomplete_F(-u, k) == -el.incomplete_F(u, k)
    for u in (-1.2, 0.5, 1.4):
        assert el.incomplete_F(u, 1.0) == pytest.approx(math.atanh(math.sin(u)), rel=1e-14)
        assert el.incomplete_E(u, 1.0) == pytest.approx(math.sin(u), rel=1e-14)
    with pytest.raises(el.DivergenceError):
        el.incomplete_F(math.pi / 2, 1.0)


def test_am_inverts_F():
    for k in (0.2, 0.8, 0.99):
        for u in (-2.5, 0.1, 1.2, 4.0):
            assert el.am(el.incomplete_F(u, k), k) == pytest.approx(u, abs=1e-13)


@pytest.mark.parametrize("k", [0.2, 0.7, 0.97])
def test_k_derivatives_against_differences(k):
    h = 1e-6
    dK = (el.complete_K(k + h) - el.complete_K(k - h)) / (2 * h)
    assert el.dK_dk(k) == pytest.approx(dK, rel=1e-6)
    for p in (0.3, 1.9, -2.6):
        got = el.d_dk(p, k)
        up = el.jacobi_all(p, k + h)
        dn_ = el.jacobi_all(p, k - h)
        fd = [(up[i] - dn_[i]) / (2 * h) for i in (0, 1, 2, 3)]
        assert np.allclose(got, fd, rtol=1e-5, atol=1e-7)
