"""Upper bound on the cut time of extremals and its root functions."""

from __future__ import annotations

import math
import threading
from functools import lru_cache

from scipy.optimize import brentq

from . import elliptic as el
from .strata import Covector, Stratum, classify_stratum, to_elliptic, DEFAULT_TOL

_lock = threading.Lock()
_k0_value: float | None = None


def k0() -> float:
    """Unique root of 2E(k) - K(k) on (0, 1), computed once."""
    global _k0_value
    if _k0_value is None:
        def g(k):
            K, E = el.complete_KE(k)
            return 2.0 * E - K
        val = brentq(g, 0.5, 0.99, xtol=1e-16, rtol=8.9e-16, maxiter=200)
        with _lock:
            _k0_value = val
    return _k0_value


def f1(p: float, k: float) -> float:
    """sn p dn p - (2 eps(p) - p) cn p."""
    sn, cn, dn, _, eps = el.jacobi_all(p, k)
    return sn * dn - (2.0 * eps - p) * cn


def f_u(u: float, k: float) -> float:
    """f1 written in the amplitude u = am(p)."""
    s, c = math.sin(u), math.cos(u)
    return (s * math.sqrt((1.0 - k * s) * (1.0 + k * s))
            - c * (2.0 * el.incomplete_E(u, k) - el.incomplete_F(u, k)))


def _near_k0(k: float) -> bool:
    return abs(k - k0()) <= 4.0 * math.ulp(k0())


@lru_cache(maxsize=8192)
def u11(k: float) -> float:
    """Amplitude of the first root of f1 beyond K, in (pi/2, 3 pi/2)."""
    if not 0.0 < k < 1.0:
        raise ValueError(f"k must lie in (0, 1), got {k!r}")
    if _near_k0(k):
        # the root is a triple root here and equals 2K exactly
        return math.pi
    lo, hi = 0.5 * math.pi, 1.5 * math.pi
    return brentq(f_u, lo, hi, args=(k,), xtol=1e-15, rtol=8.9e-16, maxiter=300)


def _p11_bracketed(k: float) -> float:
    p = el.incomplete_F(u11(k), k)
    # polish in p: df1/dp = (2 eps - p) sn dn
    fp = f1(p, k)
    for _ in range(3):
        sn, cn, dn, _, eps = el.jacobi_all(p, k)
        d = (2.0 * eps - p) * sn * dn
        if d == 0.0:
            break
        q = p - fp / d
        fq = f1(q, k)
        if abs(fq) >= abs(fp):
            break
        p, fp = q, fq
    return p


_TABLE_N = 512
_ZLO, _ZHI = 0.02, 19.0


@lru_cache(maxsize=1)
def _p11_table():
    """p11 / K on a grid in atanh k, used only as a Newton starting guess."""
    h = (_ZHI - _ZLO) / (_TABLE_N - 1)
    zs = [_ZLO + i * h for i in range(_TABLE_N)]
    return h, [_p11_bracketed(math.tanh(z)) / el.complete_K(math.tanh(z)) for z in zs]


def _p11_guess(k: float) -> float:
    h, vs = _p11_table()
    x = (math.atanh(k) - _ZLO) / h
    i = min(max(int(math.floor(x)), 0), _TABLE_N - 2)
    w = x - i
    return ((1.0 - w) * vs[i] + w * vs[i + 1]) * el.complete_K(k)


@lru_cache(maxsize=8192)
def p11(k: float) -> float:
    """First positive root of f1(., k) in (K, 3K)."""
    if _near_k0(k):
        return 2.0 * el.complete_K(k)
    if math.tanh(_ZLO) < k < 1.0 and abs(k - k0()) > 1e-3:
        # simple root here: Newton from the tabulated guess, checked by a sign change
        K = el.complete_K(k)
        p = _p11_guess(k)
        prev = math.inf
        for _ in range(8):
            sn, cn, dn, _, eps = el.jacobi_all(p, k)
            fp = sn * dn - (2.0 * eps - p) * cn
            d = (2.0 * eps - p) * sn * dn
            if d == 0.0 or not K < p < 3.0 * K:
                break
            step = fp / d
            if abs(step) >= 0.5 * prev and abs(step) < 1e-8 * p:
                step = 0.0      # rounding floor reached
            p -= step
            prev = abs(step)
            if abs(step) <= 1e-13 * p:
                h = 1e-9 * p
                if f1(p - h, k) > 0.0 > f1(p + h, k):
                    return p
                break
    return _p11_bracketed(k)


def p1(k: float) -> float:
    """min(2K, p11): 2K for k <= k0 and p11 beyond."""
    if k <= k0():
        return 2.0 * el.complete_K(k)
    return p11(k)


def t_bound(lam: Covector, tol: float = DEFAULT_TOL) -> float:
    """Upper bound on the cut time; math.inf on N3, N4, N5 and N7."""
    st = classify_stratum(lam, tol)
    if st is Stratum.N1:
        _, k, r, _ = to_elliptic(lam, tol)
        return 2.0 * p1(k) / math.sqrt(r)
    if st.family == "N2":
        _, k, r, _ = to_elliptic(lam, tol)
        return 2.0 * k * el.complete_K(k) / math.sqrt(r)
    if st.family == "N6":
        return 2.0 * math.pi / abs(lam.c)
    return math.inf
