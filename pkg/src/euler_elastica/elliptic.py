"""Jacobi elliptic functions and Legendre elliptic integrals.

Everything is built on the arithmetic-geometric mean: the complete
integrals come straight from the AGM, the Jacobi functions from the
descending Landen recurrence and the incomplete integrals from the
ascending angle-doubling recurrence. The modulus ``k = 1`` is handled by
the hyperbolic closed forms.
"""

from __future__ import annotations

import math
from functools import lru_cache

__all__ = [
    "DivergenceError",
    "kprime",
    "complete_K",
    "complete_E",
    "complete_KE",
    "incomplete_F",
    "incomplete_E",
    "am",
    "sn_cn_dn",
    "eps_int",
    "jacobi_all",
    "d_dk",
    "dK_dk",
]

_MAX_AGM = 40


class DivergenceError(ArithmeticError):
    """Raised when a quantity is infinite at k = 1."""


def kprime(k: float) -> float:
    """Complementary modulus sqrt(1 - k^2) without cancellation near k = 1."""
    return math.sqrt((1.0 - k) * (1.0 + k))


def _check_k(k: float) -> None:
    if not (0.0 <= k <= 1.0) or math.isnan(k):
        raise ValueError(f"modulus must lie in [0, 1], got {k!r}")


@lru_cache(maxsize=4096)
def _agm(k: float):
    """AGM sequences (a_n, c_n) started from (1, k', k)."""
    a, b, c = 1.0, kprime(k), k
    As, Cs = [a], [c]
    for _ in range(_MAX_AGM):
        if abs(c) <= 2.0e-16 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        As.append(a)
        Cs.append(c)
    return tuple(As), tuple(Cs)


@lru_cache(maxsize=4096)
def complete_KE(k: float) -> tuple[float, float]:
    """Return (K(k), E(k)) for 0 <= k < 1."""
    _check_k(k)
    if k == 1.0:
        raise DivergenceError("K(1) is infinite")
    As, Cs = _agm(k)
    K = math.pi / (2.0 * As[-1])
    s = 0.0
    for n, c in enumerate(Cs):
        s += 2.0 ** (n - 1) * c * c
    return K, K * (1.0 - s)


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind."""
    return complete_KE(k)[0]


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind, E(1) = 1."""
    _check_k(k)
    if k == 1.0:
        return 1.0
    return complete_KE(k)[1]


def _landen_angles(u: float, k: float):
    """Descending Landen angles phi_0..phi_N for argument u (k < 1)."""
    As, Cs = _agm(k)
    n = len(As) - 1
    phis = [0.0] * (n + 1)
    phi = (2.0 ** n) * As[n] * u
    phis[n] = phi
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(Cs[j] / As[j] * math.sin(phi)))
        phis[j - 1] = phi
    return phis, Cs


def _reduce(u: float, K: float) -> tuple[float, int]:
    m = round(u / (2.0 * K))
    return u - 2.0 * K * m, m


def _sech(p: float) -> float:
    ap = abs(p)
    if ap > 700.0:
        return 0.0
    e = math.exp(-ap)
    return 2.0 * e / (1.0 + e * e)


def jacobi_all(p: float, k: float) -> tuple[float, float, float, float, float]:
    """Return (sn, cn, dn, am, eps) at (p, k) from a single Landen sweep."""
    _check_k(k)
    if k == 1.0:
        t = math.tanh(p)
        s = _sech(p)
        return t, s, s, 2.0 * math.atan(math.tanh(0.5 * p)), t
    if k == 0.0:
        return math.sin(p), math.cos(p), 1.0, p, p
    K, E = complete_KE(k)
    ur, m = _reduce(p, K)
    phis, Cs = _landen_angles(ur, k)
    phi0 = phis[0]
    sn, cn = math.sin(phi0), math.cos(phi0)
    if len(phis) > 1 and abs(cn) > 0.25:
        dn = cn / math.cos(phis[1] - phi0)
    else:
        # 0/0 in the Landen quotient near cn = 0
        dn = math.hypot(kprime(k), k * cn)
    z = 0.0
    for j in range(1, len(phis)):
        z += Cs[j] * math.sin(phis[j])
    eps = (E / K) * ur + z + 2.0 * E * m
    if m % 2:
        sn, cn = -sn, -cn
    return sn, cn, dn, phi0 + math.pi * m, eps


def sn_cn_dn(p: float, k: float) -> tuple[float, float, float]:
    """Jacobi sn, cn, dn evaluated jointly."""
    sn, cn, dn, _, _ = jacobi_all(p, k)
    return sn, cn, dn


def am(p: float, k: float) -> float:
    """Jacobi amplitude; the gudermannian when k = 1."""
    return jacobi_all(p, k)[3]


def eps_int(p: float, k: float) -> float:
    """Jacobi epsilon function, the integral of dn^2 from 0 to p."""
    return jacobi_all(p, k)[4]


def _ascending(phi: float, k: float) -> tuple[float, float]:
    """F and E at amplitude |phi| <= pi/2 via angle doubling (k < 1)."""
    As, Cs = _agm(k)
    a, b = 1.0, kprime(k)
    ph = phi
    z = 0.0
    n = len(As) - 1
    for j in range(n):
        psi = math.atan2(b * math.sin(ph), a * math.cos(ph))
        psi += 2.0 * math.pi * round((ph - psi) / (2.0 * math.pi))
        ph = ph + psi
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        z += Cs[j + 1] * math.sin(ph)
    F = ph / (2.0 ** n * As[n])
    K, E = complete_KE(k)
    return F, (E / K) * F + z


def incomplete_F(u: float, k: float) -> float:
    """Incomplete integral of the first kind F(u, k), u the amplitude."""
    _check_k(k)
    if k == 1.0:
        if abs(u) >= 0.5 * math.pi:
            raise DivergenceError("F(u, 1) diverges for |u| >= pi/2")
        return math.atanh(math.sin(u))
    if k == 0.0:
        return u
    m = round(u / math.pi)
    ur = u - math.pi * m
    F, _ = _ascending(ur, k)
    return F + 2.0 * m * complete_K(k)


def incomplete_E(u: float, k: float) -> float:
    """Incomplete integral of the second kind E(u, k)."""
    _check_k(k)
    m = round(u / math.pi)
    ur = u - math.pi * m
    if k == 1.0:
        return math.sin(ur) + 2.0 * m
    if k == 0.0:
        return u
    _, Ei = _ascending(ur, k)
    return Ei + 2.0 * m * complete_E(k)


def dK_dk(k: float) -> float:
    """Derivative of K with respect to the modulus."""
    K, E = complete_KE(k)
    kp2 = (1.0 - k) * (1.0 + k)
    return (E - kp2 * K) / (k * kp2)


def d_dk(p: float, k: float) -> tuple[float, float, float, float]:
    """Partial derivatives of (sn, cn, dn, am) with respect to k at fixed p.

    Valid for 0 < k < 1.
    """
    sn, cn, dn, _, eps = jacobi_all(p, k)
    kp2 = (1.0 - k) * (1.0 + k)
    dam = (k * k * sn * cn - dn * (eps - kp2 * p)) / (k * kp2)
    dsn = cn * dam
    dcn = -sn * dam
    ddn = -k * sn * (sn + k * cn * dam) / dn
    return dsn, dcn, ddn, dam
