"""Covectors, pendulum strata, elliptic/canonical coordinates and domains.

The adjoint state of the extremal flow is a point (beta, c, r) of the
pendulum phase space. Its energy relative to +-r sorts it into one of the
strata N1..N7; on the oscillating, rotating and separatrix strata the
flow is rectified by elliptic coordinates (phi, k, r) and the solver works
in the canonical chart (tau, p, k).

Canonical chart conventions used throughout the package:

* ``p`` is half the elapsed elliptic phase over the unit time interval,
  so the elliptic argument runs over ``[-tau - p, -tau + p]``;
* N1: ``r = 4 p^2``, ``sin(beta/2) = k sn(psi)``, ``c = 4 k p cn(psi)``;
* N2+-: ``r = 4 p^2 k^2``, ``beta/2 = +-am(psi)``, ``c = +-4 p dn(psi)``;
* N3+-: the k = 1 limit of N2+-.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import elliptic as el

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-9


def wrap_pi(a: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    w = math.fmod(a, TWO_PI)
    if w > math.pi:
        w -= TWO_PI
    elif w <= -math.pi:
        w += TWO_PI
    return w


def wrap_2pi(a: float) -> float:
    """Reduce an angle to [0, 2 pi)."""
    w = math.fmod(a, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    if w >= TWO_PI:
        w = 0.0
    return w


def angle_dist(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    return abs(wrap_pi(a - b))


class Stratum(str, Enum):
    N1 = "N1"
    N2plus = "N2plus"
    N2minus = "N2minus"
    N3plus = "N3plus"
    N3minus = "N3minus"
    N4 = "N4"
    N5 = "N5"
    N6plus = "N6plus"
    N6minus = "N6minus"
    N7 = "N7"

    @property
    def sign(self) -> int:
        return -1 if self.value.endswith("minus") else 1

    @property
    def family(self) -> str:
        return self.value[:2]

    def flipped(self) -> "Stratum":
        if self.value.endswith("plus"):
            return Stratum(self.value.replace("plus", "minus"))
        if self.value.endswith("minus"):
            return Stratum(self.value.replace("minus", "plus"))
        return self


CANONICAL_STRATA = (Stratum.N1, Stratum.N2plus, Stratum.N2minus,
                    Stratum.N3plus, Stratum.N3minus)


class DomainLabel(str, Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    NPrime = "NPrime"


class TargetClass(str, Enum):
    MPlus = "MPlus"
    MMinus = "MMinus"
    MPrimeP = "MPrimeP"
    MPrimeTheta = "MPrimeTheta"
    MPrimeV = "MPrimeV"


class UnsupportedStratumError(ValueError):
    pass


class UnattainableError(ValueError):
    pass


@dataclass(frozen=True)
class Covector:
    """Initial adjoint state; beta is stored in (-pi, pi]."""
    beta: float
    c: float
    r: float

    def __post_init__(self):
        if not self.r >= 0.0:
            raise ValueError(f"r must be non-negative, got {self.r!r}")
        object.__setattr__(self, "beta", wrap_pi(float(self.beta)))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "r", float(self.r))

    @property
    def h(self) -> tuple[float, float, float]:
        """The (h1, h2, h3) chart of the same point."""
        return (-self.r * math.cos(self.beta), self.c,
                -self.r * math.sin(self.beta))


@dataclass(frozen=True)
class Config:
    """Terminal state (x, y, theta) with theta stored in [0, 2 pi)."""
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_2pi(float(self.theta)))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class CanonicalCoords:
    tau: float
    p: float
    k: float
    stratum: Stratum

    def __post_init__(self):
        st = Stratum(self.stratum)
        object.__setattr__(self, "stratum", st)
        if st not in CANONICAL_STRATA:
            raise UnsupportedStratumError(st.value)
        if not self.p > 0.0:
            raise ValueError(f"p must be positive, got {self.p!r}")
        if st.family == "N3":
            if self.k != 1.0:
                raise ValueError("separatrix coordinates require k = 1")
        elif not 0.0 < self.k < 1.0:
            raise ValueError(f"k must lie in (0, 1), got {self.k!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.tau, self.p, self.k)


def energy(lam: Covector) -> float:
    """Pendulum energy c^2/2 - r cos(beta)."""
    return 0.5 * lam.c * lam.c - lam.r * math.cos(lam.beta)


def _kappa2(lam: Covector) -> float:
    # (E + r) / (2 r) without cancellation
    s = math.sin(0.5 * lam.beta)
    return lam.c * lam.c / (4.0 * lam.r) + s * s


def classify_stratum(lam: Covector, tol: float = DEFAULT_TOL) -> Stratum:
    """Assign the stratum; bands of width tol*max(1, r) count as equality."""
    c, r = lam.c, lam.r
    if r <= tol:
        if abs(c) <= tol:
            return Stratum.N7
        return Stratum.N6plus if c > 0 else Stratum.N6minus
    band = tol * max(1.0, r)
    ch = math.cos(0.5 * lam.beta)
    e_plus = 0.5 * c * c + 2.0 * r * (1.0 - ch * ch)
    e_minus = 0.5 * c * c - 2.0 * r * ch * ch
    if e_plus <= band:
        return Stratum.N4
    if abs(e_minus) <= band:
        if c * c / (4.0 * r) <= tol:
            return Stratum.N5
        return Stratum.N3plus if c > 0 else Stratum.N3minus
    if e_minus > 0:
        return Stratum.N2plus if c > 0 else Stratum.N2minus
    return Stratum.N1


def to_elliptic(lam: Covector, tol: float = DEFAULT_TOL):
    """Return (phi, k, r, stratum) of a covector in N1, N2 or N3."""
    st = classify_stratum(lam, tol)
    r = lam.r
    sr = math.sqrt(r) if r > 0 else 0.0
    half = 0.5 * lam.beta
    if st is Stratum.N1:
        k = min(math.sqrt(_kappa2(lam)), 1.0 - 1e-16)
        u = math.atan2(math.sin(half), lam.c / (2.0 * sr))
        psi = el.incomplete_F(u, k)
        period = 4.0 * el.complete_K(k)
        return math.fmod(psi, period) / sr, k, r, st
    if st.family == "N2":
        k = max(min(1.0 / math.sqrt(_kappa2(lam)), 1.0 - 1e-16), 1e-300)
        psi = el.incomplete_F(st.sign * half, k)
        return psi * k / sr, k, r, st
    if st.family == "N3":
        psi = math.atanh(math.sin(st.sign * half))
        return psi / sr, 1.0, r, st
    raise UnsupportedStratumError(st.value)


def from_elliptic(phi: float, k: float, r: float, stratum) -> Covector:
    """Covector with elliptic coordinates (phi, k, r) on the given stratum."""
    st = Stratum(stratum)
    if not r > 0:
        raise ValueError("r must be positive")
    sr = math.sqrt(r)
    if st is Stratum.N1:
        if not 0 < k < 1:
            raise ValueError("k must lie in (0, 1) on N1")
        sn, cn, dn = el.sn_cn_dn(sr * phi, k)
        return Covector(2.0 * math.atan2(k * sn, dn), 2.0 * k * sr * cn, r)
    if st.family == "N2":
        if not 0 < k < 1:
            raise ValueError("k must lie in (0, 1) on N2")
        sn, cn, dn, a, _ = el.jacobi_all(sr * phi / k, k)
        s = st.sign
        return Covector(s * 2.0 * a, s * 2.0 * sr / k * dn, r)
    if st.family == "N3":
        if k != 1.0:
            raise ValueError("k must equal 1 on N3")
        _, cn, _, a, _ = el.jacobi_all(sr * phi, 1.0)
        s = st.sign
        return Covector(s * 2.0 * a, s * 2.0 * sr * cn, r)
    raise UnsupportedStratumError(st.value)


def _reduce_tau(tau: float, k: float, st: Stratum) -> float:
    if st is Stratum.N1:
        period = 4.0 * el.complete_K(k)
        t = math.fmod(tau, period)
        return t + period if t < 0 else t
    if st.family == "N2":
        K = el.complete_K(k)
        t = math.fmod(tau + K, 2.0 * K)
        if t < 0:
            t += 2.0 * K
        return t - K
    return tau


def to_canonical(phi: float, k: float, r: float, stratum) -> CanonicalCoords:
    """Canonical (tau, p, k) from elliptic coordinates.

    tau = -sqrt(r) (phi + 1/2) on N1 and N3, -(sqrt(r)/k)(phi + 1/2) on N2,
    reduced modulo 4K (N1) or into [-K, K) (N2).
    """
    st = Stratum(stratum)
    sr = math.sqrt(r)
    if st is Stratum.N1 or st.family == "N3":
        p, tau = 0.5 * sr, -sr * (phi + 0.5)
    elif st.family == "N2":
        p, tau = 0.5 * sr / k, -(sr / k) * (phi + 0.5)
    else:
        raise UnsupportedStratumError(st.value)
    return CanonicalCoords(_reduce_tau(tau, k, st), p, k, st)


def from_canonical(cc: CanonicalCoords) -> tuple[float, float, float]:
    """Elliptic (phi, k, r) of canonical coordinates."""
    if cc.stratum.family == "N2":
        r = 4.0 * cc.p * cc.p * cc.k * cc.k
    else:
        r = 4.0 * cc.p * cc.p
    return -cc.tau / (2.0 * cc.p) - 0.5, cc.k, r


def normalize_coords(cc: CanonicalCoords) -> CanonicalCoords:
    """Same point with tau reduced to its standard range."""
    return CanonicalCoords(_reduce_tau(cc.tau, cc.k, cc.stratum), cc.p, cc.k,
                           cc.stratum)


def initial_state(cc: CanonicalCoords) -> tuple[float, float, float]:
    """Unwrapped (beta0, c0, r) at the start of the extremal."""
    tau, p, k = cc.tau, cc.p, cc.k
    st = cc.stratum
    psi = -tau - p
    if st is Stratum.N1:
        sn, cn, dn = el.sn_cn_dn(psi, k)
        return 2.0 * math.atan2(k * sn, dn), 4.0 * k * p * cn, 4.0 * p * p
    s = st.sign
    _, _, dn, a, _ = el.jacobi_all(psi, k)
    r = 4.0 * p * p * (k * k if st.family == "N2" else 1.0)
    return s * 2.0 * a, s * 4.0 * p * dn, r


def initial_state_derivative(cc: CanonicalCoords):
    """Rows d(beta0, c0, r) / d(tau, p, k); the k column is zero on N3."""
    tau, p, k = cc.tau, cc.p, cc.k
    st = cc.stratum
    psi = -tau - p
    sn, cn, dn, _, _ = el.jacobi_all(psi, k)
    if st is Stratum.N1:
        dsk, dck, _, _ = el.d_dk(psi, k)
        # d(k sn)/dpsi = k cn dn, d(k sn)/dk = sn + k dsk; beta0 = 2 asin(k sn)
        db_dpsi = 2.0 * k * cn
        db_dk = 2.0 * (sn + k * dsk) / dn
        dc_dpsi = -4.0 * k * p * sn * dn
        return [
            [-db_dpsi, -db_dpsi, db_dk],
            [-dc_dpsi, 4.0 * k * cn - dc_dpsi, 4.0 * p * cn + 4.0 * k * p * dck],
            [0.0, 8.0 * p, 0.0],
        ]
    s = st.sign
    dc_dpsi = -4.0 * p * k * k * sn * cn
    if st.family == "N2":
        _, _, ddk, dak = el.d_dk(psi, k)
        dbk, dck = 2.0 * dak, 4.0 * p * ddk
        drp, drk = 8.0 * p * k * k, 8.0 * p * p * k
    else:
        dbk = dck = drk = 0.0
        drp = 8.0 * p
    return [
        [-s * 2.0 * dn, -s * 2.0 * dn, s * dbk],
        [-s * dc_dpsi, s * (4.0 * dn - dc_dpsi), s * dck],
        [0.0, drp, drk],
    ]


def covector_from_canonical(cc: CanonicalCoords) -> Covector:
    return Covector(*initial_state(cc))


def canonical_from_covector(lam: Covector, tol: float = DEFAULT_TOL) -> CanonicalCoords:
    phi, k, r, st = to_elliptic(lam, tol)
    return to_canonical(phi, k, r, st)


def classify_domain(cc: CanonicalCoords) -> DomainLabel:
    """Domain L1..L4 of the canonical point, or NPrime on the boundary set."""
    from .cuttime import p1

    st = cc.stratum
    tau, p, k = cc.tau, cc.p, cc.k
    if st is Stratum.N1:
        K = el.complete_K(k)
        if not 0.0 < p < p1(k):
            return DomainLabel.NPrime
        t = _reduce_tau(tau, k, st)
        for i, lab in enumerate((DomainLabel.L1, DomainLabel.L2,
                                 DomainLabel.L3, DomainLabel.L4)):
            if i * K < t < (i + 1) * K:
                return lab
        return DomainLabel.NPrime
    if st.family == "N2":
        K = el.complete_K(k)
        if not 0.0 < p < K:
            return DomainLabel.NPrime
        t = _reduce_tau(tau, k, st)
        if t == 0.0 or t == -K:
            return DomainLabel.NPrime
        pos = t > 0
    else:
        if tau == 0.0:
            return DomainLabel.NPrime
        pos = tau > 0
    if st.sign > 0:
        return DomainLabel.L1 if pos else DomainLabel.L4
    return DomainLabel.L3 if pos else DomainLabel.L2


def P(q: Config) -> float:
    """x sin(theta/2) - y cos(theta/2) with theta in [0, 2 pi)."""
    h = 0.5 * q.theta
    return q.x * math.sin(h) - q.y * math.cos(h)


def is_vertex(q: Config, tol: float = 0.0) -> bool:
    """True at the straight-line endpoint (1, 0, 0)."""
    return (abs(q.x - 1.0) <= tol and abs(q.y) <= tol
            and angle_dist(q.theta, 0.0) <= tol)


def attainable(q: Config, tol: float = 0.0) -> bool:
    """Time-one attainability: open unit disk or the point (1, 0, 0).

    A positive ``tol`` snaps points within tol of (1, 0, 0) onto it.
    """
    return q.x * q.x + q.y * q.y < 1.0 or is_vertex(q, tol)


def classify_target(q: Config, tol: float = 1e-12) -> TargetClass:
    """Sort an attainable endpoint into M+, M- or a boundary subclass."""
    if is_vertex(q, tol):
        return TargetClass.MPrimeV
    if not attainable(q):
        raise UnattainableError(f"target {q.as_tuple()} is not attainable")
    if abs(math.sin(0.5 * q.theta)) <= tol:
        return TargetClass.MPrimeTheta
    pq = P(q)
    if abs(pq) <= tol:
        return TargetClass.MPrimeP
    return TargetClass.MPlus if pq > 0 else TargetClass.MMinus
