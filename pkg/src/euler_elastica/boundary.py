"""Preimages of boundary targets (P(q) = 0 or sin(theta/2) = 0).

Such targets are reached only from the boundary set N' of the domains:
two-parameter faces of the canonical boxes, arcs of circles, and on the
axis y = 0, theta = 0 one-parameter families of extremals. Each piece is
searched separately and the resulting candidates are pooled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq, least_squares

from . import elliptic as el
from ._integrator import endpoints_batch
from .cuttime import k0, p1, p11
from .expmap import endpoint_and_jacobian, exp_state
from .solver import (ZMAX, ZMIN, Candidate, SolveOptions, config_distance,
                     make_candidate)
from .strata import (CanonicalCoords, Config, Covector, DomainLabel, Stratum,
                     TargetClass, P, initial_state, wrap_pi)

_FACE_RES = 24
_FACE_SEEDS = 10
_DEDUPE = 1e-6


@dataclass(frozen=True)
class Face:
    name: str
    stratum: Stratum
    kind: str
    bounds: tuple
    coords: Callable

    def cc(self, v) -> CanonicalCoords:
        tau, p, k = self.coords(v[0], v[1])
        return CanonicalCoords(tau, p, k, self.stratum)


def _k(z):
    return math.tanh(z)


def _zk0():
    return math.atanh(k0())


def _faces():
    N1, N2p, N2m = Stratum.N1, Stratum.N2plus, Stratum.N2minus
    wz = ((1e-9, ZMIN), (1.0, ZMAX))
    out = []

    def n1_tau(mult):
        def f(w, z):
            k = _k(z)
            return mult * el.complete_K(k), w * p1(k), k
        return f

    def n2_tau(mult):
        def f(w, z):
            k = _k(z)
            K = el.complete_K(k)
            return mult * K, w * K, k
        return f

    def n1_p11(s, z):
        k = _k(z)
        return 4.0 * s * el.complete_K(k), p11(k), k

    def n1_p2k(s, z):
        k = _k(z)
        K = el.complete_K(k)
        return 4.0 * s * K, 2.0 * K, k

    def n2_pk(s, z):
        k = _k(z)
        K = el.complete_K(k)
        return (2.0 * s - 1.0) * K, K, k

    out.append(Face("N1 tau=0", N1, "P", wz, n1_tau(0.0)))
    out.append(Face("N1 tau=2K", N1, "P", wz, n1_tau(2.0)))
    out.append(Face("N1 p=p11", N1, "P", ((0.0, _zk0()), (1.0, ZMAX)), n1_p11))
    for st in (N2p, N2m):
        out.append(Face(f"{st.value} tau=0", st, "P", wz, n2_tau(0.0)))
        out.append(Face(f"{st.value} tau=K", st, "P", wz, n2_tau(1.0)))
    out.append(Face("N1 tau=K", N1, "theta", wz, n1_tau(1.0)))
    out.append(Face("N1 tau=3K", N1, "theta", wz, n1_tau(3.0)))
    out.append(Face("N1 p=2K", N1, "theta", ((0.0, ZMIN), (1.0, _zk0())), n1_p2k))
    for st in (N2p, N2m):
        out.append(Face(f"{st.value} p=K", st, "theta", ((0.0, ZMIN), (1.0, ZMAX)), n2_pk))
    return tuple(out)


FACES = None


def faces():
    global FACES
    if FACES is None:
        FACES = _faces()
    return FACES


@lru_cache(maxsize=32)
def _face_table(name: str):
    face = next(f for f in faces() if f.name == name)
    (a0, z0), (a1, z1) = face.bounds
    n = _FACE_RES
    fr = (np.arange(n) + 0.5) / n
    zhi = min(z1, 4.0)
    pts, init = [], []
    for fz in fr * fr:
        z = z0 + fz * (zhi - z0)
        for fa in fr:
            a = a0 + fa * (a1 - a0)
            cc = face.cc((a, z))
            pts.append((a, z))
            init.append(initial_state(cc))
    ends = endpoints_batch(np.array(init), 1.0, 1e-10, 1e-10)
    return np.array(pts), ends[:, :3]


def _face_jac(face: Face, v):
    """d(tau, p, k)/d(v) by central differences of the (cheap) face map."""
    D = np.empty((3, 2))
    for j in range(2):
        h = 1e-7 * max(1.0, abs(v[j]))
        lo, hi = face.bounds[0][j], face.bounds[1][j]
        vp = list(v)
        vm = list(v)
        vp[j] = min(v[j] + h, hi)
        vm[j] = max(v[j] - h, lo)
        D[:, j] = (np.array(face.coords(*vp)) - np.array(face.coords(*vm))) / (vp[j] - vm[j])
    return D


def solve_face(face: Face, q1: Config, tol: float, n_seeds: int = _FACE_SEEDS):
    """All distinct preimages of q1 found on one face."""
    pts, ends = _face_table(face.name)
    d = np.sqrt((ends[:, 0] - q1.x) ** 2 + (ends[:, 1] - q1.y) ** 2
                + (np.mod(ends[:, 2] - q1.theta + math.pi, 2 * math.pi) - math.pi) ** 2)
    d = np.where(np.isfinite(d), d, np.inf)
    order = np.argsort(d, kind="stable")[:n_seeds]
    lb = np.array(face.bounds[0])
    ub = np.array(face.bounds[1])

    def fun(v):
        s = exp_state(Covector(*initial_state(face.cc(v))))
        return np.array([s[2] - q1.x, s[3] - q1.y, wrap_pi(s[4] - q1.theta)])

    def jac(v):
        cc = face.cc(v)
        _, J = endpoint_and_jacobian(cc)
        return J @ _face_jac(face, v)

    found = []
    for i in order:
        x0 = np.clip(pts[i], lb, ub)
        try:
            res = least_squares(fun, x0, jac=jac, bounds=(lb, ub), method="trf",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=60)
        except (ValueError, ArithmeticError):
            continue
        r = float(np.linalg.norm(res.fun))
        if r < tol:
            try:
                found.append(face.cc(res.x))
            except ValueError:
                continue
    return found


# ------------------------------------------------------------ circles

def circle_candidates(q1: Config, tol: float, samples: int):
    """Arcs of circles (r = 0) with |c| <= 2 pi ending at q1."""
    out = []
    th = q1.theta
    for c in {th, th - 2.0 * math.pi} if th != 0.0 else {2.0 * math.pi, -2.0 * math.pi}:
        if c == 0.0 or abs(c) > 2.0 * math.pi:
            continue
        lam = Covector(0.0, c, 0.0)
        s = exp_state(lam)
        res = config_distance(s[2:5], q1)
        if res < tol:
            st = Stratum.N6plus if c > 0 else Stratum.N6minus
            out.append(Candidate(lam, None, DomainLabel.NPrime, st, res, float(s[5]),
                                 None, "circle"))
    return out


# ------------------------------------------------------------ axis y = 0, theta = 0

def _axis_families():
    N1, N2p, N2m = Stratum.N1, Stratum.N2plus, Stratum.N2minus
    zk0 = _zk0()

    def fa(z, mult):
        k = _k(z)
        K = el.complete_K(k)
        return CanonicalCoords(mult * K, 2.0 * K, k, N1)

    def fb(z, mult):
        k = _k(z)
        return CanonicalCoords(mult * el.complete_K(k), p11(k), k, N1)

    def fn2(z, mult, st):
        k = _k(z)
        K = el.complete_K(k)
        return CanonicalCoords(mult * K, K, k, st)

    return {
        "inflectional, p=2K": ((ZMIN, zk0), [lambda z: fa(z, 0.0), lambda z: fa(z, 2.0)]),
        "inflectional, p=p11": ((zk0, 6.0), [lambda z: fb(z, 1.0), lambda z: fb(z, 3.0)]),
        "non-inflectional, tau=0": ((ZMIN, 6.0), [lambda z: fn2(z, 0.0, N2p),
                                                  lambda z: fn2(z, 0.0, N2m)]),
        "non-inflectional, tau=K": ((ZMIN, 6.0), [lambda z: fn2(z, 1.0, N2p),
                                                  lambda z: fn2(z, 1.0, N2m)]),
    }


INFLECTIONAL = ("inflectional, p=2K", "inflectional, p=p11")
NON_INFLECTIONAL = ("non-inflectional, tau=0", "non-inflectional, tau=K")


def _axis_x(member, z):
    return exp_state(Covector(*initial_state(member(z))))[2]


@lru_cache(maxsize=8)
def _axis_table(name: str, n: int = 96):
    (z0, z1), members = _axis_families()[name]
    zs = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n) ** 1.5
    if name == "inflectional, p=p11":
        zs[0] = z0 + 1e-9
    xs = np.array([_axis_x(members[0], z) for z in zs])
    return zs, xs


def axis_family_roots(name: str, x1: float):
    """Values of z = atanh k at which the family's endpoint is (x1, 0, 0)."""
    zs, xs = _axis_table(name)
    member = _axis_families()[name][1][0]
    g = xs - x1
    roots = []
    for i in range(len(zs) - 1):
        if g[i] == 0.0:
            roots.append(float(zs[i]))
        elif g[i] * g[i + 1] < 0.0:
            z = brentq(lambda z: _axis_x(member, z) - x1, zs[i], zs[i + 1],
                       xtol=1e-15, rtol=8.9e-16, maxiter=200)
            roots.append(z)
    if g[-1] == 0.0:
        roots.append(float(zs[-1]))
    return roots


def axis_family_energy(name: str, x1: float):
    """Lowest energy of the family at (x1, 0, 0), or None if unreachable."""
    best = None
    member = _axis_families()[name][1][0]
    for z in axis_family_roots(name, x1):
        J = exp_state(Covector(*initial_state(member(z))))[5]
        best = J if best is None else min(best, J)
    return best


def axis_candidates(q1: Config, tol: float, names=None):
    out = []
    for name, (_, members) in _axis_families().items():
        if names is not None and name not in names:
            continue
        for z in axis_family_roots(name, q1.x):
            for m in members:
                cc = m(z)
                cand = make_candidate(cc, DomainLabel.NPrime, 0, q1, note=name)
                if cand.residual < tol:
                    out.append(cand)
    return out


def x_star(lo: float = 0.4, hi: float = 0.5, gap_tol: float = 1e-9):
    """Bisection for the energy crossing of the two families on (x, 0, 0)."""
    def gap(x):
        ji = min(e for e in (axis_family_energy(n, x) for n in INFLECTIONAL) if e is not None)
        jn = min(e for e in (axis_family_energy(n, x) for n in NON_INFLECTIONAL) if e is not None)
        return ji - jn

    glo, ghi = gap(lo), gap(hi)
    if glo * ghi > 0:
        raise ValueError(f"energy gap does not change sign on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        if abs(gm) < gap_tol or hi - lo < 1e-15:
            return mid, gm
        if gm * glo > 0:
            lo, glo = mid, gm
        else:
            hi = mid
    return mid, gm


# ------------------------------------------------------------ (0, 0, pi)

def figure_eight_system():
    """Solve sn tau = 0, 1 - 2k^2 sn^2 p = 0, 2 eps(p) - p = 0 for (p, k).

    On 1 - 2k^2 sn^2 p = 0 with p in (K, 2K) the function 2 eps - p is
    stationary in p, so p is explicit in k and one scalar root remains.
    """
    def p_of(k):
        return 2.0 * el.complete_K(k) - el.incomplete_F(math.asin(1.0 / (math.sqrt(2.0) * k)), k)

    def h(k):
        p = p_of(k)
        return 2.0 * el.eps_int(p, k) - p

    ks = np.linspace(1.0 / math.sqrt(2.0) + 1e-9, 0.999, 200)
    hs = [h(k) for k in ks]
    for i in range(len(ks) - 1):
        if hs[i] * hs[i + 1] < 0:
            k = brentq(h, ks[i], ks[i + 1], xtol=1e-16, rtol=8.9e-16, maxiter=200)
            return p_of(k), k
    raise ValueError("no root of the (0, 0, pi) system")


def _is_zero_pi(q1: Config, tol: float) -> bool:
    return abs(q1.x) <= tol and abs(q1.y) <= tol and abs(q1.theta - math.pi) <= tol


# ------------------------------------------------------------ driver

def _same(a: Candidate, b: Candidate) -> bool:
    if a.stratum is not b.stratum:
        return False
    if a.coords is None or b.coords is None:
        return abs(a.covector.c - b.covector.c) < _DEDUPE and a.coords is b.coords
    if abs(a.coords.p - b.coords.p) > _DEDUPE or abs(a.coords.k - b.coords.k) > _DEDUPE:
        return False
    K = el.complete_K(a.coords.k)
    per = 4.0 * K if a.stratum is Stratum.N1 else 2.0 * K
    dt = math.fmod(abs(a.coords.tau - b.coords.tau), per)
    return min(dt, per - dt) < _DEDUPE


def dedupe(cands):
    out = []
    for c in sorted(cands, key=lambda c: c.residual):
        if not any(_same(c, o) for o in out):
            out.append(c)
    return out


def handle_boundary(q1: Config, cls: TargetClass, opts: SolveOptions | None = None):
    """Candidates for a target in M' (other than the vertex (1, 0, 0))."""
    opts = opts or SolveOptions()
    tol = opts.tol
    ctol = opts.class_tol
    cands = []
    on_p = abs(P(q1)) <= ctol
    on_theta = abs(math.sin(0.5 * q1.theta)) <= ctol
    if on_theta and abs(q1.y) <= ctol:
        cands += axis_candidates(q1, tol)
        if abs(q1.x) <= ctol:
            cands += circle_candidates(q1, tol, opts.samples)
        return dedupe(cands)
    if _is_zero_pi(q1, ctol):
        p, k = figure_eight_system()
        for tau in (0.0, 2.0 * el.complete_K(k)):
            cand = make_candidate(CanonicalCoords(tau, p, k, Stratum.N1),
                                  DomainLabel.NPrime, 0, q1, note="sn tau = 0 system")
            if cand.residual < tol:
                cands.append(cand)
    kinds = set()
    if on_p or cls is TargetClass.MPrimeP:
        kinds.add("P")
        cands += circle_candidates(q1, tol, opts.samples)
    if on_theta or cls is TargetClass.MPrimeTheta:
        kinds.add("theta")
    for face in faces():
        if face.kind in kinds:
            for cc in solve_face(face, q1, tol):
                cands.append(make_candidate(cc, DomainLabel.NPrime, 0, q1, note=face.name))
    return dedupe(cands)
