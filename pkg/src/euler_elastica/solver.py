"""Inverting the exponential map and selecting the optimal elastica.

Interior targets (M+ and M-) have exactly one preimage in each of two
diffeomorphic domains; each is found by damped Newton iteration seeded
from a cached tabulation of the map. Boundary targets are handled in
``boundary``.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import elliptic as el
from ._integrator import endpoints_batch
from .cuttime import p1
from .expmap import (RTOL, Elastica, endpoint_and_jacobian, exp_state,
                     exp_trajectory)
from .strata import (CanonicalCoords, Config, Covector, DomainLabel, Stratum,
                     TargetClass, TWO_PI, UnattainableError, P, attainable,
                     classify_target, covector_from_canonical, initial_state,
                     wrap_pi)

log = logging.getLogger(__name__)

ZMIN = 1e-6
ZMAX = 18.0
SEED_ZMAX = 3.8
BOX_MARGIN = 1e-10
LOOSE_RTOL = 1e-9
TIGHTEN_AT = 1e-5

EXPECTED_CLASS = {
    DomainLabel.L1: TargetClass.MPlus,
    DomainLabel.L2: TargetClass.MMinus,
    DomainLabel.L3: TargetClass.MPlus,
    DomainLabel.L4: TargetClass.MMinus,
}

# (stratum, first quarter-period index of the tau interval) making up each domain
_PARTS = {
    DomainLabel.L1: ((Stratum.N1, 0), (Stratum.N2plus, 0)),
    DomainLabel.L2: ((Stratum.N1, 1), (Stratum.N2minus, -1)),
    DomainLabel.L3: ((Stratum.N1, 2), (Stratum.N2minus, 0)),
    DomainLabel.L4: ((Stratum.N1, 3), (Stratum.N2plus, -1)),
}


class ConvergenceError(RuntimeError):
    """No preimage found to the requested tolerance."""


class PreconditionError(ValueError):
    """Target does not lie in the image of the requested domain."""


class ConditioningWarning(RuntimeWarning):
    pass


def default_tol() -> float:
    v = os.environ.get("ELASTICA_TOL")
    return float(v) if v else 1e-10


@dataclass
class SolveOptions:
    tol: float = field(default_factory=default_tol)
    tie_rtol: float = 1e-8
    samples: int = 200
    n_seeds: int = 8
    resolutions: tuple = (16, 32, 64)
    class_tol: float = 1e-10


@dataclass(frozen=True)
class BoundaryProblem:
    q0: Config
    q1: Config
    length: float = 1.0


@dataclass(frozen=True)
class Transform:
    """Rigid motion plus dilation taking the canonical problem to the original."""
    x0: float
    y0: float
    theta0: float
    length: float

    @property
    def s(self) -> float:
        return math.log(self.length)

    def point(self, x, y):
        c, s = math.cos(self.theta0), math.sin(self.theta0)
        L = self.length
        return (self.x0 + L * (c * x - s * y), self.y0 + L * (s * x + c * y))


@dataclass
class Candidate:
    covector: Covector
    coords: CanonicalCoords | None
    domain: DomainLabel
    stratum: Stratum
    residual: float
    energy: float
    elastica: Elastica | None = None
    note: str = ""


@dataclass
class SolveReport:
    problem: BoundaryProblem
    target_class: TargetClass
    candidates: list
    optima: list
    tie: bool
    canonical: BoundaryProblem | None = None
    transform: Transform | None = None
    merged: list = field(default_factory=list)


def normalize(bp: BoundaryProblem):
    """Map to q0 = (0, 0, 0) and unit length; returns (problem, transform)."""
    L = bp.length
    if not (L > 0 and math.isfinite(L)):
        raise ValueError(f"length must be positive and finite, got {L!r}")
    q0, q1 = bp.q0, bp.q1
    for v in (*q0.as_tuple(), *q1.as_tuple()):
        if not math.isfinite(v):
            raise ValueError("endpoints must be finite")
    c, s = math.cos(q0.theta), math.sin(q0.theta)
    dx, dy = q1.x - q0.x, q1.y - q0.y
    q = Config((c * dx + s * dy) / L, (-s * dx + c * dy) / L, q1.theta - q0.theta)
    tr = Transform(q0.x, q0.y, q0.theta, L)
    return BoundaryProblem(Config(0.0, 0.0, 0.0), q, 1.0), tr


def denormalize(bp: BoundaryProblem, tr: Transform) -> BoundaryProblem:
    x, y = tr.point(bp.q1.x, bp.q1.y)
    q0 = Config(tr.x0, tr.y0, tr.theta0)
    return BoundaryProblem(q0, Config(x, y, bp.q1.theta + tr.theta0), tr.length)


def denormalize_elastica(e: Elastica, tr: Transform) -> Elastica:
    L = tr.length
    c, s = math.cos(tr.theta0), math.sin(tr.theta0)
    t, x, y, th, cu = e.samples.T
    out = np.column_stack([
        L * t,
        tr.x0 + L * (c * x - s * y),
        tr.y0 + L * (s * x + c * y),
        th + tr.theta0,
        cu / L,
    ])
    return Elastica(out, e.energy / L, e.covector, dict(e.meta))


def residual_vector(state, q1: Config) -> np.ndarray:
    return np.array([state[0] - q1.x, state[1] - q1.y,
                     wrap_pi(state[2] - q1.theta)])


def config_distance(a, b) -> float:
    """Euclidean on (x, y) plus angular distance on theta."""
    return float(np.linalg.norm(residual_vector(a, b)))


# ---------------------------------------------------------------- boxes

def part_box(stratum: Stratum, index: int, k: float):
    """(tau_lo, tau_hi, p_hi) of one stratum's slice of a domain."""
    K = el.complete_K(k)
    p_hi = p1(k) if stratum is Stratum.N1 else K
    return index * K, (index + 1) * K, p_hi


def _domain_part(domain: DomainLabel, stratum: Stratum) -> int:
    for st, idx in _PARTS[domain]:
        if st is stratum:
            return idx
    raise PreconditionError(f"{stratum.value} is not part of {domain.value}")


def _project(v, stratum, index):
    """Clamp (tau, p, z) into the open box with a small margin."""
    z = min(max(v[2], ZMIN), ZMAX)
    k = math.tanh(z)
    lo, hi, p_hi = part_box(stratum, index, k)
    m = BOX_MARGIN * (hi - lo)
    tau = min(max(v[0], lo + m), hi - m)
    p = min(max(v[1], BOX_MARGIN * p_hi), p_hi * (1.0 - BOX_MARGIN))
    return np.array([tau, p, z])


# ---------------------------------------------------------------- seeding

@lru_cache(maxsize=16)
def _grid_table(domain: DomainLabel, resolution: int):
    """Tabulated Exp over the domain: coords (M, 3), strata, endpoints (M, 3)."""
    n = resolution
    frac = (np.arange(n) + 0.5) / n
    # quadratic stretch: nearly straight extremals live at small p and k
    sq = frac * frac
    rows, strata = [], []
    for st, idx in _PARTS[domain]:
        for fz in sq:
            k = math.tanh(SEED_ZMAX * fz)
            lo, hi, p_hi = part_box(st, idx, k)
            for ft in frac:
                for fp in sq:
                    rows.append((lo + ft * (hi - lo), fp * p_hi, k))
                    strata.append(st)
    coords = np.array(rows)
    init = np.array([initial_state(CanonicalCoords(t, p, k, st))
                     for (t, p, k), st in zip(rows, strata)])
    ends = endpoints_batch(init, 1.0, 1e-10, 1e-10)
    return coords, tuple(strata), ends[:, :3]


def seed_grid(q1: Config, domain: DomainLabel, resolution: int = 16,
              count: int | None = None) -> list:
    """Grid points of the domain's box ranked by endpoint distance to q1."""
    domain = DomainLabel(domain)
    if domain is DomainLabel.NPrime:
        raise ValueError("seeds are defined for L1..L4 only")
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    coords, strata, ends = _grid_table(domain, resolution)
    d = np.sqrt((ends[:, 0] - q1.x) ** 2 + (ends[:, 1] - q1.y) ** 2
                + (np.mod(ends[:, 2] - q1.theta + math.pi, TWO_PI) - math.pi) ** 2)
    d = np.where(np.isfinite(d), d, np.inf)
    # rank within each stratum, then interleave so both charts get tried
    per = []
    sts = np.array([s.value for s in strata])
    for st, _ in _PARTS[domain]:
        idx = np.nonzero(sts == st.value)[0]
        per.append(idx[np.argsort(d[idx], kind="stable")])
    order = [i for group in zip(*per) for i in group]
    if count is not None:
        order = order[:count]
    return [CanonicalCoords(*coords[i], strata[i]) for i in order]


# ---------------------------------------------------------------- Newton

def _eval(v, stratum):
    k = math.tanh(v[2])
    cc = CanonicalCoords(v[0], v[1], k, stratum)
    return cc, k


def _linear_solver(J, regularize: bool):
    """Return a solve(b) for J x = b.

    With ``regularize`` the pseudo-inverse is Tikhonov damped, filter
    factors s / (s^2 + mu^2) with mu = 1e-12 * s_max.
    """
    if regularize:
        U, sv, Vt = np.linalg.svd(J)
        mu = 1e-12 * sv[0]
        filt = sv / (sv * sv + mu * mu)
        return lambda b: Vt.T @ (filt * (U.T @ b))
    fac = lu_factor(J)
    return lambda b: lu_solve(fac, b)


class _Budget:
    def __init__(self, n):
        self.left = n

    def take(self):
        self.left -= 1
        if self.left < 0:
            raise _OutOfBudget


class _OutOfBudget(Exception):
    pass


def _corrector(target, v, st, idx, tol, max_iter, near_boundary, budget,
               max_halvings=30):
    """Damped Newton towards a fixed target (x, y, theta unwrapped).

    A trial step is accepted when the Newton correction recomputed at the
    trial point (with the old Jacobian) shrinks, which is insensitive to
    the strong anisotropy of the map near straight extremals. At most 30
    halvings per step; two polishing steps follow convergence.
    """
    # cheap integration far from the root, full accuracy close to it
    prec = [LOOSE_RTOL]

    def F_of(v):
        budget.take()
        cc, _ = _eval(v, st)
        s = exp_state(covector_from_canonical(cc), 1.0, prec[0], prec[0])
        return np.array([s[2] - target[0], s[3] - target[1],
                         wrap_pi(s[4] - target[2])])

    F = F_of(v)
    nF = np.linalg.norm(F)
    conv = None
    for it in range(max_iter + 2):
        if prec[0] > RTOL and nF < TIGHTEN_AT:
            prec[0] = RTOL
            F = F_of(v)
            nF = np.linalg.norm(F)
        if nF < tol and conv is None and prec[0] == RTOL:
            conv = it
        if it >= max_iter and conv is None:
            break
        if conv is not None and it - conv >= 2:
            break
        cc, k = _eval(v, st)
        _, J = endpoint_and_jacobian(cc, prec[0], prec[0])
        J = J * np.array([1.0, 1.0, 1.0 - k * k])
        cond = np.linalg.cond(J)
        bad = not np.isfinite(cond) or cond > 1e10
        if bad:
            warnings.warn(f"ill-conditioned Jacobian (cond={cond:.3g})",
                          ConditioningWarning, stacklevel=3)
        try:
            lin = _linear_solver(J, near_boundary or bad)
        except (ValueError, np.linalg.LinAlgError):
            break
        dx = -lin(F)
        ndx = np.linalg.norm(dx)
        lam = 1.0
        ok = False
        for _ in range(max_halvings + 1):
            vn = _project(v + lam * dx, st, idx)
            Fn = F_of(vn)
            nn = np.linalg.norm(Fn)
            if np.linalg.norm(lin(Fn)) <= (1.0 - 0.25 * lam) * ndx or nn < 0.5 * nF:
                ok = True
                break
            lam *= 0.5
        if not ok:
            break
        if conv is not None and nn >= nF:
            break
        v, F, nF = vn, Fn, nn
    if prec[0] > RTOL and nF < TIGHTEN_AT:
        prec[0] = RTOL
        nF = np.linalg.norm(F_of(v))
    return v, nF


def newton_in_domain(q1: Config, seed: CanonicalCoords, domain: DomainLabel,
                     tol: float | None = None, max_iter: int = 40,
                     near_boundary: bool | None = None,
                     samples: int = 0, max_evals: int = 600) -> Candidate:
    """Damped Newton for Exp(lambda) = q1 inside one domain.

    Works in (tau, p, atanh k); every iterate is projected into the open
    box of the domain. If the direct iteration stalls, the target is
    approached by continuation from the seed's own endpoint. Raises
    ConvergenceError on failure.
    """
    domain = DomainLabel(domain)
    tol = default_tol() if tol is None else tol
    cls = classify_target(q1, 0.0)
    if EXPECTED_CLASS.get(domain) is not cls:
        raise PreconditionError(
            f"target class {cls.value} is not the image of {domain.value}")
    st = seed.stratum
    idx = _domain_part(domain, st)
    if near_boundary is None:
        near_boundary = min(abs(P(q1)), abs(math.sin(0.5 * q1.theta))) < 1e-3

    v0 = _project(np.array([seed.tau, seed.p, math.atanh(seed.k)]), st, idx)
    target = np.array(q1.as_tuple())
    budget = _Budget(max_evals)
    nF = math.inf
    try:
        v, nF = _corrector(target, v0, st, idx, tol, max_iter, near_boundary,
                           budget)
        if not nF < tol:
            v, nF = _continuation(target, v0, st, idx, tol, near_boundary,
                                  budget)
    except _OutOfBudget:
        pass
    if not nF < tol:
        raise ConvergenceError(
            f"Newton in {domain.value} from {seed} stalled at residual {nF:.3e}")
    cc, _ = _eval(v, st)
    return make_candidate(cc, domain, samples, q1)


def _continuation(target, v, st, idx, tol, near_boundary, budget,
                  min_ds=1e-5):
    """Follow the straight path from Exp(seed) to the target."""
    cc, _ = _eval(v, st)
    e = exp_state(covector_from_canonical(cc))[2:5]
    goal = np.array([target[0], target[1], e[2] + wrap_pi(target[2] - e[2])])
    s, ds = 0.0, 0.5
    nF = math.inf
    while s < 1.0:
        s_try = min(1.0, s + ds)
        last = s_try == 1.0
        vn, nF = _corrector(e + s_try * (goal - e), v, st, idx,
                            tol if last else 1e-8, 30 if last else 6,
                            near_boundary, budget, 30 if last else 10)
        if nF < (tol if last else 1e-8):
            v, s = vn, s_try
            ds = min(2.0 * ds, 1.0)
        else:
            ds *= 0.25
            if ds < min_ds:
                return v, math.inf
    return v, nF


def make_candidate(cc: CanonicalCoords, domain, samples: int = 0,
                   q1: Config | None = None, note: str = "") -> Candidate:
    lam = covector_from_canonical(cc)
    s = exp_state(lam)
    res = float("nan") if q1 is None else config_distance(s[2:5], q1)
    e = None
    if samples:
        e = exp_trajectory(lam, 1.0, samples,
                           meta={"stratum": cc.stratum.value,
                                 "domain": DomainLabel(domain).value})
    return Candidate(lam, cc, DomainLabel(domain), cc.stratum, res,
                     float(s[5]), e, note)


def solve_in_domain(q1: Config, domain: DomainLabel, opts: SolveOptions | None = None,
                    n_seeds: int | None = None, all_seeds: bool = False):
    """Multi-seed Newton; returns the first converged candidate.

    With ``all_seeds`` every seed is run and the list of converged
    candidates is returned instead.
    """
    opts = opts or SolveOptions()
    n_seeds = opts.n_seeds if n_seeds is None else n_seeds
    found = []
    for res in opts.resolutions:
        for seed in seed_grid(q1, domain, res, count=n_seeds):
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ConditioningWarning)
                    cand = newton_in_domain(q1, seed, domain, opts.tol)
            except ConvergenceError as exc:
                log.debug("%s", exc)
                continue
            cand.residual = config_distance(exp_state(cand.covector)[2:5], q1)
            if not all_seeds:
                return cand
            found.append(cand)
        if found:
            return found
    raise ConvergenceError(
        f"no preimage of {q1.as_tuple()} found in {domain.value}")


# ---------------------------------------------------------------- selection

def _straight_line(q1: Config, samples: int) -> Candidate:
    lam = Covector(0.0, 0.0, 0.0)
    e = exp_trajectory(lam, 1.0, max(samples, 2), meta={"stratum": "N7"})
    res = config_distance((1.0, 0.0, 0.0), q1)
    return Candidate(lam, None, DomainLabel.NPrime, Stratum.N7, res, 0.0, e,
                     "straight line")


def _same_curve_reversed(a: Covector, b: Covector, n: int = 65, tol: float = 1e-7) -> bool:
    """True when b traces the points of a in the opposite direction.

    Sampled independently of the output resolution so that coarse
    polylines cannot make distinct curves look alike.
    """
    ea, eb = exp_trajectory(a, 1.0, n), exp_trajectory(b, 1.0, n)
    da = np.abs(ea.x - eb.x[::-1]).max()
    db = np.abs(ea.y - eb.y[::-1]).max()
    return max(da, db) < tol


def _order_key(c: Candidate):
    return (c.domain.value, c.stratum.value, round(c.energy, 9),
            c.coords.tau if c.coords else 0.0)


def solve(bp: BoundaryProblem, opts: SolveOptions | None = None) -> SolveReport:
    """Normalize, classify the target, collect candidates, pick the optimum."""
    from .boundary import handle_boundary

    opts = opts or SolveOptions()
    canon, tr = normalize(bp)
    q1 = canon.q1
    if not attainable(q1, 1e-12):
        raise UnattainableError(f"target {bp.q1.as_tuple()} is not attainable")
    cls = classify_target(q1, opts.class_tol)
    samples = max(opts.samples, 2)
    if cls is TargetClass.MPrimeV:
        cands = [_straight_line(q1, samples)]
    elif cls in (TargetClass.MPlus, TargetClass.MMinus):
        doms = ((DomainLabel.L1, DomainLabel.L3) if cls is TargetClass.MPlus
                else (DomainLabel.L2, DomainLabel.L4))
        cands = []
        for d in doms:
            c = solve_in_domain(q1, d, opts)
            cands.append(c)
    else:
        cands = handle_boundary(q1, cls, opts)
        if not cands:
            raise ConvergenceError(f"no boundary candidate found for {q1.as_tuple()}")
    for c in cands:
        if c.elastica is None:
            c.elastica = exp_trajectory(
                c.covector, 1.0, samples,
                meta={"stratum": c.stratum.value, "domain": c.domain.value})
    cands.sort(key=_order_key)
    jmin = min(c.energy for c in cands)
    thr = jmin * (1.0 + opts.tie_rtol) + 1e-14
    optima = [c for c in cands if c.energy <= thr]
    merged = []
    kept = []
    for c in optima:
        twin = next((o for o in kept if _same_curve_reversed(o.covector, c.covector)), None)
        if twin is not None:
            merged.append(c)
        else:
            kept.append(c)
    for c in cands:
        c.elastica = denormalize_elastica(c.elastica, tr)
    return SolveReport(bp, cls, cands, kept, len(kept) > 1, canon, tr, merged)
