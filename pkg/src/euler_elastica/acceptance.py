"""Acceptance checks shared by the test suite and ``euler-elastica selftest``.

Each check returns a CheckResult; wall time is measured after a warm-up
that loads the compiled integrator, and a check passes only when both its
numerical criterion and its time limit hold.
"""

from __future__ import annotations

import io
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import elliptic as el
from .cuttime import f1, k0, p1, p11, t_bound
from .expmap import closed_form_checks, exp_endpoint, exp_state, endpoint_and_jacobian
from .solver import (EXPECTED_CLASS, BoundaryProblem, SolveOptions, solve,
                     solve_in_domain)
from .strata import (CanonicalCoords, Config, Covector, DomainLabel, Stratum,
                     TargetClass, P, angle_dist, classify_domain,
                     classify_target, covector_from_canonical, from_elliptic)
from .symmetry import eps_on_M, eps_on_N, eps_on_covector

TIME_LIMITS = {1: 1.0, 2: 0.1, 3: 5.0, 4: 30.0, 5: 30.0, 6: 180.0,
               7: 60.0, 8: 120.0, 9: 1.0, 10: 60.0}
QUICK = (1, 5)

DOMAINS = (DomainLabel.L1, DomainLabel.L2, DomainLabel.L3, DomainLabel.L4)
SWAP = {
    1: {DomainLabel.L1: DomainLabel.L2, DomainLabel.L2: DomainLabel.L1,
        DomainLabel.L3: DomainLabel.L4, DomainLabel.L4: DomainLabel.L3},
    2: {DomainLabel.L1: DomainLabel.L4, DomainLabel.L4: DomainLabel.L1,
        DomainLabel.L2: DomainLabel.L3, DomainLabel.L3: DomainLabel.L2},
    3: {DomainLabel.L1: DomainLabel.L3, DomainLabel.L3: DomainLabel.L1,
        DomainLabel.L2: DomainLabel.L4, DomainLabel.L4: DomainLabel.L2},
}
M_FLIP = {1: True, 2: True, 3: False}


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.2f}s / {self.limit:g}s)")


def warm_up() -> None:
    """Load the compiled integrator and the cached constants."""
    k0()
    cc = CanonicalCoords(0.3, 0.5, 0.5, Stratum.N1)
    exp_state(covector_from_canonical(cc))
    endpoint_and_jacobian(cc)


def random_coords(domain: DomainLabel, rng, margin: float = 0.02,
                  k_range=(0.05, 0.99), stratum=None) -> CanonicalCoords:
    """Random point of a domain's box, kept a relative margin off its faces."""
    k = rng.uniform(*k_range)
    K = el.complete_K(k)
    idx = DOMAINS.index(domain)
    if stratum is None:
        stratum = Stratum.N1 if rng.random() < 0.5 else None
    fr = lambda: rng.uniform(margin, 1.0 - margin)  # noqa: E731
    if stratum is Stratum.N1:
        return CanonicalCoords((idx + fr()) * K, fr() * p1(k), k, Stratum.N1)
    st = Stratum.N2plus if domain in (DomainLabel.L1, DomainLabel.L4) else Stratum.N2minus
    lo = 0.0 if domain in (DomainLabel.L1, DomainLabel.L3) else -1.0
    return CanonicalCoords((lo + fr()) * K, fr() * K, k, st)


# ------------------------------------------------------------------ 1

def check_elliptic_identities():
    ks = [0.1 * i for i in range(10)] + [0.99, 1.0 - 1e-6]
    pyth = dn_id = 0.0
    for k in ks:
        K = el.complete_K(k)
        for p in np.linspace(-4.0 * K, 4.0 * K, 200):
            sn, cn, dn = el.sn_cn_dn(p, k)
            pyth = max(pyth, abs(sn * sn + cn * cn - 1.0))
            dn_id = max(dn_id, abs(dn * dn + k * k * sn * sn - 1.0))
    leg = 0.0
    for k in ks[1:]:
        kp = el.kprime(k)
        K, E = el.complete_K(k), el.complete_E(k)
        Kp, Ep = el.complete_K(kp), el.complete_E(kp)
        leg = max(leg, abs(E * Kp + Ep * K - K * Kp - 0.5 * math.pi))
    ok = pyth < 1e-12 and dn_id < 1e-12 and leg < 1e-12
    return ok, f"sn2+cn2 {pyth:.1e}, dn2+k2sn2 {dn_id:.1e}, Legendre {leg:.1e}"


# ------------------------------------------------------------------ 2

def check_k0():
    k = k0()
    K, E = el.complete_K(k), el.complete_E(k)
    res = abs(2.0 * E - K)
    ok = res < 1e-12 and abs(k - 0.902) < 0.01
    return ok, f"k0 = {k:.15f}, |2E-K| = {res:.1e}"


# ------------------------------------------------------------------ 3

def check_f1_sign(n_k: int = 50, n_p: int = 200, delta: float = 1e-6):
    worst_res = 0.0
    bad = []
    for k in np.linspace(0.01, 0.99, n_k):
        K = el.complete_K(k)
        r = p11(k)
        worst_res = max(worst_res, abs(f1(r, k)))
        pos = np.linspace(delta, r - delta, n_p)
        neg = np.linspace(r + delta, 3.0 * K - delta, n_p)
        if not all(f1(p, k) > 0.0 for p in pos):
            bad.append(f"f1 not positive below p11 at k={k:.3f}")
        if not all(f1(p, k) < 0.0 for p in neg):
            bad.append(f"f1 not negative above p11 at k={k:.3f}")
    kk = k0()
    at_k0 = abs(p11(kk) - 2.0 * el.complete_K(kk))
    ok = not bad and worst_res < 1e-12 and at_k0 < 1e-8
    detail = (f"root residual {worst_res:.1e}, |p11(k0)-2K| {at_k0:.1e}"
              + (f", {bad[0]}" if bad else ""))
    return ok, detail


# ------------------------------------------------------------------ 4

def check_closed_forms(n: int = 1000, seed: int = 4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        st = (Stratum.N1, Stratum.N2plus, Stratum.N2minus)[rng.integers(3)]
        k = rng.uniform(0.01, 0.99)
        K = el.complete_K(k)
        if st is Stratum.N1:
            cc = CanonicalCoords(rng.uniform(0, 4.0 * K), rng.uniform(0.01, 0.99) * p1(k), k, st)
        else:
            cc = CanonicalCoords(rng.uniform(-K, K), rng.uniform(0.01, 0.99) * K, k, st)
        q = exp_endpoint(covector_from_canonical(cc))
        s_cf, p_cf, r_cf = closed_form_checks(cc)
        # theta of q lies in [0, 2 pi): compare on that branch
        sgn = -1.0 if s_cf < 0 else 1.0
        err = max(abs(abs(s_cf) - math.sin(0.5 * q.theta)),
                  abs(sgn * p_cf - P(q)),
                  abs(r_cf - (q.x * q.x + q.y * q.y - 1.0)))
        worst = max(worst, err)
    return worst < 1e-8, f"max deviation {worst:.1e} over {n} samples"


# ------------------------------------------------------------------ 5

def check_symmetries(n: int = 500, seed: int = 5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = []
    for j in range(n):
        dom = DOMAINS[j % 4]
        cc = random_coords(dom, rng)
        lam = covector_from_canonical(cc)
        q = exp_endpoint(lam)
        cls = classify_target(q, 0.0)
        if cls is not EXPECTED_CLASS[dom]:
            bad.append(f"Exp({dom.value}) gave {cls.value}")
        for i in (1, 2, 3):
            lhs = exp_endpoint(eps_on_covector(i, lam))
            rhs = eps_on_M(i, q)
            d = max(abs(lhs.x - rhs.x), abs(lhs.y - rhs.y),
                    angle_dist(lhs.theta, rhs.theta))
            worst = max(worst, d)
            got = classify_domain(eps_on_N(i, cc))
            if got is not SWAP[i][dom]:
                bad.append(f"eps{i}({dom.value}) -> {got.value}")
            c2 = classify_target(rhs, 0.0)
            want = cls
            if M_FLIP[i]:
                want = TargetClass.MMinus if cls is TargetClass.MPlus else TargetClass.MPlus
            if c2 is not want:
                bad.append(f"eps{i}({cls.value}) -> {c2.value}")
    ok = worst < 1e-8 and not bad
    detail = f"commutation {worst:.1e}, table violations {len(bad)}"
    if bad:
        detail += f" (first: {bad[0]})"
    return ok, detail


# ------------------------------------------------------------------ 6

def check_round_trip(n_per_domain: int = 200, seed: int = 6, n_seeds: int = 10):
    rng = np.random.default_rng(seed)
    worst = spread = 0.0
    failures = []
    opts = SolveOptions()
    for dom in (DomainLabel.L1, DomainLabel.L3):
        for _ in range(n_per_domain):
            cc = random_coords(dom, rng)
            q = exp_endpoint(covector_from_canonical(cc))
            try:
                got = solve_in_domain(q, dom, opts, n_seeds=n_seeds, all_seeds=True)
            except Exception as exc:  # reported, counted as failure
                failures.append(f"{dom.value} {cc.as_tuple()}: {exc}")
                continue
            pts = []
            for g in got:
                if g.stratum is not cc.stratum:
                    failures.append(f"{dom.value}: converged in {g.stratum.value}, "
                                    f"expected {cc.stratum.value}")
                    continue
                pts.append(np.array(g.coords.as_tuple()))
            if not pts:
                continue
            pts = np.array(pts)
            worst = max(worst, float(np.abs(pts - np.array(cc.as_tuple())).max()))
            spread = max(spread, float(np.ptp(pts, axis=0).max()))
    ok = not failures and worst < 1e-6 and spread < 1e-6
    detail = (f"{2 * n_per_domain} targets, max coordinate error {worst:.1e}, "
              f"multi-start spread {spread:.1e}, failures {len(failures)}")
    if failures:
        detail += f" (first: {failures[0]})"
    return ok, detail


# ------------------------------------------------------------------ 7

def _mirror_gap(a, b) -> float:
    return max(float(np.abs(a.elastica.x - b.elastica.x).max()),
               float(np.abs(a.elastica.y + b.elastica.y).max()))


def check_special_targets():
    notes = []
    ok = True
    r = solve(BoundaryProblem(Config(0, 0, 0), Config(1.0, 0.0, 0.0)))
    good = len(r.optima) == 1 and r.optima[0].energy < 1e-12
    ok &= good
    notes.append(f"(1,0,0): {len(r.optima)} optimum, J={r.optima[0].energy:.1e}")

    r = solve(BoundaryProblem(Config(0, 0, 0), Config(0.3, 0.0, math.pi)))
    if len(r.optima) == 2:
        a, b = r.optima
        dj = abs(a.energy - b.energy)
        mg = _mirror_gap(a, b)
        good = dj < 1e-9 and mg < 1e-8
    else:
        dj = mg = math.nan
        good = False
    ok &= good
    notes.append(f"(0.3,0,pi): {len(r.optima)} optima, dJ={dj:.1e}, mirror {mg:.1e}")

    r = solve(BoundaryProblem(Config(0, 0, 0), Config(0.0, 0.0, math.pi)))
    good = len(r.optima) == 1 and r.optima[0].coords is not None
    if good:
        c = r.optima[0].coords
        snt = el.sn_cn_dn(c.tau, c.k)[0]
        snp = el.sn_cn_dn(c.p, c.k)[0]
        e1, e2, e3 = abs(snt), abs(1 - 2 * c.k ** 2 * snp ** 2), abs(2 * el.eps_int(c.p, c.k) - c.p)
        good = max(e1, e2, e3) < 1e-8
        notes.append(f"(0,0,pi): unique, residuals {max(e1, e2, e3):.1e}")
    else:
        notes.append(f"(0,0,pi): {len(r.optima)} optima")
    ok &= good

    r = solve(BoundaryProblem(Config(0, 0, 0), Config(0.0, 0.0, 0.0)))
    if len(r.optima) == 2:
        dc = max(float(np.abs(np.abs(o.elastica.c) - 2 * math.pi).max()) for o in r.optima)
        dj = max(abs(o.energy - 2 * math.pi ** 2) for o in r.optima)
        good = dc < 1e-6 and dj < 1e-6
    else:
        dc = dj = math.nan
        good = False
    ok &= good
    notes.append(f"(0,0,0): {len(r.optima)} circles, |c|-2pi {dc:.1e}, J-2pi^2 {dj:.1e}")
    return bool(ok), "; ".join(notes)


# ------------------------------------------------------------------ 8

def _optimum_kinds(x1: float):
    r = solve(BoundaryProblem(Config(0, 0, 0), Config(x1, 0.0, 0.0)))
    kinds = sorted("inflectional" if o.stratum is Stratum.N1 else "non-inflectional"
                   for o in r.optima)
    return len(r.candidates), len(r.optima), kinds


def check_x_star():
    from .boundary import x_star

    xs, gap = x_star()
    ok = 0.4 < xs < 0.5 and abs(gap) < 1e-8
    c_lo, o_lo, k_lo = _optimum_kinds(xs - 0.05)
    c_hi, o_hi, k_hi = _optimum_kinds(xs + 0.05)
    _, o_at, _ = _optimum_kinds(xs)
    _, o_off_lo, _ = _optimum_kinds(xs - 1e-6)
    _, o_off_hi, _ = _optimum_kinds(xs + 1e-6)
    ok &= (o_lo == 2 and o_hi == 2 and len(set(k_lo)) == 1 and len(set(k_hi)) == 1
           and k_lo[0] != k_hi[0])
    ok &= o_at == 4 and o_off_lo == 2 and o_off_hi == 2
    detail = (f"x* = {xs:.10f}, gap {gap:.1e}; optima {o_lo}/{o_hi} at x*-/+0.05 "
              f"({k_lo[0]}/{k_hi[0]}), {o_at} at x*, {o_off_lo}/{o_off_hi} at x*-/+1e-6")
    return bool(ok), detail


# ------------------------------------------------------------------ 9

def check_cut_time_limit():
    tol = 1e-15
    ok = True
    notes = []
    for st in (Stratum.N1, Stratum.N2plus):
        ts = []
        for e in (3, 6, 12):
            lam = from_elliptic(0.3, 1.0 - 10.0 ** -e, 1.0, st)
            ts.append(t_bound(lam, tol))
        inc = all(np.isfinite(ts)) and ts[0] < ts[1] < ts[2]
        ok &= inc
        notes.append(f"{st.value}: " + ", ".join(f"{t:.6f}" for t in ts))
    worst = 0.0
    for st in (Stratum.N1, Stratum.N2plus):
        for k in (0.3, 0.9, 1.0 - 1e-3, 1.0 - 1e-6, 1.0 - 1e-12):
            lam = from_elliptic(0.3, k, 1.0, st)
            lam4 = Covector(lam.beta, 2.0 * lam.c, 4.0 * lam.r)
            t1, t4 = t_bound(lam, tol), t_bound(lam4, tol)
            worst = max(worst, abs(t4 - 0.5 * t1) / t1)
    ok &= worst < 1e-12
    notes.append(f"dilation {worst:.1e}")
    return bool(ok), "; ".join(notes)


# ------------------------------------------------------------------ 10

# one optimal branch: clear of the Maxwell switch near x = 0.127 and of P = 0 at x = 0.2
SWEEP_X = np.linspace(0.3, 0.5, 10)


def coords_step(a: dict, b: dict) -> float:
    """Largest change of (tau, p, k) between two candidate records; tau on its circle."""
    if a["stratum"] != b["stratum"]:
        return math.inf
    per = (4.0 if a["stratum"] == "N1" else 2.0) * el.complete_K(a["k"])
    dt = math.fmod(abs(b["tau"] - a["tau"]), per)
    return max(min(dt, per - dt), abs(b["p"] - a["p"]), abs(b["k"] - a["k"]))


def check_cli():
    from .cli import main

    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        outs = []
        for i in range(2):
            path = d / f"solve{i}.json"
            code = main(["solve", "--q1", "0.3,0.2,1.2", "--out", str(path)])
            outs.append((code, path.read_bytes() if path.exists() else b""))
        same = outs[0][0] == 0 and outs[0] == outs[1]
        rows = "\n".join(f"{float(x)!r},0.2,{math.pi / 2!r}" for x in SWEEP_X)
        (d / "targets.csv").write_text(rows + "\n")
        code = main(["sweep", "--input", str(d / "targets.csv"), "--out", str(d / "sweep"),
                     "--samples", "50"], stdout=io.StringIO(), stderr=io.StringIO())
        import json
        best = []
        for i in range(len(SWEEP_X)):
            rec = json.loads((d / "sweep" / f"row_{i:03d}.json").read_text())
            best.append(rec["candidates"][rec["optima"][0]])
        jumps = [coords_step(a, b) for a, b in zip(best, best[1:])]
    ok = same and code == 0 and max(jumps) < 0.1
    return ok, (f"solve byte-identical: {same}, sweep exit {code}, "
                f"max consecutive step {max(jumps):.3f}")


CHECKS = {
    1: ("elliptic identities", check_elliptic_identities),
    2: ("k0", check_k0),
    3: ("f1 sign structure", check_f1_sign),
    4: ("ODE vs closed forms", check_closed_forms),
    5: ("symmetry commutation", check_symmetries),
    6: ("inverse round trip", check_round_trip),
    7: ("special targets", check_special_targets),
    8: ("x* transition", check_x_star),
    9: ("cut time toward N3", check_cut_time_limit),
    10: ("CLI determinism", check_cli),
}


def run_check(number: int) -> CheckResult:
    name, fn = CHECKS[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:
        ok, detail = False, f"error: {exc!r}"
    dt = time.perf_counter() - t0
    limit = TIME_LIMITS[number]
    if dt > limit:
        ok = False
        detail += "; over time limit"
    return CheckResult(number, name, bool(ok), detail, dt, limit)


def run_all(numbers=None):
    warm_up()
    return [run_check(n) for n in (numbers or sorted(CHECKS))]
