import math

import pytest

from euler_elastica import elliptic as el
from euler_elastica.boundary import (INFLECTIONAL, NON_INFLECTIONAL,
                                     axis_family_energy, circle_candidates,
                                     faces, figure_eight_system, solve_face,
                                     x_star)
from euler_elastica.expmap import exp_endpoint
from euler_elastica.solver import BoundaryProblem, SolveOptions, solve
from euler_elastica.strata import (CanonicalCoords, Config, DomainLabel, Stratum,
                                   TargetClass, angle_dist, covector_from_canonical)

ORIGIN = Config(0.0, 0.0, 0.0)


def best(names, x):
    return min(e for e in (axis_family_energy(n, x) for n in names) if e is not None)


def test_figure_eight_system():
    p, k = figure_eight_system()
    K = el.complete_K(k)
    assert K < p < 2 * K
    assert abs(1 - 2 * k * k * el.sn_cn_dn(p, k)[0] ** 2) < 1e-12
    assert abs(2 * el.eps_int(p, k) - p) < 1e-12
    q = exp_endpoint(covector_from_canonical(CanonicalCoords(0.0, p, k, Stratum.N1)))
    assert math.hypot(q.x, q.y) < 1e-10 and angle_dist(q.theta, math.pi) < 1e-10


def test_zero_pi_target():
    rep = solve(BoundaryProblem(ORIGIN, Config(0, 0, math.pi)))
    assert rep.target_class is TargetClass.MPrimeP
    assert len(rep.optima) == 1 and rep.merged
    assert rep.optima[0].residual < 1e-10


def test_closed_loop_is_two_circles():
    rep = solve(BoundaryProblem(ORIGIN, ORIGIN))
    assert rep.tie and len(rep.optima) == 2
    assert {c.stratum for c in rep.optima} == {Stratum.N6plus, Stratum.N6minus}
    for c in rep.optima:
        assert c.energy == pytest.approx(2 * math.pi ** 2, rel=1e-10)
    assert len(circle_candidates(Config(0, 0, 0), 1e-10, 10)) == 2
    assert circle_candidates(Config(0.1, 0, 0), 1e-10, 10) == []


def test_backward_axis_target_is_a_mirror_pair():
    rep = solve(BoundaryProblem(ORIGIN, Config(-0.5, 0, 0)))
    assert rep.tie and len(rep.optima) == 2
    a, b = rep.optima
    assert a.energy == pytest.approx(b.energy, rel=1e-9)
    assert max(abs(a.elastica.y + b.elastica.y)) < 1e-8


def test_x_star_crossing():
    xs, gap = x_star()
    assert 0.4 < xs < 0.5 and abs(gap) < 1e-9
    assert best(INFLECTIONAL, 0.3) > best(NON_INFLECTIONAL, 0.3)
    assert best(INFLECTIONAL, 0.7) < best(NON_INFLECTIONAL, 0.7)
    for x, want in ((0.3, NON_INFLECTIONAL), (0.7, INFLECTIONAL)):
        rep = solve(BoundaryProblem(ORIGIN, Config(x, 0, 0)))
        assert rep.optima[0].note in want


@pytest.mark.parametrize("q1", [Config(0.3, -0.2, 0.0), Config(0.2, 0.1, 0.0)])
def test_theta_face_targets(q1):
    rep = solve(BoundaryProblem(ORIGIN, q1))
    assert rep.target_class is TargetClass.MPrimeTheta
    assert all(c.residual < 1e-10 for c in rep.candidates)


def test_P_face_target():
    th = 1.0
    r = 0.4
    q1 = Config(r * math.cos(th / 2), r * math.sin(th / 2), th)
    rep = solve(BoundaryProblem(ORIGIN, q1))
    assert rep.target_class is TargetClass.MPrimeP
    assert rep.candidates and all(c.residual < 1e-10 for c in rep.candidates)


def test_face_solver_finds_known_point():
    face = next(f for f in faces() if f.name.startswith("N1") and f.kind == "P")
    q1 = Config(0.4 * math.cos(0.4), 0.4 * math.sin(0.4), 0.8)
    found = solve_face(face, q1, 1e-10)
    assert found
    for cc in found:
        q = exp_endpoint(covector_from_canonical(cc))
        assert math.hypot(q.x - q1.x, q.y - q1.y) < 1e-10


def test_maxwell_switch_on_vertical_family():
    lo = solve(BoundaryProblem(ORIGIN, Config(0.11, 0.2, math.pi / 2)))
    hi = solve(BoundaryProblem(ORIGIN, Config(0.14, 0.2, math.pi / 2)))
    assert lo.target_class is TargetClass.MMinus
    assert lo.optima[0].domain is DomainLabel.L2
    assert hi.optima[0].domain is DomainLabel.L4


def test_tie_detection_ignores_output_resolution():
    for q1, n_opt in ((ORIGIN, 2), (Config(0, 0, math.pi), 1)):
        rep = solve(BoundaryProblem(ORIGIN, q1), SolveOptions(samples=2))
        assert len(rep.optima) == n_opt
