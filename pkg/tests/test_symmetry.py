import math

import numpy as np
import pytest

from euler_elastica import elliptic as el
from euler_elastica.acceptance import random_coords
from euler_elastica.expmap import exp_endpoint
from euler_elastica.strata import (CanonicalCoords, Config, Covector, DomainLabel,
                                   Stratum, P, angle_dist, classify_domain,
                                   covector_from_canonical)
from euler_elastica.symmetry import (cost_invariance_check, eps_on_M, eps_on_N,
                                     eps_on_covector)

L = (DomainLabel.L1, DomainLabel.L2, DomainLabel.L3, DomainLabel.L4)
# domain permutations written as index tuples: image of (L1, L2, L3, L4)
PERM = {1: (1, 0, 3, 2), 2: (3, 2, 1, 0), 3: (2, 3, 0, 1)}


def dist(a: Config, b: Config) -> float:
    return math.hypot(a.x - b.x, a.y - b.y) + angle_dist(a.theta, b.theta)


def test_eps3_example():
    q = eps_on_M(3, Config(0.3, 0.1, math.pi / 2))
    assert (q.x, q.y, q.theta) == pytest.approx((0.3, -0.1, 3 * math.pi / 2))


def test_eps1_on_N1_example():
    k = 0.6
    K = el.complete_K(k)
    cc = eps_on_N(1, CanonicalCoords(K / 3, 0.7, k, Stratum.N1))
    assert cc.tau == pytest.approx(2 * K - K / 3)
    assert cc.p == 0.7 and cc.k == k


def test_invalid_index():
    with pytest.raises(ValueError):
        eps_on_M(4, Config(0, 0, 0))


def test_involutions_on_M():
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = Config(*rng.uniform(-1, 1, 2), rng.uniform(0, 2 * math.pi))
        for i in (1, 2, 3):
            assert dist(eps_on_M(i, eps_on_M(i, q)), q) < 1e-14
        lhs = eps_on_M(2, q)
        rhs = eps_on_M(1, eps_on_M(3, q))
        assert dist(lhs, rhs) < 1e-14


@pytest.mark.parametrize("i", [1, 2])
def test_P_changes_sign(i):
    rng = np.random.default_rng(6)
    for _ in range(50):
        q = Config(*rng.uniform(-1, 1, 2), rng.uniform(0, 2 * math.pi))
        assert P(eps_on_M(i, q)) == pytest.approx(-P(q), abs=1e-14)
    q = Config(0.3, 0.2, 1.0)
    assert P(eps_on_M(3, q)) == pytest.approx(P(q))


@pytest.mark.parametrize("i", [1, 2, 3])
def test_domain_permutations(i):
    rng = np.random.default_rng(10 + i)
    for j, d in enumerate(L):
        for _ in range(40):
            cc = random_coords(d, rng)
            assert classify_domain(cc) is d
            img = eps_on_N(i, cc)
            assert classify_domain(img) is L[PERM[i][j]]
            assert dist_cc(eps_on_N(i, img), cc) < 1e-12


def dist_cc(a, b):
    if a.stratum is not b.stratum:
        return math.inf
    return max(abs(a.tau - b.tau), abs(a.p - b.p), abs(a.k - b.k))


@pytest.mark.parametrize("i", [1, 2, 3])
def test_commutation_with_exp(i):
    rng = np.random.default_rng(20 + i)
    for d in L:
        for _ in range(10):
            cc = random_coords(d, rng)
            lam = covector_from_canonical(cc)
            lhs = exp_endpoint(covector_from_canonical(eps_on_N(i, cc)))
            rhs = eps_on_M(i, exp_endpoint(lam))
            assert dist(lhs, rhs) < 1e-8
            # the covector form agrees with the chart form
            a = eps_on_covector(i, lam)
            b = covector_from_canonical(eps_on_N(i, cc))
            assert abs(math.remainder(a.beta - b.beta, 2 * math.pi)) < 1e-9
            assert a.c == pytest.approx(b.c, abs=1e-9) and a.r == pytest.approx(b.r)


def test_cost_invariance():
    rng = np.random.default_rng(7)
    for _ in range(10):
        lam = covector_from_canonical(random_coords(DomainLabel.L1, rng))
        assert cost_invariance_check(lam) < 1e-9
    assert cost_invariance_check(Covector(0, 0, 0)) == 0.0
    assert cost_invariance_check(Covector(0, 2 * math.pi, 0)) < 1e-12
