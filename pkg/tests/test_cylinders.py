import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenclust import cylinders as cyl
from regenclust import oracle
from regenclust.errors import DegeneratePattern, DegenerateSymbol, RegenError
from regenclust.model import Geometric, block, finite, iid, smith
from regenclust.observables import Cylinder

# root of x^2 (x - 0.15) - 0.15, frozen from an independent bisection
SMITH_433_ROOT_A2 = 0.5863267512


def test_euclid_decomposition():
    assert tuple(cyl.euclid_decomposition(7, 3)) == (3, 2, 1)
    assert tuple(cyl.euclid_decomposition(9, 3)) == (3, 0, 3)
    assert tuple(cyl.euclid_decomposition(1, 5)) == (1, 4, 1)
    with pytest.raises(ValueError):
        cyl.euclid_decomposition(0, 3)


@settings(max_examples=200)
@given(st.integers(1, 500), st.integers(1, 40))
def test_euclid_identity(n, a):
    c, s, r = cyl.euclid_decomposition(n, a)
    assert c * a - s == n and 0 <= s < a and r == a - s and 1 <= r <= a


def test_block_mu_worked_value():
    model = block(finite([0.5, 0.1, 0.4]))
    assert cyl.mu_cylinder(model, 3, 7) == pytest.approx(0.1010526, abs=5e-8)
    assert cyl.mu_cylinder_block(model, 3, 7) == pytest.approx(
        cyl.mu_cylinder(model, 3, 7), abs=1e-15)


def test_block_theta1_cycle():
    # theta1 cycles with n mod 3 for p_3 = 0.4
    model = block(finite([0.5, 0.1, 0.4]))
    got = [cyl.theta1_cylinder(model, 3, n) for n in range(4, 10)]
    assert got == pytest.approx([0.2, 0.25, 1 / 3] * 2, abs=1e-14)


def test_block_closed_forms_match_recursion():
    model = block(finite([0.1, 0.2, 0.3, 0.15, 0.25]))
    for a in (2, 3, 5):
        for n in range(1, 25):
            assert cyl.theta1_cylinder(model, a, n) == pytest.approx(
                cyl.theta1_cylinder_block(model, a, n), rel=1e-12)
            s = cyl.euclid_decomposition(n, a).s_n
            sol = cyl.cyl_prob_given_regen(model, a, n + 40)
            for k in (1, 2, s + 1, s + 2, s + a + 2, 30):
                assert cyl.cluster_tail_cyl(model, a, n, k) == pytest.approx(
                    sol.prob(n + k - 1) / sol.prob(n), rel=1e-12)


def test_block_probability_given_regen():
    model = block(finite([0.5, 0.3, 0.2]))
    sol = cyl.cyl_prob_given_regen(model, 3, 12)
    assert sol.values == pytest.approx([0.2 ** -(-m // 3) for m in range(1, 13)], rel=1e-14)
    # lengths all equal 3: no aperiodic dominant root
    assert sol.dominant_root is None


def test_smith_root():
    model = smith(finite([0.4, 0.3, 0.3]))
    r = cyl.dominant_root(model, 2)
    assert r == pytest.approx(SMITH_433_ROOT_A2, abs=1e-10)
    # the general solver finds the same root
    assert cyl.cyl_prob_given_regen(model, 2, 5).dominant_root == pytest.approx(r, abs=1e-11)
    assert r**2 * (r - 0.15) == pytest.approx(0.15, abs=1e-12)
    assert cyl.dominant_root(smith(Geometric(0.5)), 2) == pytest.approx(
        cyl.renewal_root(cyl._step_weights(smith(Geometric(0.5)), 2)), abs=1e-11)


def test_smith_root_preconditions():
    with pytest.raises(DegenerateSymbol):
        cyl.dominant_root(smith(Geometric(0.5)), 1)
    with pytest.raises(RegenError):
        cyl.dominant_root(block(finite([0.5, 0.5])), 2)


def test_smith_ratio_and_theta_limit():
    model = smith(Geometric(0.5))
    sol = cyl.cyl_prob_given_regen(model, 2, 301)
    r = sol.dominant_root
    assert sol.prob(201) / sol.prob(200) == pytest.approx(r, abs=1e-10)
    assert sol.prob(200) == pytest.approx(sol.root_multiplier * r**200, rel=1e-8)
    assert cyl.theta1_cylinder(model, 2, 300) == pytest.approx(1 - r, abs=1e-10)
    assert cyl.cluster_mean_entering_cyl(model, 2, 300) == pytest.approx(
        cyl.smith_cluster_mean_limit(model, 2), rel=1e-8)


@pytest.mark.parametrize("make,a", [(lambda: block(finite([0.5, 0.3, 0.2])), 3),
                                    (lambda: smith(finite([0.4, 0.3, 0.3])), 2),
                                    (lambda: iid(finite([0.6, 0.4])), 2)])
def test_mu_and_theta_against_oracle(make, a):
    model = make()
    for n in range(1, 9):
        mu = oracle.exact_window_probability(model, oracle.occurrence(Cylinder(a, n)))
        assert mu.contains(cyl.mu_cylinder(model, a, n), 1e-14)
        th = oracle.exact_theta_q(model, Cylinder(a, n), 1)
        assert th.contains(cyl.theta1_cylinder(model, a, n), 1e-13)


def test_cluster_moments_against_oracle():
    model = smith(finite([0.4, 0.3, 0.3]))
    for n in (1, 3, 6):
        obs = Cylinder(2, n)
        cb = oracle.exact_cluster_moments(model, obs, 80)
        assert cb.mean.contains(cyl.cluster_mean_entering_cyl(model, 2, n), 1e-9)
        assert cb.mean.contains(1 / cyl.theta1_cylinder(model, 2, n), 1e-9)
        sj = oracle.exact_cluster_moments(model, obs, 80, "sojourn")
        assert sj.mean.contains(cyl.sojourn_mean_cyl(model, 2, n), 1e-9)
    model = block(finite([0.5, 0.3, 0.2]))
    for n in (1, 4, 7):
        obs = Cylinder(3, n)
        sj = oracle.exact_cluster_moments(model, obs, 80, "sojourn")
        assert sj.mean.contains(cyl.sojourn_mean_cyl(model, 3, n), 1e-9)
        cb = oracle.exact_cluster_moments(model, obs, 80)
        mom = cyl.block_cylinder_moments(model, 3, n)
        assert cb.mean.contains(mom["mean"], 1e-9)
        assert cb.second_moment.contains(mom["second"], 1e-8)


def test_degenerate_patterns():
    with pytest.raises(DegeneratePattern):
        cyl.cluster_tail_cyl(iid(finite([1.0])), 1, 3, 2)
    with pytest.raises(DegeneratePattern):
        cyl.theta1_cylinder(block(finite({1: 0.5, 3: 0.5})), 2, 3)
    assert cyl.mu_cylinder(block(finite({1: 0.5, 3: 0.5})), 2, 3) == 0.0


@st.composite
def finite_models(draw):
    k = draw(st.integers(2, 5))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)))
    model = draw(st.sampled_from([smith, iid, block]))(finite(w / w.sum()))
    return model, draw(st.integers(1, k))


@settings(max_examples=60, deadline=None)
@given(finite_models(), st.integers(1, 30))
def test_cylinder_invariants(pair, n):
    model, a = pair
    mu = [cyl.mu_cylinder(model, a, m) for m in (n, n + 1)]
    assert 0 < mu[1] <= mu[0] <= model.pmf(a) / model.nu * model.block_family.mean(a) + 1e-15
    theta = cyl.theta1_cylinder(model, a, n)
    assert theta == pytest.approx(1 - mu[1] / mu[0], abs=1e-9)
    assert 0.0 < theta <= 1.0
    assert theta * cyl.cluster_mean_entering_cyl(model, a, n) == pytest.approx(1.0, rel=1e-9)
    assert cyl.sojourn_mean_cyl(model, a, n) >= 1.0 - 1e-12
    assert math.isfinite(cyl.sojourn_mean_cyl(model, a, n))
