import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenclust import indices, oracle
from regenclust.errors import DegenerateLevel
from regenclust.model import Geometric, block, finite, iid, smith, table
from regenclust.observables import Cylinder, Exceedance


def test_smith_geometric_worked_values():
    model = smith(Geometric(0.5))
    assert indices.theta1_exceedance(model, 2) == pytest.approx(0.375, abs=1e-15)
    mean_length = {j: float(np.dot(*model.block_family.pmf(j))) for j in range(1, 80)}
    for a in range(1, 12):
        e = 0.5**a
        m = math.fsum(0.5**j * mean_length[j] for j in range(a + 1, 80))
        assert indices.theta1_exceedance(model, a) == pytest.approx(e * (1 - e) / m, rel=1e-13)


def test_iid_cluster_is_geometric():
    model = iid(finite([0.3, 0.25, 0.2, 0.15, 0.1]))
    for a in (1, 2, 3, 4):
        e = model.symbol_law.tail(a)
        assert indices.theta1_exceedance(model, a) == pytest.approx(1 - e, abs=1e-15)
        assert indices.cluster_second_moment_entering(model, a) == pytest.approx(
            (1 + e) / (1 - e) ** 2, rel=1e-13)
        # stationary residual of a geometric run is again geometric
        assert indices.sojourn_mean(model, a) == pytest.approx(1 / (1 - e), rel=1e-13)


def test_above_support_conventions():
    model = block(finite([0.5, 0.3, 0.2]))
    assert indices.regen_cluster_moments(model, 3) == (0.0, 0.0)
    assert indices.sojourn_mean(model, 3) == 0.0
    with pytest.raises(DegenerateLevel):
        indices.theta1_exceedance(model, 3)
    with pytest.raises(DegenerateLevel):
        indices.theta1_exceedance(model, 0)


def test_feasible_levels():
    assert indices.feasible_levels(block(finite([0.5, 0.3, 0.2]))) == [1, 2]


@pytest.mark.parametrize("name", ["smith_433", "block_532", "iid_5", "table_3"])
def test_closed_forms_match_oracle(models, name):
    model = models[name]
    for a in indices.feasible_levels(model):
        obs = Exceedance(a)
        b = oracle.exact_theta_q(model, obs, 1)
        assert b.contains(indices.theta1_exceedance(model, a), 1e-12)
        f1, f2 = oracle.exact_entering_block_moments(model, a)
        g1, g2 = indices.entering_block_moments(model, a)
        assert f1.contains(g1, 1e-12) and f2.contains(g2, 1e-12)
        cb = oracle.exact_cluster_moments(model, obs, 150)
        assert cb.mean.contains(indices.cluster_mean_entering(model, a), 1e-9)
        assert cb.second_moment.contains(indices.cluster_second_moment_entering(model, a), 1e-8)
        sj = oracle.exact_cluster_moments(model, obs, 150, "sojourn")
        assert sj.mean.contains(indices.sojourn_mean(model, a), 1e-9)
        rg = oracle.exact_cluster_moments(model, obs, 150, "regeneration")
        x, y = indices.regen_cluster_moments(model, a)
        assert rg.mean.contains(x, 1e-9) and rg.second_moment.contains(y, 1e-8)


def test_entering_cluster_pmf(models):
    model = models["block_532"]
    pmf = indices.entering_cluster_pmf(model, 1, 200)
    assert pmf[0] == 0.0
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
    k = np.arange(len(pmf))
    assert k @ pmf == pytest.approx(indices.cluster_mean_entering(model, 1), rel=1e-10)
    cb = oracle.exact_cluster_moments(model, Exceedance(1), 12)
    tail = 1.0 - np.cumsum(pmf)
    for j in range(1, 13):
        assert cb.tail_value(j).contains(tail[j - 1], 1e-12)


def test_theta_q_bound_and_small(models):
    model = models["smith_433"]
    obs = Exceedance(1)
    t1 = indices.theta1_exceedance(model, 1)
    for q in (1, 2, 4):
        tq = indices.theta_q_exact_small(model, obs, q)
        assert abs(1 - tq / t1) <= indices.theta_q_bound(model, obs, q) + 1e-12
    assert indices.theta_q_exact_small(model, obs, 1) == pytest.approx(t1, abs=1e-12)
    with pytest.raises(ValueError):
        indices.theta_q_exact_small(model, obs, 9)
    assert indices.theta_q_bound(model, Cylinder(2, 3), 2) > 0


def test_table_family_against_oracle():
    model = table(finite([0.6, 0.4]), {1: {1: 0.5, 2: 0.5}, 2: {3: 1.0}})
    b = oracle.exact_theta_q(model, Exceedance(1), 1)
    assert b.contains(indices.theta1_exceedance(model, 1), 1e-13)


@st.composite
def finite_models(draw):
    k = draw(st.integers(2, 6))
    w = np.array(draw(st.lists(st.floats(0.02, 1.0), min_size=k, max_size=k)))
    return draw(st.sampled_from([smith, iid, block]))(finite(w / w.sum()))


@settings(max_examples=60, deadline=None)
@given(finite_models(), st.data())
def test_index_invariants(model, data):
    a = data.draw(st.sampled_from(indices.feasible_levels(model)))
    theta = indices.theta1_exceedance(model, a)
    mean = indices.cluster_mean_entering(model, a)
    second = indices.cluster_second_moment_entering(model, a)
    assert 0.0 < theta <= 1.0
    assert theta * mean == pytest.approx(1.0, abs=1e-10)
    # Jensen, and the stationary residual is at least one occurrence
    assert second >= mean**2 * (1 - 1e-12)
    assert indices.sojourn_mean(model, a) >= 1.0 - 1e-12
    x, y = indices.regen_cluster_moments(model, a)
    assert y >= x**2 * (1 - 1e-12)
    assert math.isfinite(indices.sojourn_mean(model, a))
