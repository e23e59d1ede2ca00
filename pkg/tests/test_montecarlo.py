import numpy as np
import pytest
from scipy import stats

from regenclust import cylinders as cyl
from regenclust import decay, indices
from regenclust import montecarlo as mc
from regenclust.errors import BudgetExceeded, DegeneratePattern
from regenclust.model import block, finite, iid, smith
from regenclust.observables import Cylinder, Exceedance


def test_theta_deterministic_across_workers(models):
    model = models["smith_433"]
    a = mc.estimate_theta_q(model, Exceedance(1), 1, 40_000, seed=7, workers=1)
    b = mc.estimate_theta_q(model, Exceedance(1), 1, 40_000, seed=7, workers=4)
    assert a == b


def test_theta_estimate_agrees(models):
    model = models["block_532"]
    est = mc.estimate_theta_q(model, Exceedance(1), 1, 100_000, seed=3)
    assert abs(est.z_score(indices.theta1_exceedance(model, 1))) < 4


def test_theta_unreachable_convention():
    est = mc.estimate_theta_q(block(finite([0.5, 0.5])), Exceedance(2), 2, 100, seed=0)
    assert (est.value, est.stderr) == (1.0, 0.0)


def test_cylinder_theta_estimate(models):
    model = models["block_514"]
    est = mc.estimate_theta_q(model, Cylinder(3, 4), 1, 200_000, seed=5)
    assert abs(est.z_score(cyl.theta1_cylinder(model, 3, 4))) < 4


@pytest.mark.parametrize("conditioning", ["entering", "sojourn", "regeneration"])
def test_cluster_estimates(models, conditioning):
    model = models["table_3"]
    est = mc.estimate_cluster_distribution(model, Exceedance(1), conditioning, 5, 100_000, seed=11)
    if conditioning == "entering":
        target = indices.cluster_mean_entering(model, 1)
        assert est.tail_value(1).value == 1.0
    elif conditioning == "sojourn":
        target = indices.sojourn_mean(model, 1)
    else:
        target = indices.regen_cluster_moments(model, 1)[0]
    assert abs(est.mean.z_score(target)) < 4
    assert est.truncated == 0 and est.histogram.sum() == est.n_conditioned


def test_cluster_unknown_conditioning(models):
    with pytest.raises(ValueError):
        mc.estimate_cluster_distribution(models["iid_5"], Exceedance(1), "bogus")


def test_correlation_estimate():
    model = decay.morse_model(0.5)
    est = mc.estimate_correlation(model, 6, 50_000, seed=2)
    assert est[0].value == 1.0
    for n in range(1, 7):
        assert abs(est[n].z_score(decay.morse_closed_form(0.5, n))) < 4


def test_correlation_workers_identical():
    model = decay.morse_model(0.3)
    a = mc.estimate_correlation(model, 3, 5_000, seed=9, workers=1)
    b = mc.estimate_correlation(model, 3, 5_000, seed=9, workers=3)
    assert [e.value for e in a] == [e.value for e in b]


def test_skip_and_naive_samplers_agree():
    model = smith(finite([0.4, 0.3, 0.3]))
    fast = mc.estimate_hitting_scaled(model, 2, 6, 20_000, seed=1, method="skip")
    slow = mc.estimate_hitting_scaled(model, 2, 6, 20_000, seed=2, method="naive")
    assert stats.ks_2samp(fast.values, slow.values).pvalue > 0.001
    assert fast.scale == slow.scale


def test_naive_budget():
    model = smith(finite([0.4, 0.3, 0.3]))
    with pytest.raises(BudgetExceeded) as info:
        mc.estimate_hitting_scaled(model, 2, 30, 200, seed=1, method="naive", step_cap=50)
    assert info.value.cap == 50


def test_hitting_preconditions():
    with pytest.raises(DegeneratePattern):
        mc.estimate_hitting_scaled(iid(finite([1.0])), 1, 3, 1000, seed=0)
    with pytest.raises(ValueError):
        mc.estimate_hitting_scaled(iid(finite([0.5, 0.5])), 1, 3, 10, seed=0)


def test_iid_hitting_mean():
    # scaled hitting times of a long pattern have mean close to 1
    model = iid(finite([0.5, 0.5]))
    sample = mc.estimate_hitting_scaled(model, 1, 10, 20_000, seed=4)
    assert np.mean(sample.values) == pytest.approx(1.0, abs=0.05)
    assert mc.ks_exponential(sample) < 0.03


def test_ks_on_exact_exponential():
    x = np.random.default_rng(0).exponential(size=5000)
    assert mc.ks_exponential(x) < 0.03
