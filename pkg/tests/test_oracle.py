import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenclust import oracle
from regenclust.errors import OracleBudgetExceeded, RegenError
from regenclust.indices import cluster_mean_entering
from regenclust.model import Geometric, block, finite, iid, smith, stationary_marginal
from regenclust.observables import Cylinder, Exceedance
from regenclust.oracle import WindowEvent, eq, gt, le, ne


def P(model, event, **kw):
    return oracle.exact_window_probability(model, event, **kw)


def test_block_pair_worked_example():
    # p = (1/2, 1/2), blocks of length a: X0 = X1 = 2 holds with probability 1/2
    model = block(finite([0.5, 0.5]))
    b = P(model, WindowEvent.of({0: eq(2), 1: eq(2)}))
    assert b.lower == pytest.approx(0.5, abs=1e-15) and b.width < 1e-15


def test_iid_is_a_product():
    law = [0.3, 0.25, 0.2, 0.15, 0.1]
    model = iid(finite(law))
    for word in itertools.product(range(1, 6), repeat=3):
        b = P(model, WindowEvent.of({t: eq(s) for t, s in enumerate(word)}))
        assert b.mid == pytest.approx(np.prod([law[s - 1] for s in word]), abs=1e-15)


def test_single_letter_is_stationary_marginal():
    model = smith(finite([0.4, 0.3, 0.3]))
    for a in (1, 2, 3):
        assert P(model, WindowEvent.of({5: eq(a)})).mid == pytest.approx(
            stationary_marginal(model, a), abs=1e-15)


def test_regeneration_marker():
    # P(a block starts at time 0) = 1 / nu
    for model in (smith(finite([0.4, 0.3, 0.3])), block(finite([0.5, 0.3, 0.2]))):
        b = P(model, WindowEvent.of(regenerations={0: True}))
        assert b.mid == pytest.approx(1 / model.nu, abs=1e-15)
        no = P(model, WindowEvent.of(regenerations={0: False}))
        assert b.mid + no.mid == pytest.approx(1.0, abs=1e-15)


def test_contradictory_markers_are_impossible():
    model = block(finite([0.5, 0.5]))
    ev = WindowEvent.of(regenerations={0: True}) & WindowEvent.of(regenerations={0: False})
    assert ev.impossible and P(model, ev).upper == 0.0


def test_dp_and_dfs_agree():
    model = block(finite([0.5, 0.3, 0.2]))
    events = [
        WindowEvent.of({0: eq(3), 1: eq(3), 2: eq(3)}),
        WindowEvent.of({-1: le(1), 0: gt(1), 3: ne(2)}, {2: True}),
        oracle.cluster_at_least(Cylinder(2, 2), 3) & oracle.entering(Cylinder(2, 2)),
    ]
    for ev in events:
        a, b = P(model, ev, method="dp"), P(model, ev, method="dfs")
        assert a.mid == pytest.approx(b.mid, abs=1e-14)


def test_predicate_forces_dfs():
    model = smith(finite([0.5, 0.5]))
    ev = WindowEvent(predicate=lambda x, r, lo: x.sum() == 4, window=(0, 2))
    with pytest.raises(RegenError):
        P(model, ev, method="dp")
    # brute force over three letters of the same process
    total = 0.0
    for word in itertools.product((1, 2), repeat=3):
        if sum(word) == 4:
            total += P(model, WindowEvent.of({t: eq(s) for t, s in enumerate(word)})).mid
    assert P(model, ev).mid == pytest.approx(total, abs=1e-14)


def test_budget_exceeded_carries_bounds():
    model = smith(finite([0.2] * 5))
    with pytest.raises(OracleBudgetExceeded) as info:
        P(model, oracle.run(gt(1), 0, 40), budget=10, method="dfs")
    b = info.value.bounds
    assert 0.0 <= b.lower <= b.upper <= 1.0
    with pytest.raises(OracleBudgetExceeded):
        P(model, oracle.run(gt(1), 0, 40), budget=10, method="dp")


def test_infinite_law_needs_truncation_and_reports_dropped_mass():
    model = smith(Geometric(0.5))
    with pytest.raises(RegenError):
        P(model, WindowEvent.of({0: gt(2)}))
    b = P(model, WindowEvent.of({0: gt(2)}), max_symbol=30)
    assert b.contains(0.25, 1e-15)
    assert b.width < 1e-8


def test_conditional_ratio_bounds():
    model = smith(Geometric(0.5))
    # P(X_1 <= 2 | X_0 > 2) = theta_1 at level 2 = 3/8 (worked example)
    b = oracle.exact_conditional_probability(model, WindowEvent.of({1: le(2)}),
                                             WindowEvent.of({0: gt(2)}), max_symbol=40)
    assert b.contains(0.375, 1e-12)
    with pytest.raises(RegenError):
        oracle.ratio_bounds(b, oracle.ProbabilityBounds(0.0, 0.1, 0.0))


def test_exact_theta_q_infeasible_is_one():
    model = block(finite([0.5, 0.5]))
    b = oracle.exact_theta_q(model, Exceedance(2), 3)
    assert (b.lower, b.upper) == (1.0, 1.0)


def test_cluster_moments_finite_model():
    model = block(finite([0.5, 0.3, 0.2]))
    cb = oracle.exact_cluster_moments(model, Exceedance(1), 120)
    assert cb.tail_value(1).mid == pytest.approx(1.0, abs=1e-14)
    tails = [b.mid for b in cb.tail]
    assert all(x >= y - 1e-15 for x, y in zip(tails, tails[1:]))
    assert cb.mean.width < 1e-9 and cb.second_moment.width < 1e-7
    assert cb.mean.contains(cluster_mean_entering(model, 1), 1e-12)


@st.composite
def small_block_models(draw):
    k = draw(st.integers(1, 4))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)))
    return draw(st.sampled_from([smith, iid, block]))(finite(w / w.sum()))


@settings(max_examples=30, deadline=None)
@given(small_block_models(), st.integers(0, 4))
def test_shift_invariance(model, shift):
    ev = WindowEvent.of({0: gt(1), 1: le(2)}, {1: False})
    moved = WindowEvent.of({shift: gt(1), shift + 1: le(2)}, {shift + 1: False})
    assert P(model, ev).mid == pytest.approx(P(model, moved).mid, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(small_block_models())
def test_letter_law_sums_to_one(model):
    top = model.symbol_law.max_symbol
    total = sum(P(model, WindowEvent.of({0: eq(a), 1: eq(b)})).mid
                for a in range(1, top + 1) for b in range(1, top + 1))
    assert total == pytest.approx(1.0, abs=1e-13)
