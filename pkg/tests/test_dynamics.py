import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concatfj.analysis import consensus_reached
from concatfj.dynamics import (
    final_opinion_closed_form,
    final_opinion_iterative,
    issue_transfer_matrix,
    run_issue_sequence,
    within_issue_step,
)
from concatfj.errors import ConfigError, DimensionMismatch, NoConvergence, SingularSystem
from concatfj.network import complete_uniform, from_weights, random_strongly_connected
from concatfj.voting import StubbornnessPolicy

from helpers import brute_force_fixed_point, random_instance

# rank-one transfer matrix for one stubborn agent on the complete 3-graph,
# frozen from brute_force_fixed_point applied to each unit vector
ONE_STUBBORN_V = np.array([[1.0, 0, 0], [1.0, 0, 0], [1.0, 0, 0]])


def test_fully_stubborn_agent_keeps_anchor():
    g = random_strongly_connected(5, 1, 0.6)
    theta = np.array([1.0, 0.2, 0.0, 0.5, 0.3])
    y_t = np.array([0.9, 0.1, 0.4, 0.7, 0.2])
    y0 = np.array([0.33, 0.5, 0.5, 0.5, 0.5])
    assert within_issue_step(g, theta, y_t, y0)[0] == 0.33


def test_pure_averaging_step():
    y = np.array([0.1, 0.4, 0.9, 0.6])
    out = within_issue_step(complete_uniform(4), np.zeros(4), y, y)
    np.testing.assert_allclose(out, y.mean(), atol=1e-15)


@pytest.mark.parametrize("theta, delta", [(0.3, 0.2), (0.8, 0.45), (0.0, 0.1)])
def test_two_agent_step(theta, delta):
    y = np.array([0.5 + delta, 0.5 - delta])
    out = within_issue_step(complete_uniform(2), np.array([theta, theta]), y, y)
    np.testing.assert_allclose(out, [0.5 + theta * delta, 0.5 - theta * delta], atol=1e-15)


def test_step_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        within_issue_step(complete_uniform(3), np.zeros(2), np.zeros(3), np.zeros(3))


def test_singular_without_stubborn_agent():
    with pytest.raises(SingularSystem):
        issue_transfer_matrix(complete_uniform(2), np.zeros(2))


def test_singular_when_closed_group_has_no_stubborn_agent():
    # agents 1 and 2 only listen to each other and are not stubborn
    g = from_weights([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [1 / 3, 1 / 3, 1 / 3]])
    with pytest.raises(SingularSystem):
        issue_transfer_matrix(g, np.array([0.0, 0.0, 0.7]))


def test_one_stubborn_agent_transfer_matrix():
    g = complete_uniform(3)
    theta = np.array([0.9, 0.0, 0.0])
    for k in range(3):
        e = np.eye(3)[k]
        np.testing.assert_allclose(brute_force_fixed_point(g.weights.tolist(), theta, e), ONE_STUBBORN_V[:, k], atol=1e-12)
    v = issue_transfer_matrix(g, theta)
    np.testing.assert_allclose(v, ONE_STUBBORN_V, atol=1e-12)
    np.testing.assert_allclose(final_opinion_closed_form(g, theta, [0.2, 0.7, 0.9]), [0.2, 0.2, 0.2], atol=1e-12)


def test_closed_form_identity_when_all_stubborn():
    g = random_strongly_connected(4, 5, 0.5)
    y0 = np.array([0.1, 0.9, 0.3, 0.6])
    np.testing.assert_allclose(final_opinion_closed_form(g, np.ones(4), y0), y0, atol=0)
    np.testing.assert_array_equal(final_opinion_iterative(g, np.ones(4), y0), y0)


@pytest.mark.parametrize("theta, delta", [(0.3, 0.2), (0.8, 0.45), (0.05, 0.5)])
def test_two_agent_closed_form(theta, delta):
    y0 = [0.5 + delta, 0.5 - delta]
    out = final_opinion_closed_form(complete_uniform(2), np.array([theta, theta]), y0)
    np.testing.assert_allclose(out, [0.5 + theta * delta, 0.5 - theta * delta], atol=1e-14)


def test_iterative_degroot_does_not_raise():
    # complete graph with self loops is aperiodic, so plain averaging converges
    g = complete_uniform(3)
    y0 = np.array([0.1, 0.5, 0.9])
    out = final_opinion_iterative(g, np.zeros(3), y0)
    np.testing.assert_allclose(out, 0.5, atol=1e-12)
    with pytest.raises(SingularSystem):
        final_opinion_closed_form(g, np.zeros(3), y0)


def test_iterative_no_convergence():
    g = from_weights([[0, 1], [1, 0]])  # periodic averaging oscillates
    with pytest.raises(NoConvergence):
        final_opinion_iterative(g, np.zeros(2), np.array([0.0, 1.0]), max_iter=1000)


def test_random_instances_equivalence_and_structure():
    rng = np.random.default_rng(11)
    for _ in range(60):
        g, theta, y0 = random_instance(rng)
        v = issue_transfer_matrix(g, theta)
        assert np.max(np.abs(v.sum(axis=1) - 1)) <= 1e-10
        assert np.all(np.abs(v[:, theta == 0]) <= 1e-12)
        assert np.all(v[:, theta > 0] > 0)
        closed = v @ y0
        np.testing.assert_allclose(final_opinion_iterative(g, theta, y0, tol=1e-12), closed, atol=1e-8)
        stubborn = theta == 1
        np.testing.assert_array_equal(closed[stubborn], y0[stubborn])


def test_frozen_agent_keeps_opinion_exactly():
    g = random_strongly_connected(6, 2, 0.5)
    theta = np.array([1.0, 0.3, 0.0, 0.5, 0.0, 0.2])
    y0 = np.array([0.123, 0.9, 0.4, 0.2, 0.7, 0.6])
    assert final_opinion_closed_form(g, theta, y0)[0] == 0.123


def test_constant_policy_two_agent_geometric_decay():
    theta, delta0 = 0.6, 0.3
    trace = run_issue_sequence(
        complete_uniform(2), [theta, theta], [0.5 + delta0, 0.5 - delta0],
        StubbornnessPolicy("constant", 0.0), 20,
    )
    y = trace.opinions()
    expected = [theta**s * delta0 for s in range(21)]
    np.testing.assert_allclose(y[:, 0] - 0.5, expected, atol=1e-14)
    np.testing.assert_array_equal(trace.thetas(), theta)


def test_example_single_transition_through_engine():
    # identity weights leave opinions untouched within the issue
    trace = run_issue_sequence(
        from_weights(np.eye(3)), [0.8, 0.5, 0.3], [0.3, 0.1, 0.9], StubbornnessPolicy("increasing", 1.0), 1
    )
    rec = trace.records[0]
    assert rec.mu == 0.3
    np.testing.assert_allclose(rec.delta, [0, 0.2, 0.6], atol=1e-12)
    np.testing.assert_allclose(trace.terminal_theta, [0.8, 0.6, 0.72], atol=1e-12)


def test_zero_issues_trace():
    trace = run_issue_sequence(complete_uniform(3), [0.2, 0.2, 0.2], [0.1, 0.5, 0.9], StubbornnessPolicy(), 0)
    assert trace.num_issues == 0
    assert trace.opinions().shape == (1, 3)
    np.testing.assert_allclose(trace.d_series(), [0.8])


def test_cognitive_freezing_and_boundedness():
    rng = np.random.default_rng(3)
    for policy in (StubbornnessPolicy("increasing", 0.7), StubbornnessPolicy("decreasing", -0.5, 1e-4)):
        g, theta, y0 = random_instance(rng)
        trace = run_issue_sequence(g, theta, y0, policy, 30)
        for prev, nxt in zip(trace.records, trace.records[1:]):
            assert np.array_equal(nxt.y_initial, prev.y_final)
        ys = trace.opinions()
        assert np.all((ys >= 0) & (ys <= 1))


def test_iterative_method_matches_closed():
    g, theta, y0 = random_instance(np.random.default_rng(5), n_max=6)
    a = run_issue_sequence(g, theta, y0, StubbornnessPolicy("increasing", 0.5), 10)
    b = run_issue_sequence(g, theta, y0, StubbornnessPolicy("increasing", 0.5), 10, method="iterative")
    np.testing.assert_allclose(a.opinions(), b.opinions(), atol=1e-8)


def test_one_stubborn_consensus_after_first_issue():
    trace = run_issue_sequence(
        complete_uniform(3), [0.9, 0, 0], [0.2, 0.7, 0.9], StubbornnessPolicy("increasing", 1.0), 3
    )
    assert consensus_reached(trace, 1e-3) == (True, 1)


def test_run_rejects_bad_input():
    with pytest.raises(ConfigError):
        run_issue_sequence(complete_uniform(2), [0.5, 0.5], [0.5, 1.5], StubbornnessPolicy(), 1)
    with pytest.raises(DimensionMismatch):
        run_issue_sequence(complete_uniform(2), [0.5], [0.5, 0.5], StubbornnessPolicy(), 1)
    with pytest.raises(SingularSystem):
        run_issue_sequence(complete_uniform(2), [0, 0], [0.2, 0.5], StubbornnessPolicy(), 1)


def test_trace_exports(tmp_path):
    trace = run_issue_sequence(
        complete_uniform(3), [0.2, 0.4, 0.1], [0.0, 0.5, 1.0], StubbornnessPolicy("increasing", 1.0), 4,
        metadata={"seed": 9},
    )
    trace.to_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["s", "y_1", "y_2", "y_3", "theta_1", "theta_2", "theta_3", "mu", "d"]
    assert len(rows) == 1 + 5
    assert float(rows[3][-1]) == trace.d_series()[2]
    assert float(rows[2][4]) == trace.thetas()[1][0]
    trace.to_json(tmp_path / "t.json")
    doc = json.loads((tmp_path / "t.json").read_text())
    assert doc["metadata"]["seed"] == 9
    assert len(doc["issues"]) == 4
    assert doc["issues"][1]["y_initial"] == doc["issues"][0]["y_final"]
    assert doc["terminal"]["theta"] == trace.terminal_theta.tolist()


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), issues=st.integers(1, 15), c=st.floats(0, 1))
def test_opinions_stay_in_unit_interval(seed, issues, c):
    g, theta, y0 = random_instance(np.random.default_rng(seed), n_max=8)
    trace = run_issue_sequence(g, theta, y0, StubbornnessPolicy("increasing", c), issues)
    ys = trace.opinions()
    assert np.all((ys >= 0) & (ys <= 1))
    assert np.all(np.diff(trace.d_series()) <= 1e-15)
