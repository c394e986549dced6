import numpy as np
import pytest

from bornchain import (
    IntensityState,
    absorption_probabilities,
    build_chain,
    enumerate_states,
    expected_steps,
    make_model,
    mean_nontrivial_steps,
    second_difference_check,
    solve_chain,
)
from bornchain import oracle
from bornchain.state import EnumerationGuardError

from conftest import WEIGHT_RULES, exact_two_component_hitting, model_for


def test_enumerate_examples():
    sp = enumerate_states(2, 2)
    assert sp.states.tolist() == [[2, 0], [1, 1], [0, 2]]
    assert sp.index[(1, 1)] == 1
    assert len(enumerate_states(3, 2)) == 6
    assert len(enumerate_states(1, 5)) == 1


def test_enumerate_guard():
    with pytest.raises(EnumerationGuardError) as info:
        enumerate_states(6, 60)
    assert info.value.count == 8259888


def test_chain_row_uniform_pair():
    sp = enumerate_states(2, 2)
    P = build_chain(make_model("uniform"), sp).toarray()
    np.testing.assert_allclose(P[1], [0.25, 0.5, 0.25], atol=1e-15)
    np.testing.assert_array_equal(P[0], [1, 0, 0])
    np.testing.assert_array_equal(P[2], [0, 0, 1])


@pytest.mark.parametrize("M,N", [(2, 10), (3, 8), (4, 5)])
def test_chain_rows_stochastic(model_name, M, N):
    sp = enumerate_states(M, N)
    P = build_chain(model_for(model_name, N), sp)
    np.testing.assert_allclose(np.asarray(P.sum(axis=1)).ravel(), 1, atol=1e-12)
    assert P.min() >= 0
    for s in sp.pure_states():
        assert P[s, s] == 1


@pytest.mark.parametrize("M,N", [(2, 6), (3, 5)])
def test_chain_preserves_mean_intensity(model_name, M, N):
    sp = enumerate_states(M, N)
    P = build_chain(model_for(model_name, N), sp)
    np.testing.assert_allclose(P @ sp.states, sp.states, atol=1e-12)


def test_absorption_examples():
    sp = enumerate_states(3, 6)
    sol = solve_chain(make_model("linear"), sp)
    np.testing.assert_allclose(sol.at((1, 2, 3))[0], [1 / 6, 2 / 6, 3 / 6], atol=1e-12)
    np.testing.assert_allclose(sol.at((0, 6, 0))[0], [0, 1, 0], atol=0)
    np.testing.assert_allclose(sol.absorb.sum(axis=1), 1, atol=1e-10)


def test_absorption_two_component_any_model(model_name):
    N = 12
    sp = enumerate_states(2, N)
    chain = build_chain(model_for(model_name, N), sp)
    absorb = absorption_probabilities(chain, sp)
    for a in range(N + 1):
        np.testing.assert_allclose(absorb[sp.index[(a, N - a)]], [a / N, 1 - a / N], atol=1e-12)


def test_expected_steps_examples():
    sp = enumerate_states(2, 10)
    chain = build_chain(make_model("uniform"), sp)
    s = sp.index[(3, 7)]
    assert expected_steps(chain, sp, count_nulls=True)[s] == pytest.approx(42, rel=1e-12)
    assert expected_steps(chain, sp, count_nulls=False)[s] == pytest.approx(21, rel=1e-12)
    sp4 = enumerate_states(2, 4)
    t = expected_steps(build_chain(make_model("linear"), sp4), sp4)
    assert t[sp4.index[(2, 2)]] == pytest.approx(28 / 3, rel=1e-12)
    assert t[sp4.index[(4, 0)]] == 0


@pytest.mark.parametrize("N", [2, 5, 10, 20])
def test_hitting_times_match_first_step_analysis(model_name, N):
    exact = exact_two_component_hitting(WEIGHT_RULES[model_name], N)
    sp = enumerate_states(2, N)
    t = solve_chain(model_for(model_name, N), sp).expected_total
    for a in range(N + 1):
        assert t[sp.index[(a, N - a)]] == pytest.approx(float(exact[a]), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("M,N", [(2, 9), (3, 7), (4, 4)])
def test_nontrivial_steps_are_pair_products(model_name, M, N):
    sp = enumerate_states(M, N)
    sol = solve_chain(model_for(model_name, N), sp)
    want = [mean_nontrivial_steps(IntensityState(tuple(s))) for s in sp.states.tolist()]
    np.testing.assert_allclose(sol.expected_nontrivial, want, rtol=1e-10, atol=1e-9)


def test_second_difference_examples():
    for name in ("uniform", "linear"):
        sp = enumerate_states(2, 10)
        sol = solve_chain(model_for(name, 10), sp)
        assert second_difference_check(sol.absorb) <= 1e-10
    sp = enumerate_states(2, 2)
    sol = solve_chain(make_model("uniform"), sp)
    assert sol.at((1, 1))[0][0] == pytest.approx(0.5)
    assert second_difference_check(sol.absorb) <= 1e-12
    assert second_difference_check(np.array([[1.0, 0.0], [0.0, 1.0]])) == 0


def test_second_difference_detects_curvature():
    P = np.array([1.0, 0.5, 0.0])  # rows (2,0),(1,1),(0,2); P(1) = 0.5 is linear
    assert second_difference_check(np.column_stack([P, 1 - P])) == pytest.approx(0)
    bent = np.array([1.0, 0.7, 0.0])
    assert second_difference_check(np.column_stack([bent, 1 - bent])) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        second_difference_check(np.ones((3, 3)))


def test_single_component_space():
    sp = enumerate_states(1, 5)
    sol = solve_chain(make_model("linear"), sp)
    assert sol.absorb.tolist() == [[1.0]]
    assert sol.expected_total.tolist() == [0.0]


def test_iterative_solver_agrees_with_direct(monkeypatch):
    sp = enumerate_states(3, 12)
    m = make_model("custom", lambda a: a * a, N=12)
    direct = solve_chain(m, sp)
    monkeypatch.setattr(oracle, "DIRECT_SOLVE_LIMIT", 10)
    iterative = solve_chain(m, sp)
    np.testing.assert_allclose(iterative.absorb, direct.absorb, atol=1e-9)
    np.testing.assert_allclose(iterative.expected_total, direct.expected_total, rtol=1e-9)
    np.testing.assert_allclose(iterative.expected_nontrivial, direct.expected_nontrivial, rtol=1e-9)


def test_solution_is_reproducible_bytewise():
    sp = enumerate_states(3, 6)
    a = solve_chain(make_model("uniform"), sp)
    b = solve_chain(make_model("uniform"), enumerate_states(3, 6))
    assert a.absorb.tobytes() == b.absorb.tobytes()
    assert a.expected_total.tobytes() == b.expected_total.tobytes()


def test_total_step_formula_is_inexact_beyond_two_components():
    # the half-sum of pooled completion times overestimates at M = 3
    from bornchain import mean_total_steps

    sp = enumerate_states(3, 9)
    sol = solve_chain(make_model("uniform"), sp)
    assert sol.at((3, 3, 3))[1] == pytest.approx(49.5, rel=1e-10)
    assert mean_total_steps(IntensityState.of(3, 3, 3), make_model("uniform")) == pytest.approx(54)
