import numpy as np
import pytest

from margin_forge.simplex import LpProblem, SimplexError, problem_to_text, residuals, solve

from lp_oracle import oracle_solve, random_lp


def test_single_variable_box():
    # maximize x s.t. x <= 1, x >= 0
    sol = solve(LpProblem([1.0], upper=[1.0]))
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective_value == pytest.approx(1.0, abs=1e-9)


def test_contradictory_bounds_infeasible():
    # x >= 2 and x <= 1
    sol = solve(LpProblem([1.0], ge_rows=[(np.array([1.0]), 2.0)], upper=[1.0]))
    assert sol.status == "infeasible"
    assert sol.x is None


def test_unbounded():
    sol = solve(LpProblem([1.0, 0.0], ge_rows=[(np.array([1.0, 1.0]), 1.0)]))
    assert sol.status == "unbounded"


def test_negative_rhs_rows():
    # -x1 - x2 >= -4 (i.e. x1 + x2 <= 4), maximize x1 + 2 x2
    sol = solve(LpProblem([1.0, 2.0], ge_rows=[(np.array([-1.0, -1.0]), -4.0)], upper=[3.0, 3.0]))
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(7.0, abs=1e-8)


def test_equality_constraint():
    # maximize x1 s.t. x1 + x2 = 1, x >= 0
    sol = solve(LpProblem([1.0, 0.0], eq_rows=[(np.array([1.0, 1.0]), 1.0)]))
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0, abs=1e-9)
    assert sol.x[1] == pytest.approx(0.0, abs=1e-9)


def test_simplex_constraint_stays_in_simplex():
    rng = np.random.default_rng(7)
    for _ in range(20):
        t = int(rng.integers(2, 6))
        c = rng.normal(size=t)
        sol = solve(LpProblem(c, eq_rows=[(np.ones(t), 1.0)]))
        assert sol.status == "optimal"
        assert np.all(sol.x >= -1e-9)
        assert sum(sol.x) == pytest.approx(1.0, abs=1e-9)
        assert sol.objective_value == pytest.approx(c.max(), abs=1e-8)


def test_redundant_equalities():
    # duplicated equality row must not break phase 1 cleanup
    row = (np.array([1.0, 1.0]), 1.0)
    sol = solve(LpProblem([1.0, 0.0], eq_rows=[row, row]))
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(1.0, abs=1e-9)


def test_matches_oracle_on_random_instances():
    rng = np.random.default_rng(31337)
    checked = {"optimal": 0, "infeasible": 0, "unbounded": 0}
    for _ in range(60):
        problem = random_lp(rng)
        want_status, want_value = oracle_solve(problem)
        sol = solve(problem)
        assert sol.status == want_status
        checked[want_status] += 1
        if want_status == "optimal":
            assert sol.objective_value == pytest.approx(want_value, abs=1e-6)
            res = residuals(problem, sol.x)
            assert res["ge"] <= 1e-7 and res["eq"] <= 1e-7
            assert res["lower"] <= 1e-9 and res["upper"] <= 1e-9
    # the generator must actually exercise all three statuses
    assert min(checked.values()) > 0


def test_deterministic_resolve():
    rng = np.random.default_rng(5)
    problem = random_lp(rng)
    first = solve(problem)
    second = solve(problem)
    assert first.status == second.status
    if first.status == "optimal":
        assert first.objective_value == second.objective_value
        assert np.array_equal(first.x, second.x)


def test_objective_consistent_with_x():
    rng = np.random.default_rng(11)
    for _ in range(25):
        problem = random_lp(rng)
        sol = solve(problem)
        if sol.status == "optimal":
            assert sol.objective_value == pytest.approx(float(problem.objective @ sol.x), abs=1e-9)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        LpProblem([np.nan])
    with pytest.raises(ValueError):
        LpProblem([1.0], ge_rows=[(np.array([np.inf]), 0.0)])


def test_rejects_bad_row_length():
    with pytest.raises(ValueError):
        LpProblem([1.0, 2.0], ge_rows=[(np.array([1.0]), 0.0)])


def test_problem_dump_roundtrips_fields():
    problem = LpProblem([1.0, -2.0], ge_rows=[(np.array([1.0, 1.0]), 0.5)],
                        eq_rows=[(np.array([1.0, 0.0]), 0.25)], upper=[1.0, 1.0])
    text = problem_to_text(problem)
    assert ">=" in text and "=" in text and "upper" in text
    assert "0.25" in text and "0.5" in text
