import random
from fractions import Fraction

import pytest

from fairlot import ratlp
from fairlot.ratlp import LinearProgram, check_solution, solve, solve_conditional_feasibility


def test_bounded_maximization():
    lp = LinearProgram(sense="max")
    lp.add_variable("x", lower=0)
    lp.add_constraint({"x": 1}, "<=", 3)
    lp.set_objective({"x": 1})
    out = solve(lp)
    assert out.status == "optimal"
    assert out.solution["x"] == 3
    assert out.objective_value == 3


def test_unbounded():
    lp = LinearProgram(sense="max")
    lp.add_variable("x", lower=0)
    lp.set_objective({"x": 1})
    assert solve(lp).status == "unbounded"


def test_infeasible():
    lp = LinearProgram()
    lp.add_variable("x")
    lp.add_constraint({"x": 1}, "<=", 1)
    lp.add_constraint({"x": 1}, ">=", 2)
    assert solve(lp).status == "infeasible"


def test_conflicting_bounds_infeasible():
    lp = LinearProgram()
    lp.add_variable("x", lower=2, upper=1)
    assert solve(lp).status == "infeasible"


def test_free_variable_negative_optimum():
    lp = LinearProgram(sense="min")
    lp.add_variable("x")
    lp.add_constraint({"x": 1}, ">=", -5)
    lp.set_objective({"x": 1})
    out = solve(lp)
    assert out.status == "optimal"
    assert out.solution["x"] == -5


def test_feasibility_rejects_objective():
    lp = LinearProgram()
    lp.add_variable("x")
    with pytest.raises(ValueError):
        lp.set_objective({"x": 1})


def test_undeclared_variable_rejected():
    lp = LinearProgram()
    lp.add_variable("x")
    with pytest.raises(ValueError):
        lp.add_constraint({"y": 1}, "<=", 0)


def _weight_plain() -> LinearProgram:
    lp = LinearProgram()
    lp.add_variable("w1", lower=Fraction(1, 4))
    lp.add_variable("w2", lower=Fraction(1, 4))
    lp.add_constraint({"w1": 1, "w2": 1}, "=", 1)
    return lp


def test_conditional_active_guard():
    row = {"w2": 1, "w1": Fraction(-1, 2)}
    out = solve_conditional_feasibility(_weight_plain(), [(Fraction(1), row, "<=", 0)])
    assert out.status == "optimal"
    # the engine's deterministic pivot lands on the hand-derived vertex
    assert out.solution == {"w1": Fraction(2, 3), "w2": Fraction(1, 3)}
    assert out.solution["w2"] <= out.solution["w1"] / 2


def test_conditional_inactive_guard():
    row = {"w2": 1, "w1": Fraction(-1, 2)}
    out = solve_conditional_feasibility(_weight_plain(), [(Fraction(-1), row, "<=", 0)])
    assert out.status == "optimal"
    assert out.solution["w1"] + out.solution["w2"] == 1
    assert min(out.solution.values()) >= Fraction(1, 4)


def test_conditional_cyclic_envy_infeasible():
    conditionals = [
        (Fraction(1), {"w2": 1, "w1": Fraction(-1, 2)}, "<=", 0),
        (Fraction(1), {"w1": 1, "w2": Fraction(-1, 2)}, "<=", 0),
    ]
    assert solve_conditional_feasibility(_weight_plain(), conditionals).status == "infeasible"


def _random_program(rng: random.Random) -> LinearProgram:
    nvars = rng.randint(1, 4)
    lp = LinearProgram(sense=rng.choice(("max", "min")))
    for v in range(nvars):
        lower = rng.choice((None, 0, -2))
        upper = rng.choice((None, 5)) if lower is not None else 5
        lp.add_variable(f"x{v}", lower=lower, upper=upper)
    for _ in range(rng.randint(1, 5)):
        coeffs = {f"x{v}": Fraction(rng.randint(-3, 3)) for v in range(nvars)}
        lp.add_constraint(coeffs, rng.choice(("<=", ">=", "=")), Fraction(rng.randint(-4, 4)))
    lp.set_objective({f"x{v}": Fraction(rng.randint(-3, 3)) for v in range(nvars)})
    return lp


def test_resubstitution_on_random_programs():
    rng = random.Random(31)
    optimal = 0
    for _ in range(300):
        lp = _random_program(rng)
        out = solve(lp)
        if out.status == "optimal":
            optimal += 1
            assert check_solution(lp, out.solution) == []
    assert optimal > 50  # the generator must actually exercise the solver


def test_determinism():
    rng = random.Random(32)
    for _ in range(50):
        seed = rng.randint(0, 10 ** 9)
        a = solve(_random_program(random.Random(seed)))
        b = solve(_random_program(random.Random(seed)))
        assert a == b


def test_duality_spot_check():
    # primal: max c.x s.t. Ax <= b, x >= 0 with b >= 0 (so always feasible);
    # dual:   min b.y s.t. A^T y >= c, y >= 0
    rng = random.Random(33)
    checked = 0
    for _ in range(120):
        nvars = rng.randint(1, 3)
        nrows = rng.randint(1, 3)
        A = [[Fraction(rng.randint(-2, 3)) for _ in range(nvars)] for _ in range(nrows)]
        b = [Fraction(rng.randint(0, 5)) for _ in range(nrows)]
        c = [Fraction(rng.randint(-2, 3)) for _ in range(nvars)]

        primal = LinearProgram(sense="max")
        for v in range(nvars):
            primal.add_variable(v, lower=0)
        for r in range(nrows):
            primal.add_constraint({v: A[r][v] for v in range(nvars)}, "<=", b[r])
        primal.set_objective({v: c[v] for v in range(nvars)})

        dual = LinearProgram(sense="min")
        for r in range(nrows):
            dual.add_variable(r, lower=0)
        for v in range(nvars):
            dual.add_constraint({r: A[r][v] for r in range(nrows)}, ">=", c[v])
        dual.set_objective({r: b[r] for r in range(nrows)})

        p_out, d_out = solve(primal), solve(dual)
        if p_out.status == "optimal":
            assert d_out.status == "optimal"
            assert p_out.objective_value == d_out.objective_value
            checked += 1
        else:
            assert p_out.status == "unbounded"
            assert d_out.status == "infeasible"
    assert checked > 40


def test_to_text_mentions_everything():
    lp = _weight_plain()
    text = lp.to_text()
    assert "w1" in text and "<=" not in text.split("subject to:")[0]
    assert "1/4" in text
