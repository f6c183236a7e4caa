"""Independent verification of envy-freeness, Pareto optimality, and welfare.

Envy-freeness is checked by exact summation.  Pareto optimality is decided
by a linear program maximizing the total excess utility a rival lottery
could hand out: the candidate is dominated iff that optimum is strictly
positive.  Verification is exact up to a size threshold; beyond it an
optional floating-point backend gives an honestly flagged approximate
verdict.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import polytope, ratlp
from .instance import (Instance, Lottery, StructuralError, ZERO, ONE, rat_str,
                       expected_utility, expected_utility_matrix, social_welfare,
                       validate_lottery)

# Above this many q-variables the exact simplex is no longer desk-scale and
# "auto" switches to the approximate backend.
EXACT_VARIABLE_LIMIT = 50_000
APPROX_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EnvyPair:
    envier: int
    envied: int
    own_utility: Fraction
    other_utility: Fraction


@dataclass(frozen=True)
class ParetoCertificate:
    """Outcome of the dominance LP.

    In exact mode, ``excess`` and ``dominating_lottery`` are present iff
    dominated, and the objective is an exact rational.  In approximate mode
    the objective and excess are floats and no exact dominating lottery is
    reconstructed; ``mode`` says which verdict you got.
    """

    dominated: bool
    objective: Fraction | float
    mode: str  # "exact" | "approx"
    excess: tuple | None = None
    dominating_lottery: Lottery | None = None


def _require_valid(inst: Instance, lot: Lottery) -> None:
    result = validate_lottery(inst, lot)
    if not result.ok:
        raise StructuralError("invalid lottery: " + "; ".join(result.violations))


def verify_ef(inst: Instance, lot: Lottery) -> tuple[bool, list[EnvyPair]]:
    """Exact envy-freeness check; violating pairs carry both expected utilities."""
    _require_valid(inst, lot)
    U = expected_utility_matrix(inst, lot)
    pairs = []
    for l in range(inst.n):
        own = U[l][l]
        for h in range(inst.n):
            if h != l and own < U[l][h]:
                pairs.append(EnvyPair(envier=l, envied=h,
                                      own_utility=own, other_utility=U[l][h]))
    return (not pairs), pairs


def _pareto_lp(inst: Instance, own: list[Fraction]) -> ratlp.LinearProgram:
    lp = ratlp.LinearProgram(sense="max")
    polytope.add_lottery_polytope(lp, inst.n, inst.m)
    for i in range(inst.n):
        lp.add_variable(("t", i), lower=ZERO)
    lp.set_objective({("t", i): ONE for i in range(inst.n)})
    for i in range(inst.n):
        coeffs = polytope.own_utility_coeffs(inst, i)
        coeffs[("t", i)] = -ONE
        lp.add_constraint(coeffs, ">=", own[i])
    return lp


def verify_pareto(inst: Instance, lot: Lottery, mode: str = "auto") -> ParetoCertificate:
    """Decide Pareto dominance of the candidate lottery.

    mode "exact" forces the rational simplex, "approx" the floating-point
    backend, "auto" picks by problem size.
    """
    if mode not in ("auto", "exact", "approx"):
        raise ValueError("mode must be 'auto', 'exact', or 'approx'")
    _require_valid(inst, lot)
    own = [expected_utility(inst, lot, i, i) for i in range(inst.n)]
    if mode == "auto":
        mode = "exact" if inst.m * inst.n * inst.n <= EXACT_VARIABLE_LIMIT else "approx"
    if mode == "approx":
        return _verify_pareto_approx(inst, own)

    outcome = ratlp.solve(_pareto_lp(inst, own))
    assert outcome.is_optimal, f"dominance LP must be optimal, got {outcome.status}"
    objective = outcome.objective_value
    if objective == 0:
        return ParetoCertificate(dominated=False, objective=ZERO, mode="exact")
    assert objective > 0
    excess = tuple(outcome.solution[("t", i)] for i in range(inst.n))
    better = polytope.lottery_from_solution(outcome.solution, inst.n, inst.m)
    return ParetoCertificate(dominated=True, objective=objective, mode="exact",
                             excess=excess, dominating_lottery=better)


def _verify_pareto_approx(inst: Instance, own: list[Fraction]) -> ParetoCertificate:
    """Floating-point dominance LP (scipy/HiGHS); verdict flagged approximate."""
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    n, m = inst.n, inst.m
    nq = m * n * n

    def qvar(k, i, j):
        return k * n * n + i * n + j

    def pvar(k):
        return nq + k

    def tvar(i):
        return nq + m + i

    nvars = nq + m + n
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    row = 0
    for k in range(m):
        for j in range(n):
            for i in range(n):
                eq_r.append(row); eq_c.append(qvar(k, i, j)); eq_v.append(1.0)
            eq_r.append(row); eq_c.append(pvar(k)); eq_v.append(-1.0)
            eq_b.append(0.0); row += 1
    for k in range(m):
        for i in range(n):
            for j in range(n):
                eq_r.append(row); eq_c.append(qvar(k, i, j)); eq_v.append(1.0)
            eq_r.append(row); eq_c.append(pvar(k)); eq_v.append(-1.0)
            eq_b.append(0.0); row += 1
    for k in range(m):
        eq_r.append(row); eq_c.append(pvar(k)); eq_v.append(1.0)
    eq_b.append(1.0); row += 1

    ub_r, ub_c, ub_v, ub_b = [], [], [], []
    for i in range(n):  # t_i - u_i(q~; i) <= -own_i
        for k in range(m):
            urow = inst.utilities[k][i]
            for j in range(n):
                u = urow[j]
                if u:
                    ub_r.append(i); ub_c.append(qvar(k, i, j)); ub_v.append(-float(u))
        ub_r.append(i); ub_c.append(tvar(i)); ub_v.append(1.0)
        ub_b.append(-float(own[i]))

    cost = [0.0] * nvars
    for i in range(n):
        cost[tvar(i)] = -1.0
    res = linprog(cost,
                  A_ub=csr_matrix((ub_v, (ub_r, ub_c)), shape=(n, nvars)), b_ub=ub_b,
                  A_eq=csr_matrix((eq_v, (eq_r, eq_c)), shape=(row, nvars)), b_eq=eq_b,
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"approximate dominance LP failed: {res.message}")
    objective = -res.fun
    dominated = objective > APPROX_TOLERANCE
    excess = tuple(float(res.x[tvar(i)]) for i in range(n)) if dominated else None
    return ParetoCertificate(dominated=dominated, objective=objective,
                             mode="approx", excess=excess)


def verify_threshold(inst: Instance, lot: Lottery, threshold,
                     mode: str = "auto") -> bool:
    """True iff the lottery is envy-free, undominated, and SW >= threshold."""
    ef, _ = verify_ef(inst, lot)
    if not ef:
        return False
    if verify_pareto(inst, lot, mode=mode).dominated:
        return False
    return social_welfare(inst, lot) >= threshold


def verification_report(inst: Instance, lot: Lottery, mode: str = "auto") -> dict:
    """Machine-readable report; agent indices are 1-based on the wire."""
    ef, pairs = verify_ef(inst, lot)
    cert = verify_pareto(inst, lot, mode=mode)
    return {
        "ef": ef,
        "envy_pairs": [
            {"envier": p.envier + 1, "envied": p.envied + 1,
             "own_utility": rat_str(p.own_utility),
             "other_utility": rat_str(p.other_utility)}
            for p in pairs
        ],
        "pareto": {
            "dominated": cert.dominated,
            "objective": rat_str(cert.objective) if cert.mode == "exact" else cert.objective,
            "mode": cert.mode,
        },
        "social_welfare": rat_str(social_welfare(inst, lot)),
    }
