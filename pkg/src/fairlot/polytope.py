"""LP building blocks for the lottery polytope.

Shared by the solver and the verifier: variable layout, the bistochastic
slice constraints, envy-freeness rows, and utility coefficient maps.
Variables are named with tuples ("p", k) and ("q", k, i, j).
"""
from __future__ import annotations

from .instance import Instance, Lottery, ZERO, ONE
from .ratlp import LinearProgram


def add_lottery_polytope(lp: LinearProgram, n: int, m: int) -> None:
    """Declare (p, q) variables and the defining constraints of the polytope."""
    for k in range(m):
        lp.add_variable(("p", k), lower=ZERO)
    for k in range(m):
        for i in range(n):
            for j in range(n):
                lp.add_variable(("q", k, i, j), lower=ZERO)
    for k in range(m):
        for j in range(n):  # every bundle is assigned to one agent
            row = {("q", k, i, j): ONE for i in range(n)}
            row[("p", k)] = -ONE
            lp.add_constraint(row, "=", ZERO)
    for k in range(m):
        for i in range(n):  # every agent receives one bundle
            row = {("q", k, i, j): ONE for j in range(n)}
            row[("p", k)] = -ONE
            lp.add_constraint(row, "=", ZERO)
    lp.add_constraint({("p", k): ONE for k in range(m)}, "=", ONE)


def lottery_from_solution(solution: dict, n: int, m: int) -> Lottery:
    p = tuple(solution[("p", k)] for k in range(m))
    q = tuple(tuple(tuple(solution[("q", k, i, j)] for j in range(n)) for i in range(n))
              for k in range(m))
    return Lottery(p=p, q=q)


def own_utility_coeffs(inst: Instance, i: int) -> dict:
    """Sparse coefficients of u_i(q; i) over the q variables."""
    coeffs = {}
    for k in range(inst.m):
        row = inst.utilities[k][i]
        for j in range(inst.n):
            u = row[j]
            if u:
                coeffs[("q", k, i, j)] = u
    return coeffs


def envy_free_rows(inst: Instance) -> list[dict]:
    """One row per ordered agent pair (i, i'): u_i(q; i) - u_i(q; i') >= 0."""
    rows = []
    for i in range(inst.n):
        for ip in range(inst.n):
            if ip == i:
                continue
            coeffs = {}
            for k in range(inst.m):
                urow = inst.utilities[k][i]
                for j in range(inst.n):
                    u = urow[j]
                    if u:
                        coeffs[("q", k, i, j)] = coeffs.get(("q", k, i, j), ZERO) + u
                        coeffs[("q", k, ip, j)] = coeffs.get(("q", k, ip, j), ZERO) - u
            rows.append(coeffs)
    return rows
