"""Computation of envy-free and Pareto-optimal lotteries.

Two routes:

* ``hull_solve`` — the constant-agent exact algorithm: enumerate the m * n!
  per-allocation utility profiles, enumerate supporting hyperplanes of their
  convex hull with strictly positive normals, and search each hyperplane for
  an envy-free lottery by linear programming.  Guaranteed to succeed.
* ``fixpoint_solve`` — iterate between the weighted-sum LP and closed-form
  reweighting from the envy graph.  Convergence is not guaranteed in general
  (no general-n algorithm is known); nonconvergence is a structured result.

``max_welfare_ef_po`` maximizes social welfare over all envy-free lotteries
lying on the enumerated Pareto faces.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product

from . import polytope, ratlp
from .envy import (EnvyGraph, RhoEpsilon, WeightVector, compute_rho, envy_graph,
                   synthesize_weights, weights_satisfy_envy_conditions)
from .instance import Instance, Lottery, ZERO, ONE

# m * n! profile enumeration stops being desk-scale quickly; reject above this.
PROFILE_CAP = 6


class CapExceededError(ValueError):
    """Hull route rejected because n exceeds the profile-enumeration cap."""


class InternalInconsistencyError(RuntimeError):
    """A face search that theory guarantees to succeed found nothing."""


@dataclass(frozen=True)
class UtilityProfile:
    """Utility vector of one deterministic allocation: agent i gets bundle
    assignment[i] of the given partition."""

    partition: int
    assignment: tuple[int, ...]
    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class ParetoFace:
    """A supporting hyperplane normal . x = offset with strictly positive,
    canonically scaled normal; support lists the profile indices on it."""

    normal: tuple[Fraction, ...]
    offset: Fraction
    support: tuple[int, ...]


@dataclass(frozen=True)
class SolveReport:
    lottery: Lottery
    method: str  # "hull" | "fixpoint"
    weights_used: tuple[Fraction, ...]
    iterations: int | None = None
    faces_examined: int | None = None

    @property
    def converged(self) -> bool:
        return True


@dataclass(frozen=True)
class NonconvergenceReport:
    """Fixpoint iteration gave no certificate within budget; the trace holds
    (weights, envy arcs) per iteration, plus how the loop ended."""

    iterations: int
    trace: tuple
    candidates_tested: int
    reason: str

    @property
    def converged(self) -> bool:
        return False


def weighted_sum_lp(inst: Instance, w) -> Lottery:
    """Optimal vertex of the weighted-sum-of-utilities LP.

    Weights must be strictly positive, which makes the result
    Pareto-optimal by the weighted sum method.
    """
    weights = tuple(w)
    if len(weights) != inst.n or any(wi <= 0 for wi in weights):
        raise ValueError("need one strictly positive weight per agent")
    lp = ratlp.LinearProgram(sense="max")
    polytope.add_lottery_polytope(lp, inst.n, inst.m)
    objective = {}
    for i, wi in enumerate(weights):
        for key, u in polytope.own_utility_coeffs(inst, i).items():
            objective[key] = wi * u
    lp.set_objective(objective)
    outcome = ratlp.solve(lp)
    # the polytope is nonempty and bounded, so anything else is an engine bug
    assert outcome.is_optimal, f"weighted-sum LP returned {outcome.status}"
    return polytope.lottery_from_solution(outcome.solution, inst.n, inst.m)


def _weights_from_depths(depths, rho: Fraction) -> WeightVector:
    powers = [rho ** d for d in depths]
    total = sum(powers, ZERO)
    return WeightVector(w=tuple(x / total for x in powers))


def fixpoint_solve(inst: Instance, max_iters: int = 100):
    """Search for a weight/lottery pair satisfying the fixed-point conditions.

    Iterates: solve the weighted-sum LP, read off the envy graph, stop if it
    is arc-free (envy-free and Pareto-optimal) or the current weights already
    satisfy the conditional weight system; otherwise resynthesize weights
    from the graph.  Revisiting earlier weights would loop forever (the
    engine is deterministic), so a repeat jumps straight to the fallback:
    exhaustive enumeration of depth-vector weights.  Returns a SolveReport
    or a NonconvergenceReport.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    re = compute_rho(inst)
    uniform = Fraction(1, inst.n)
    w = WeightVector(w=tuple(uniform for _ in range(inst.n)))
    trace = []
    tried: set[tuple] = set()
    iterations = 0
    reason = f"no certificate within {max_iters} iterations"
    for _ in range(max_iters):
        iterations += 1
        tried.add(w.w)
        lot = weighted_sum_lp(inst, w)
        graph = envy_graph(inst, lot)
        trace.append((w.w, tuple(sorted(graph.arcs))))
        if not graph.arcs:
            return SolveReport(lottery=lot, method="fixpoint", weights_used=w.w,
                               iterations=iterations)
        if weights_satisfy_envy_conditions(graph, re, w.w):
            # fixed-point conditions hold as stated; with an exact LP engine
            # this branch is unreachable when envy remains
            return SolveReport(lottery=lot, method="fixpoint", weights_used=w.w,
                               iterations=iterations)
        w = synthesize_weights(graph, re)
        if w.w in tried:
            reason = f"weight vector revisited after {iterations} iterations"
            break

    candidates = 0
    for depths in product(range(inst.n), repeat=inst.n):
        cand = _weights_from_depths(depths, re.rho)
        if cand.w in tried:
            continue
        tried.add(cand.w)
        candidates += 1
        lot = weighted_sum_lp(inst, cand)
        graph = envy_graph(inst, lot)
        if not graph.arcs or weights_satisfy_envy_conditions(graph, re, cand.w):
            return SolveReport(lottery=lot, method="fixpoint", weights_used=cand.w,
                               iterations=iterations)
    return NonconvergenceReport(iterations=iterations, trace=tuple(trace),
                                candidates_tested=candidates, reason=reason)


def enumerate_profiles(inst: Instance, cap: int = PROFILE_CAP) -> list[UtilityProfile]:
    """All m * n! per-allocation utility profiles, in (partition, permutation)
    lexicographic order.  Duplicate value vectors are retained."""
    if inst.n > cap:
        raise CapExceededError(
            f"n={inst.n} exceeds the profile cap {cap}; use the fixpoint method")
    profiles = []
    for k in range(inst.m):
        mat = inst.utilities[k]
        for perm in permutations(range(inst.n)):
            values = tuple(mat[i][perm[i]] for i in range(inst.n))
            profiles.append(UtilityProfile(partition=k, assignment=perm, values=values))
    return profiles


def _dot(w, v) -> Fraction:
    return sum((wi * vi for wi, vi in zip(w, v)), ZERO)


def _positive_ray(diffs: list[tuple[Fraction, ...]], n: int):
    """Null-space fast path for supports of exactly n points.

    diffs are the n-1 difference vectors; if their null space is a single
    line, return its strictly positive generator (or None if it has zero or
    mixed-sign coordinates).  Returns "degenerate" when the null space has
    higher dimension and the LP must decide.
    """
    rows = [list(d) for d in diffs]
    pivot_cols = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
        if r == len(rows):
            break
    if n - r != 1:
        return "degenerate"
    free_col = next(c for c in range(n) if c not in pivot_cols)
    g = [ZERO] * n
    g[free_col] = ONE
    for row_idx, c in enumerate(pivot_cols):
        g[c] = -rows[row_idx][free_col]
    if all(x > 0 for x in g):
        return tuple(g)
    if all(x < 0 for x in g):
        return tuple(-x for x in g)
    return None


def _support_normal(points: list[tuple], subset: tuple[int, ...], n: int):
    """Find a strictly positive w with w.v equal across the subset and
    w.v' <= that value for every other point; None if infeasible."""
    base = points[subset[0]]
    diffs = [tuple(points[s][c] - base[c] for c in range(n)) for s in subset[1:]]
    others = [idx for idx in range(len(points)) if idx not in subset]

    if len(subset) == n:
        ray = _positive_ray(diffs, n)
        if ray is None:
            return None
        if ray != "degenerate":
            w0 = _dot(ray, base)
            for idx in others:
                if _dot(ray, points[idx]) > w0:
                    return None
            return ray

    lp = ratlp.LinearProgram(sense="feasibility")
    for c in range(n):
        lp.add_variable(("w", c), lower=ONE)  # scale-free stand-in for w > 0
    for d in diffs:
        coeffs = {("w", c): d[c] for c in range(n) if d[c]}
        lp.add_constraint(coeffs, "=", ZERO)
    for idx in others:
        pt = points[idx]
        coeffs = {}
        for c in range(n):
            diff = pt[c] - base[c]
            if diff:
                coeffs[("w", c)] = diff
        if coeffs:
            lp.add_constraint(coeffs, "<=", ZERO)
    outcome = ratlp.solve(lp)
    if not outcome.is_optimal:
        return None
    return tuple(outcome.solution[("w", c)] for c in range(n))


def pareto_faces(profiles: list[UtilityProfile]) -> list[ParetoFace]:
    """Supporting hyperplanes with strictly positive normals covering every
    Pareto-optimal point of the profile polytope.

    Candidate supports are subsets of at most n points; each feasible subset
    contributes one hyperplane, found by an exact LP (or its null-space
    shortcut when the subset pins the normal to a line).  Hyperplanes are
    deduplicated after scaling the first normal coordinate to 1 and returned
    in lexicographic order.  Subsets containing a dominated point can never
    support a positive normal, so only undominated points are enumerated.
    """
    if not profiles:
        raise ValueError("need at least one profile")
    n = len(profiles[0].values)
    points: list[tuple] = []
    seen = set()
    for prof in profiles:
        if prof.values not in seen:
            seen.add(prof.values)
            points.append(prof.values)
    undominated = []
    for idx, v in enumerate(points):
        dominated = any(idx != jdx and all(o >= x for o, x in zip(other, v))
                        for jdx, other in enumerate(points))
        if not dominated:
            undominated.append(idx)

    found: dict[tuple, tuple] = {}
    for size in range(1, min(n, len(undominated)) + 1):
        for subset in combinations(undominated, size):
            w = _support_normal(points, subset, n)
            if w is None:
                continue
            scale = w[0]
            canon = tuple(x / scale for x in w)
            offset = _dot(canon, points[subset[0]])
            found.setdefault((canon, offset), (canon, offset))

    faces = []
    for canon, offset in sorted(found):
        support = tuple(idx for idx, prof in enumerate(profiles)
                        if _dot(canon, prof.values) == offset)
        faces.append(ParetoFace(normal=canon, offset=offset, support=support))
    return faces


def _face_lp(inst: Instance, face: ParetoFace, maximize_welfare: bool) -> ratlp.LinearProgram:
    lp = ratlp.LinearProgram(sense="max" if maximize_welfare else "feasibility")
    polytope.add_lottery_polytope(lp, inst.n, inst.m)
    for coeffs in polytope.envy_free_rows(inst):
        lp.add_constraint(coeffs, ">=", ZERO)
    plane = {}
    for i in range(inst.n):
        wi = face.normal[i]
        for key, u in polytope.own_utility_coeffs(inst, i).items():
            plane[key] = wi * u
    lp.add_constraint(plane, "=", face.offset)
    if maximize_welfare:
        welfare = {}
        for i in range(inst.n):
            for key, u in polytope.own_utility_coeffs(inst, i).items():
                welfare[key] = welfare.get(key, ZERO) + u
        lp.set_objective(welfare)
    return lp


def hull_solve(inst: Instance, cap: int = PROFILE_CAP) -> SolveReport:
    """Constant-agent exact algorithm: first Pareto face carrying an
    envy-free lottery wins.  Theory guarantees some face LP is feasible."""
    profiles = enumerate_profiles(inst, cap=cap)
    faces = pareto_faces(profiles)
    for count, face in enumerate(faces, start=1):
        outcome = ratlp.solve(_face_lp(inst, face, maximize_welfare=False))
        if outcome.is_optimal:
            lottery = polytope.lottery_from_solution(outcome.solution, inst.n, inst.m)
            return SolveReport(lottery=lottery, method="hull",
                               weights_used=face.normal, faces_examined=count)
    raise InternalInconsistencyError(
        "no Pareto face admitted an envy-free lottery; this contradicts the "
        "existence guarantee and indicates a bug")


def max_welfare_ef_po(inst: Instance, cap: int = PROFILE_CAP) -> tuple[Lottery, Fraction]:
    """Welfare-maximal envy-free Pareto-optimal lottery over all faces.

    Every envy-free+Pareto-optimal lottery lives on some enumerated face,
    and everything feasible for a face LP is envy-free and Pareto-optimal,
    so the best per-face optimum is the global optimum.
    """
    profiles = enumerate_profiles(inst, cap=cap)
    faces = pareto_faces(profiles)
    best: tuple[Lottery, Fraction] | None = None
    for face in faces:
        outcome = ratlp.solve(_face_lp(inst, face, maximize_welfare=True))
        if outcome.is_optimal and (best is None or outcome.objective_value > best[1]):
            lottery = polytope.lottery_from_solution(outcome.solution, inst.n, inst.m)
            best = (lottery, outcome.objective_value)
    if best is None:
        raise InternalInconsistencyError(
            "no Pareto face admitted an envy-free lottery; this contradicts the "
            "existence guarantee and indicates a bug")
    return best


def meets_welfare_threshold(inst: Instance, threshold, cap: int = PROFILE_CAP) -> bool:
    """Decision wrapper: does some envy-free Pareto-optimal lottery have
    social welfare at least the threshold?"""
    _, welfare = max_welfare_ef_po(inst, cap=cap)
    return welfare >= threshold
