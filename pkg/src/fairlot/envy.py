"""Envy analysis: envy graph, the instance constants rho and epsilon, and
closed-form synthesis of weight vectors from an acyclic envy graph.

The weight synthesis realizes the conditional-constraint feasibility system
("whenever agent l envies agent h, require w_h <= rho * w_l") by exponential
separation along longest paths of the envy graph.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ratlp
from .instance import Instance, Lottery, ZERO, ONE, expected_utility_matrix


@dataclass(frozen=True)
class EnvyGraph:
    """Directed graph on agents; arc (l, h) means l strictly envies h."""

    n: int
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "arcs", frozenset(self.arcs))
        for l, h in self.arcs:
            if l == h or not (0 <= l < self.n and 0 <= h < self.n):
                raise ValueError(f"bad arc ({l}, {h}) for n={self.n}")

    def successors(self, node: int) -> list[int]:
        return sorted(h for (l, h) in self.arcs if l == node)


@dataclass(frozen=True)
class RhoEpsilon:
    """The instance constants: rho in (0, 1/2], epsilon = rho^n / n.

    J_size counts the cross-agent tuples entering the minimum (diagnostic).
    """

    rho: Fraction
    epsilon: Fraction
    J_size: int

    def __post_init__(self):
        if not (0 < self.rho <= Fraction(1, 2)):
            raise ValueError(f"rho must lie in (0, 1/2], got {self.rho}")


@dataclass(frozen=True)
class WeightVector:
    w: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(self.w))
        if sum(self.w, ZERO) != 1:
            raise ValueError("weights must sum to 1")

    def __iter__(self):
        return iter(self.w)

    def __getitem__(self, i: int) -> Fraction:
        return self.w[i]

    def in_simplex(self, epsilon: Fraction) -> bool:
        return all(wi >= epsilon for wi in self.w)


def compute_rho(inst: Instance) -> RhoEpsilon:
    """Exhaustively enumerate all m*n^4 utility-difference tuples.

    A tuple (k, l, h, a, b) with l != h counts when both agents strictly
    prefer bundle b over bundle a in partition k; rho is half the smallest
    difference ratio, or 1/2 when no tuple qualifies.  Allowing l == h would
    only add ratio-1 tuples and never changes the value.
    """
    n, m = inst.n, inst.m
    best = None
    count = 0
    for k in range(m):
        mat = inst.utilities[k]
        for l in range(n):
            row_l = mat[l]
            for h in range(n):
                if h == l:
                    continue
                row_h = mat[h]
                for a in range(n):
                    ula, uha = row_l[a], row_h[a]
                    for b in range(n):
                        ulb, uhb = row_l[b], row_h[b]
                        if ula < ulb and uha < uhb:
                            count += 1
                            denom = uhb - uha
                            assert denom > 0
                            ratio = (ulb - ula) / denom
                            if best is None or ratio < best:
                                best = ratio
    rho = Fraction(1, 2) if best is None else best / 2
    return RhoEpsilon(rho=rho, epsilon=rho ** n / n, J_size=count)


def envy_graph(inst: Instance, lot: Lottery) -> EnvyGraph:
    """Arc (l, h) whenever agent l's own expected utility is strictly below
    her expected utility for agent h's bundle."""
    U = expected_utility_matrix(inst, lot)
    arcs = set()
    for l in range(inst.n):
        own = U[l][l]
        for h in range(inst.n):
            if h != l and own < U[l][h]:
                arcs.add((l, h))
    return EnvyGraph(n=inst.n, arcs=frozenset(arcs))


def is_acyclic(g: EnvyGraph) -> tuple[bool, list[int] | None]:
    """Return (True, None) or (False, witness cycle as a node list).

    The witness certifies that shifting the lottery along the cycle would
    raise every member's utility, i.e. the lottery is not Pareto-optimal.
    """
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * g.n
    succ = {v: g.successors(v) for v in range(g.n)}
    for start in range(g.n):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(succ[start]))]
        color[start] = GRAY
        path = [start]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    cycle = path[path.index(nxt):]
                    return False, cycle
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return True, None


class CyclicEnvyError(ValueError):
    """Weight synthesis was asked for a cyclic envy graph (provably infeasible)."""

    def __init__(self, cycle: list[int]):
        super().__init__(f"envy graph has a cycle: {' -> '.join(map(str, cycle + cycle[:1]))}")
        self.cycle = cycle


def longest_path_depths(g: EnvyGraph) -> list[int]:
    """d[i] = length of the longest directed path ending at node i.

    An arc (l, h) then forces d[h] >= d[l] + 1, which is exactly what the
    weight formula needs; d[i] <= n - 1 on any DAG.
    """
    acyclic, cycle = is_acyclic(g)
    if not acyclic:
        raise CyclicEnvyError(cycle)
    preds: dict[int, list[int]] = {v: [] for v in range(g.n)}
    outdeg = [0] * g.n
    indeg = [0] * g.n
    for l, h in g.arcs:
        preds[h].append(l)
        outdeg[l] += 1
        indeg[h] += 1
    # Kahn order on the DAG, smallest node first for determinism
    from heapq import heapify, heappop, heappush
    ready = [v for v in range(g.n) if indeg[v] == 0]
    heapify(ready)
    remaining = indeg[:]
    succ = {v: g.successors(v) for v in range(g.n)}
    depth = [0] * g.n
    while ready:
        v = heappop(ready)
        if preds[v]:
            depth[v] = max(depth[u] + 1 for u in preds[v])
        for nxt in succ[v]:
            remaining[nxt] -= 1
            if remaining[nxt] == 0:
                heappush(ready, nxt)
    return depth


def synthesize_weights(g: EnvyGraph, re: RhoEpsilon) -> WeightVector:
    """Closed-form solution of the conditional weight system for a DAG.

    With d the longest-path depths, w_i = rho^{d_i} / sum_j rho^{d_j}
    satisfies sum w = 1, w_i >= rho^n / n, and w_h <= rho * w_l on every
    arc (l, h).  Cyclic graphs raise CyclicEnvyError with a witness.
    """
    depth = longest_path_depths(g)
    rho = re.rho
    powers = [rho ** d for d in depth]
    total = sum(powers, ZERO)
    return WeightVector(w=tuple(x / total for x in powers))


def weights_satisfy_envy_conditions(g: EnvyGraph, re: RhoEpsilon, w) -> bool:
    """Check w against the conditional system induced by g's arcs plus
    membership in the epsilon-floored simplex."""
    weights = tuple(w)
    if sum(weights, ZERO) != 1 or any(wi < re.epsilon for wi in weights):
        return False
    return all(weights[h] <= re.rho * weights[l] for (l, h) in g.arcs)


def weight_program(inst: Instance, lot: Lottery, re: RhoEpsilon):
    """Build the weight feasibility system for a concrete lottery.

    Returns (plain LP, conditionals) ready for
    :func:`fairlot.ratlp.solve_conditional_feasibility`: the plain part is
    the epsilon-floored simplex, and each ordered agent pair contributes a
    conditional constraint guarded by its exact envy amount.
    """
    lp = ratlp.LinearProgram(sense="feasibility")
    for i in range(inst.n):
        lp.add_variable(("w", i), lower=re.epsilon)
    lp.add_constraint({("w", i): ONE for i in range(inst.n)}, "=", ONE)
    U = expected_utility_matrix(inst, lot)
    conditionals = []
    for l in range(inst.n):
        for h in range(inst.n):
            if h == l:
                continue
            guard = U[l][h] - U[l][l]
            conditionals.append((guard, {("w", h): ONE, ("w", l): -re.rho}, "<=", ZERO))
    return lp, conditionals


def solve_weight_program(inst: Instance, lot: Lottery, re: RhoEpsilon) -> ratlp.LPOutcome:
    lp, conditionals = weight_program(inst, lot, re)
    return ratlp.solve_conditional_feasibility(lp, conditionals)
