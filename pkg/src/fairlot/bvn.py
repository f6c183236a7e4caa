"""Birkhoff-von Neumann decomposition of lotteries and seeded sampling.

Each partition slice q^k / p_k is doubly stochastic and is peeled greedily:
find the lexicographically smallest perfect matching on the nonzero support,
subtract the minimum entry along it, repeat.  Every peel zeroes at least one
entry while the residual stays on a strictly smaller face of the Birkhoff
polytope, so at most (n-1)^2 + 1 permutations appear per partition.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice

from .instance import (Lottery, StructuralError, ZERO, ONE, rat, rat_str,
                       lottery_constraint_violations)


@dataclass(frozen=True)
class BvnDecomposition:
    """Per partition k with p_k > 0, a convex combination of permutations
    reconstructing q^k; partitions with p_k = 0 carry no permutations.

    per_partition[k] is a tuple of (perm, alpha) where agent i receives
    bundle perm[i] (0-based)."""

    p: tuple[Fraction, ...]
    per_partition: tuple[tuple[tuple[tuple[int, ...], Fraction], ...], ...]

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        for entry in self.per_partition:
            if entry:
                return len(entry[0][0])
        return 0

    def to_json_dict(self) -> dict:
        return {
            "p": [rat_str(v) for v in self.p],
            "partitions": [
                [{"perm": [j + 1 for j in perm], "alpha": rat_str(a)} for perm, a in entry]
                for entry in self.per_partition
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BvnDecomposition":
        try:
            p = tuple(rat(v) for v in data["p"])
            parts = data["partitions"]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"decomposition JSON missing field: {exc}") from exc
        per_partition = tuple(
            tuple((tuple(j - 1 for j in item["perm"]), rat(item["alpha"])) for item in entry)
            for entry in parts)
        return cls(p=p, per_partition=per_partition)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "BvnDecomposition":
        from .instance import _load_json
        return cls.from_json_dict(_load_json(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BvnDecomposition":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _has_perfect_matching(adj: list[list[int]], rows: list[int], cols_free: set) -> bool:
    """Kuhn's augmenting paths on the support graph, deterministic order."""
    match_of_col: dict[int, int] = {}

    def try_row(i: int, visited: set) -> bool:
        for c in adj[i]:
            if c in cols_free and c not in visited:
                visited.add(c)
                if c not in match_of_col or try_row(match_of_col[c], visited):
                    match_of_col[c] = i
                    return True
        return False

    for i in rows:
        if not try_row(i, set()):
            return False
    return True


def _lex_min_matching(matrix: list[list[Fraction]], n: int) -> list[int]:
    """Lexicographically smallest perfect matching on the nonzero support."""
    adj = [[j for j in range(n) if matrix[i][j]] for i in range(n)]
    used: set[int] = set()
    perm: list[int] = []
    for i in range(n):
        rest = list(range(i + 1, n))
        chosen = -1
        for c in adj[i]:
            if c in used:
                continue
            if len(adj[i]) == 1 or not rest:
                chosen = c  # forced or final row
                break
            cols_free = {j for j in range(n) if j not in used and j != c}
            if _has_perfect_matching(adj, rest, cols_free):
                chosen = c
                break
        if chosen < 0:
            raise StructuralError(
                f"support of doubly stochastic slice has no perfect matching at row {i}")
        used.add(chosen)
        perm.append(chosen)
    return perm


def decompose(lot: Lottery) -> BvnDecomposition:
    """Exact decomposition of every partition slice with positive probability."""
    violations = lottery_constraint_violations(lot)
    if violations:
        raise StructuralError("invalid lottery: " + "; ".join(violations))
    n = lot.n
    per_partition = []
    for k in range(lot.m):
        pk = lot.p[k]
        if not pk:
            per_partition.append(())
            continue
        residual = [[v / pk for v in row] for row in lot.q[k]]
        pieces = []
        remaining = ONE
        while remaining:
            perm = _lex_min_matching(residual, n)
            alpha = min(residual[i][perm[i]] for i in range(n))
            for i in range(n):
                residual[i][perm[i]] -= alpha
            pieces.append((tuple(perm), alpha))
            remaining -= alpha
        assert all(not v for row in residual for v in row), "nonzero residual after peeling"
        per_partition.append(tuple(pieces))
    return BvnDecomposition(p=lot.p, per_partition=tuple(per_partition))


def reconstruct(dec: BvnDecomposition) -> Lottery:
    """Rebuild the lottery: q^k_{ij} = p_k * sum of alphas of perms sending i to j."""
    n = dec.n
    q = []
    for k in range(dec.m):
        mat = [[ZERO] * n for _ in range(n)]
        pk = dec.p[k]
        for perm, alpha in dec.per_partition[k]:
            mass = pk * alpha
            for i in range(n):
                mat[i][perm[i]] += mass
        q.append(tuple(tuple(row) for row in mat))
    return Lottery(p=dec.p, q=tuple(q))


def sample_stream(dec: BvnDecomposition, seed: int):
    """Infinite deterministic stream of (partition k, permutation) draws.

    k is drawn proportionally to p, then the permutation proportionally to
    its coefficient, using exact rational thresholds against dyadic uniforms.
    """
    rng = random.Random(seed)
    scale = 1 << 64

    def draw(weights):
        r = Fraction(rng.getrandbits(64), scale)
        acc = ZERO
        for idx, wgt in enumerate(weights):
            acc += wgt
            if r < acc:
                return idx
        return len(weights) - 1

    while True:
        k = draw(dec.p)
        pieces = dec.per_partition[k]
        which = draw([a for _, a in pieces])
        yield k, pieces[which][0]


def sample(dec: BvnDecomposition, seed: int) -> tuple[int, tuple[int, ...]]:
    """One seeded draw; identical seeds give identical draws."""
    return next(sample_stream(dec, seed))


def sample_many(dec: BvnDecomposition, seed: int, count: int) -> list:
    return list(islice(sample_stream(dec, seed), count))
