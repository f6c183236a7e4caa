"""Exact-Cover-by-3-Sets reduction: builds the hardness-gadget fair division
instance from an X3C instance, with its welfare threshold, canonical
allocations, and the witness lottery certifying a given exact cover.

Agents and bundles share one fixed ordering (base agents, then set agents
grouped by triple, then the element-agent triples), so the canonical
allocation is the identity permutation and generated matrices are
reproducible byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .instance import Instance, Lottery, StructuralError, ZERO, ONE, rat_str, _load_json


class InvalidCoverError(ValueError):
    """The proposed triple selection is not an exact cover."""


@dataclass(frozen=True)
class X3cInstance:
    """Universe of r elements (1-based) and a family of 3-element triples."""

    r: int
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.r < 3 or self.r % 3 != 0:
            raise StructuralError(f"element count must be a positive multiple of 3, got {self.r}")
        if not self.triples:
            raise StructuralError("need at least one triple")
        frozen = []
        for idx, triple in enumerate(self.triples):
            items = tuple(sorted(triple))
            if len(items) != 3 or len(set(items)) != 3:
                raise StructuralError(f"triple {idx + 1} must have exactly 3 distinct elements")
            if any(not isinstance(e, int) or isinstance(e, bool) or not 1 <= e <= self.r
                   for e in items):
                raise StructuralError(f"triple {idx + 1} has elements outside 1..{self.r}")
            frozen.append(items)
        object.__setattr__(self, "triples", tuple(frozen))

    @property
    def t(self) -> int:
        return len(self.triples)

    def frequencies(self) -> list[int]:
        """f[i-1] = number of triples containing element i."""
        freq = [0] * self.r
        for triple in self.triples:
            for e in triple:
                freq[e - 1] += 1
        return freq

    def to_json_dict(self) -> dict:
        return {"r": self.r, "triples": [list(tr) for tr in self.triples]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "X3cInstance":
        try:
            return cls(r=data["r"], triples=tuple(tuple(tr) for tr in data["triples"]))
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"X3C JSON missing field: {exc}") from exc

    @classmethod
    def loads(cls, text: str) -> "X3cInstance":
        return cls.from_json_dict(_load_json(text))

    @classmethod
    def load(cls, path) -> "X3cInstance":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


@dataclass(frozen=True)
class ReductionOutput:
    instance: Instance
    epsilon: Fraction
    R: Fraction
    Q: Fraction
    K: Fraction
    agent_index: dict
    partition_index: dict  # (j, c) 1-based -> partition k 0-based
    warnings: tuple[str, ...]
    phi: X3cInstance

    def sidecar_dict(self) -> dict:
        return {
            "epsilon": rat_str(self.epsilon),
            "R": rat_str(self.R),
            "Q": rat_str(self.Q),
            "K": rat_str(self.K),
            "agent_index": dict(self.agent_index),
            "partition_index": {f"{j},{c}": k for (j, c), k in self.partition_index.items()},
        }


def is_exact_cover(phi: X3cInstance, cover) -> bool:
    """True iff the selected triples are pairwise disjoint and cover [r]."""
    counts = [0] * phi.r
    for j in cover:
        if not 1 <= j <= phi.t:
            return False
        for e in phi.triples[j - 1]:
            counts[e - 1] += 1
    return all(c == 1 for c in counts)


def _check_exact_cover(phi: X3cInstance, cover) -> None:
    counts = [0] * phi.r
    for j in cover:
        if not 1 <= j <= phi.t:
            raise InvalidCoverError(f"triple index {j} outside 1..{phi.t}")
        for e in phi.triples[j - 1]:
            counts[e - 1] += 1
    for e, c in enumerate(counts, start=1):
        if c == 0:
            raise InvalidCoverError(f"element {e} is uncovered")
        if c > 1:
            raise InvalidCoverError(f"element {e} is covered {c} times")


def generate(phi: X3cInstance) -> ReductionOutput:
    """Build the gadget instance: n = t+1+2t^2+3r agents, m = 3t partitions.

    The nonzero utilities follow the reduction's table exactly; everything
    else is zero.  Small t or oversized r only warn: tiny gadgets are still
    valuable for unit testing even though the soundness arguments assume
    t >= 9 and r <= 3t.
    """
    t, r = phi.t, phi.r
    freq = phi.frequencies()
    for e, f in enumerate(freq, start=1):
        if f == 0:
            raise StructuralError(
                f"element {e} appears in no triple; the instance is trivially "
                "unsatisfiable and the gadget utilities 1/f are undefined")
    warnings = []
    if t < 9:
        warnings.append(f"t={t} < 9: the reduction's correctness lemmas assume t >= 9")
    if r > 3 * t:
        warnings.append(f"r={r} > 3t={3 * t}: the reduction's correctness lemmas assume r <= 3t")

    eps = Fraction(1, 12 * t * t)
    R = 6 * t ** 3 / eps
    Q = 6 * t / eps
    K = R + R / t + Q + 6 + Fraction(r, t)
    n = t + 1 + 2 * t * t + 3 * r
    m = 3 * t

    agent_index: dict[str, int] = {}
    labels: list[str] = []
    for k in range(t + 1):
        agent_index[f"b_{k}"] = len(labels)
        labels.append(f"B_{k}")
    for j in range(1, t + 1):
        for ell in range(1, 2 * t + 1):
            agent_index[f"h_{j}_{ell}"] = len(labels)
            labels.append(f"H_{j}_{ell}")
    for i in range(1, r + 1):
        for prefix in ("v", "w", "z"):
            agent_index[f"{prefix}_{i}"] = len(labels)
            labels.append(f"{prefix.upper()}_{i}")
    assert len(labels) == n

    def b(k):
        return k

    def h(j, ell):
        return t + 1 + (j - 1) * 2 * t + (ell - 1)

    def v(i):
        return t + 1 + 2 * t * t + 3 * (i - 1)

    def w(i):
        return v(i) + 1

    def z(i):
        return v(i) + 2

    two = Fraction(2)
    two_thirds = Fraction(2, 3)
    partition_index: dict[tuple[int, int], int] = {}
    matrices = []
    for j in range(1, t + 1):
        triple = phi.triples[j - 1]
        for c in (1, 2, 3):
            partition_index[(j, c)] = len(matrices)
            mat = [[ZERO] * n for _ in range(n)]
            mat[b(0)][b(0)] = R / t
            mat[b(0)][b(j)] = R
            mat[b(j)][b(j)] = R
            for e in triple:
                f = freq[e - 1]
                mat[z(e)][z(e)] = Fraction(1, f)
            if c == 1:
                mat[h(j, 1)][h(j, 1)] = Q
                for e in triple:
                    mat[v(e)][v(e)] = two
                    mat[z(e)][v(e)] = two_thirds
            elif c == 2:
                mat[h(j, 2)][h(j, 2)] = Q
                for e in triple:
                    f = freq[e - 1]
                    mat[w(e)][w(e)] = two
                    mat[z(e)][w(e)] = (1 + Fraction(1, f)) / f
            else:
                mat[h(j, 1)][h(j, 1)] = Q * (1 - eps)
                mat[h(j, 2)][h(j, 2)] = Q * (1 - eps)
                for ell in range(3, t + 2):
                    mat[h(j, ell)][h(j, 1)] = eps
                for ell in range(t + 2, 2 * t + 1):
                    mat[h(j, ell)][h(j, 2)] = eps
                for e in triple:
                    f = freq[e - 1]
                    mat[v(e)][v(e)] = two
                    mat[w(e)][w(e)] = two
                    mat[z(e)][v(e)] = two_thirds
                    mat[z(e)][w(e)] = (1 + Fraction(1, f)) / f
            matrices.append(tuple(tuple(row) for row in mat))

    label_tuple = tuple(labels)
    inst = Instance(n=n, m=m, utilities=tuple(matrices),
                    bundle_labels=tuple(label_tuple for _ in range(m)))
    return ReductionOutput(instance=inst, epsilon=eps, R=R, Q=Q, K=K,
                           agent_index=agent_index, partition_index=partition_index,
                           warnings=tuple(warnings), phi=phi)


def canonical_allocation(out: ReductionOutput, j: int, c: int) -> tuple[int, ...]:
    """The namesake assignment for partition P_{j,c}; under the fixed agent
    and bundle ordering this is the identity permutation."""
    t = out.phi.t
    if not 1 <= j <= t:
        raise IndexError(f"j={j} outside 1..{t}")
    if not 1 <= c <= 3:
        raise IndexError(f"c={c} outside 1..3")
    return tuple(range(out.instance.n))


def witness_lottery(out: ReductionOutput, cover) -> Lottery:
    """The certificate lottery of an exact cover: probability 1/t on the
    canonical allocation of P_{j,1} for covering triples and of P_{j,2}
    otherwise; P_{j,3} never occurs."""
    phi = out.phi
    _check_exact_cover(phi, cover)
    cover_set = set(cover)
    t = phi.t
    n = out.instance.n
    share = Fraction(1, t)
    p = [ZERO] * out.instance.m
    for j in range(1, t + 1):
        c = 1 if j in cover_set else 2
        p[out.partition_index[(j, c)]] = share

    zero_row = (ZERO,) * n
    zero_mat = tuple(zero_row for _ in range(n))
    diag_rows = []
    for i in range(n):
        row = [ZERO] * n
        row[i] = share
        diag_rows.append(tuple(row))
    diag_mat = tuple(diag_rows)
    q = tuple(diag_mat if p[k] else zero_mat for k in range(out.instance.m))
    return Lottery(p=tuple(p), q=q)
