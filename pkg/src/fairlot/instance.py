"""Core data model: fair division instances and allocation lotteries.

All scalar values are exact rationals (``fractions.Fraction``); nothing in the
core math ever rounds.  An instance holds, for each of its m admissible
partitions, an n-by-n matrix of bundle utilities.  A lottery is represented
compactly by partition probabilities ``p`` and per-partition assignment
masses ``q`` whose slices are bistochastic after scaling by ``p``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

# The sole scalar type of the core math.  Fraction already guarantees the
# reduced-form / positive-denominator invariants, so equality is structural.
Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class StructuralError(ValueError):
    """Shape or schema problem: the object cannot be checked against constraints."""


_RAT_PATTERN = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def rat(value) -> Fraction:
    """Parse an exact rational from an int, Fraction, or string "a" / "a/b".

    Floats and decimal strings are rejected: core objects carry no
    approximate values on the wire.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise StructuralError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RAT_PATTERN.match(value):
            raise StructuralError(f"not an exact rational string: {value!r}")
        return Fraction(value)
    raise StructuralError(f"not a rational: {value!r} (floats are rejected)")


def rat_str(x: Fraction) -> str:
    """Canonical wire form: "a" for integers, "a/b" otherwise."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _freeze_matrix(rows, n: int, what: str) -> tuple[tuple[Fraction, ...], ...]:
    if len(rows) != n:
        raise StructuralError(f"{what}: expected {n} rows, got {len(rows)}")
    out = []
    for row in rows:
        if len(row) != n:
            raise StructuralError(f"{what}: expected {n} columns, got {len(row)}")
        out.append(tuple(rat(v) for v in row))
    return tuple(out)


@dataclass(frozen=True)
class Instance:
    """A fair division instance: n agents, m partitions, per-partition utilities.

    ``utilities[k][i][j]`` is agent i's utility for bundle j of partition k.
    Items and bundle contents are intentionally not modeled; optional
    ``bundle_labels`` keep outputs presentable.  Immutable after construction.
    """

    n: int
    m: int
    utilities: tuple[tuple[tuple[Fraction, ...], ...], ...]
    bundle_labels: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise StructuralError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if len(self.utilities) != self.m:
            raise StructuralError(f"expected {self.m} utility matrices, got {len(self.utilities)}")
        frozen = tuple(_freeze_matrix(mat, self.n, f"utilities[{k}]")
                       for k, mat in enumerate(self.utilities))
        object.__setattr__(self, "utilities", frozen)
        if self.bundle_labels is not None:
            labels = tuple(tuple(str(s) for s in part) for part in self.bundle_labels)
            if len(labels) != self.m or any(len(part) != self.n for part in labels):
                raise StructuralError("bundle_labels must be m lists of n strings")
            object.__setattr__(self, "bundle_labels", labels)

    def to_json_dict(self) -> dict:
        parts = []
        for k in range(self.m):
            entry = {"utilities": [[rat_str(v) for v in row] for row in self.utilities[k]]}
            if self.bundle_labels is not None:
                entry["labels"] = list(self.bundle_labels[k])
            parts.append(entry)
        return {"n": self.n, "partitions": parts}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Instance":
        try:
            n = data["n"]
            parts = data["partitions"]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"instance JSON missing field: {exc}") from exc
        if not isinstance(n, int) or isinstance(n, bool):
            raise StructuralError("instance field 'n' must be an integer")
        if not isinstance(parts, list) or not parts:
            raise StructuralError("instance field 'partitions' must be a nonempty list")
        utilities = []
        labels = []
        have_labels = False
        for k, entry in enumerate(parts):
            if "utilities" not in entry:
                raise StructuralError(f"partition {k}: missing 'utilities'")
            utilities.append(entry["utilities"])
            if "labels" in entry:
                have_labels = True
                labels.append(entry["labels"])
            else:
                labels.append(None)
        if have_labels and any(lab is None for lab in labels):
            raise StructuralError("either all partitions carry labels or none do")
        return cls(n=n, m=len(parts), utilities=tuple(utilities),
                   bundle_labels=tuple(labels) if have_labels else None)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Instance":
        return cls.from_json_dict(_load_json(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


@dataclass(frozen=True)
class Lottery:
    """An allocation lottery: partition probabilities p and masses q[k][i][j].

    Construction checks shape only; the polytope constraints are the business
    of :func:`validate_lottery`, so invalid candidates can be represented and
    then diagnosed.  Immutable after construction.
    """

    p: tuple[Fraction, ...]
    q: tuple[tuple[tuple[Fraction, ...], ...], ...]

    def __post_init__(self):
        if not self.p:
            raise StructuralError("lottery needs at least one partition")
        object.__setattr__(self, "p", tuple(rat(v) for v in self.p))
        if len(self.q) != len(self.p):
            raise StructuralError(f"expected {len(self.p)} q-matrices, got {len(self.q)}")
        n = len(self.q[0])
        frozen = tuple(_freeze_matrix(mat, n, f"q[{k}]") for k, mat in enumerate(self.q))
        object.__setattr__(self, "q", frozen)

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        return len(self.q[0])

    def to_json_dict(self) -> dict:
        return {
            "p": [rat_str(v) for v in self.p],
            "q": [[[rat_str(v) for v in row] for row in mat] for mat in self.q],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Lottery":
        try:
            return cls(p=tuple(data["p"]), q=tuple(data["q"]))
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"lottery JSON missing field: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Lottery":
        return cls.from_json_dict(_load_json(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Lottery":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _load_json(text: str):
    # parse_float rejection keeps approximate values off the wire entirely
    def _no_floats(s):
        raise StructuralError(f"float literal {s!r} not allowed in exact files")

    try:
        return json.loads(text, parse_float=_no_floats)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"invalid JSON: {exc}") from exc


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def lottery_constraint_violations(lot: Lottery) -> list[str]:
    """List every violated lottery-polytope constraint, with indices (1-based)."""
    violations = []
    n = lot.n
    for k, pk in enumerate(lot.p):
        if pk < 0:
            violations.append(f"p_{k + 1} = {rat_str(pk)} < 0")
    total = sum(lot.p, ZERO)
    if total != 1:
        violations.append(f"sum of p = {rat_str(total)} != 1")
    for k in range(lot.m):
        mat = lot.q[k]
        pk = lot.p[k]
        col_sums = [ZERO] * n
        for i in range(n):
            row_sum = ZERO
            row = mat[i]
            for j in range(n):
                v = row[j]
                if v:
                    if v < 0:
                        violations.append(f"q[{k + 1}][{i + 1}][{j + 1}] = {rat_str(v)} < 0")
                    row_sum += v
                    col_sums[j] += v
            if row_sum != pk:
                violations.append(
                    f"row {i + 1} of partition {k + 1} sums to {rat_str(row_sum)}"
                    f" != p_{k + 1} = {rat_str(pk)}")
        for j in range(n):
            if col_sums[j] != pk:
                violations.append(
                    f"column {j + 1} of partition {k + 1} sums to {rat_str(col_sums[j])}"
                    f" != p_{k + 1} = {rat_str(pk)}")
    return violations


def check_dimensions(inst: Instance, lot: Lottery) -> None:
    """Raise StructuralError unless lot has inst's shape (m partitions, n x n)."""
    if lot.m != inst.m or lot.n != inst.n:
        raise StructuralError(
            f"lottery shape (m={lot.m}, n={lot.n}) does not match "
            f"instance (m={inst.m}, n={inst.n})")


def validate_lottery(inst: Instance, lot: Lottery) -> ValidationResult:
    """Check the four lottery-polytope constraints exactly.

    Dimension mismatch raises StructuralError; constraint violations are
    enumerated in the result rather than raised.
    """
    check_dimensions(inst, lot)
    violations = lottery_constraint_violations(lot)
    return ValidationResult(ok=not violations, violations=tuple(violations))


def expected_utility(inst: Instance, lot: Lottery, i: int, i_prime: int) -> Fraction:
    """Expected utility of agent i for the random bundle of agent i_prime.

    Agents are 0-based.  This is the sum over partitions k and bundles j of
    utilities[k][i][j] * q[k][i_prime][j].
    """
    check_dimensions(inst, lot)
    if not (0 <= i < inst.n and 0 <= i_prime < inst.n):
        raise IndexError(f"agent index out of range: ({i}, {i_prime}) for n={inst.n}")
    total = ZERO
    for k in range(inst.m):
        urow = inst.utilities[k][i]
        qrow = lot.q[k][i_prime]
        for j in range(inst.n):
            u = urow[j]
            if u:
                v = qrow[j]
                if v:
                    total += u * v
    return total


def expected_utility_matrix(inst: Instance, lot: Lottery) -> list[list[Fraction]]:
    """All-pairs expected utilities U[i][i'] in one sparse-aware pass.

    Zero entries are skipped on both sides, so instances whose utility
    matrices are mostly zero (e.g. hardness-reduction instances with
    n in the hundreds) stay fast.
    """
    check_dimensions(inst, lot)
    n = inst.n
    U = [[ZERO] * n for _ in range(n)]
    for k in range(inst.m):
        mat = lot.q[k]
        # bundle j -> [(holder i', mass)] over nonzero masses
        holders: list[list] = [[] for _ in range(n)]
        for ip in range(n):
            row = mat[ip]
            for j in range(n):
                v = row[j]
                if v:
                    holders[j].append((ip, v))
        uk = inst.utilities[k]
        for i in range(n):
            urow = uk[i]
            Ui = U[i]
            for j in range(n):
                u = urow[j]
                if u:
                    for ip, v in holders[j]:
                        Ui[ip] += u * v
    return U


def social_welfare(inst: Instance, lot: Lottery) -> Fraction:
    """Sum of all agents' own expected utilities."""
    check_dimensions(inst, lot)
    total = ZERO
    for i in range(inst.n):
        total += expected_utility(inst, lot, i, i)
    return total


def mix_lotteries(weighted: list[tuple[Fraction, Lottery]]) -> Lottery:
    """Convex combination of lotteries, coordinatewise on (p, q).

    Weights must be nonnegative rationals summing to 1; the result is again
    a point of the lottery polytope.
    """
    if not weighted:
        raise StructuralError("need at least one lottery to mix")
    weights = [rat(lam) for lam, _ in weighted]
    if any(lam < 0 for lam in weights) or sum(weights, ZERO) != 1:
        raise StructuralError("mixture weights must be nonnegative and sum to 1")
    first = weighted[0][1]
    m, n = first.m, first.n
    for _, lot in weighted[1:]:
        if lot.m != m or lot.n != n:
            raise StructuralError("cannot mix lotteries of different shapes")
    p = [ZERO] * m
    q = [[[ZERO] * n for _ in range(n)] for _ in range(m)]
    for lam, lot in weighted:
        if not lam:
            continue
        for k in range(m):
            p[k] += lam * lot.p[k]
            mat = lot.q[k]
            out = q[k]
            for i in range(n):
                row = mat[i]
                orow = out[i]
                for j in range(n):
                    v = row[j]
                    if v:
                        orow[j] += lam * v
    return Lottery(p=tuple(p), q=tuple(tuple(tuple(row) for row in mat) for mat in q))
