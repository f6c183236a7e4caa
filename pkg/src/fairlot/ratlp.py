"""Exact rational linear programming.

A two-phase primal simplex over ``fractions.Fraction`` with Bland's pivoting
rule: termination is guaranteed under degeneracy and identical programs give
identical outcomes.  Optimal solutions are basic feasible solutions, i.e.
vertices of the feasible region.  No floating point anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import ZERO, ONE, rat, rat_str

SENSES = ("max", "min", "feasibility")
RELATIONS = ("<=", "=", ">=")


class LinearProgram:
    """A named-variable LP: sparse objective, constraints, per-variable bounds."""

    def __init__(self, sense: str = "feasibility"):
        if sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        self.sense = sense
        self.variables: list = []
        self._var_index: dict = {}
        self.bounds: dict = {}
        self.objective: dict = {}
        self.constraints: list[tuple[dict, str, Fraction]] = []

    def add_variable(self, name, lower=None, upper=None):
        if name in self._var_index:
            raise ValueError(f"variable declared twice: {name!r}")
        self._var_index[name] = len(self.variables)
        self.variables.append(name)
        lo = None if lower is None else rat(lower)
        hi = None if upper is None else rat(upper)
        self.bounds[name] = (lo, hi)
        return name

    def set_objective(self, coeffs: dict) -> None:
        if self.sense == "feasibility":
            raise ValueError("feasibility-only programs carry a zero objective")
        self._check_names(coeffs)
        self.objective = {name: rat(c) for name, c in coeffs.items() if rat(c)}

    def add_constraint(self, coeffs: dict, relation: str, rhs) -> None:
        if relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        self._check_names(coeffs)
        row = {name: rat(c) for name, c in coeffs.items() if rat(c)}
        self.constraints.append((row, relation, rat(rhs)))

    def _check_names(self, coeffs: dict) -> None:
        for name in coeffs:
            if name not in self._var_index:
                raise ValueError(f"undeclared variable: {name!r}")

    def copy(self) -> "LinearProgram":
        clone = LinearProgram.__new__(LinearProgram)
        clone.sense = self.sense
        clone.variables = list(self.variables)
        clone._var_index = dict(self._var_index)
        clone.bounds = dict(self.bounds)
        clone.objective = dict(self.objective)
        clone.constraints = list(self.constraints)
        return clone

    def to_text(self) -> str:
        """Human-readable dump, for debugging."""
        def term(coeffs):
            parts = []
            for name in sorted(coeffs, key=str):
                c = coeffs[name]
                parts.append(f"{'+' if c >= 0 else '-'} {rat_str(abs(c))} {name}")
            return " ".join(parts) if parts else "0"

        lines = [f"{self.sense}: {term(self.objective)}", "subject to:"]
        for row, rel, rhs in self.constraints:
            lines.append(f"  {term(row)} {rel} {rat_str(rhs)}")
        lines.append("bounds:")
        for name in self.variables:
            lo, hi = self.bounds[name]
            lo_s = "-inf" if lo is None else rat_str(lo)
            hi_s = "+inf" if hi is None else rat_str(hi)
            lines.append(f"  {lo_s} <= {name} <= {hi_s}")
        return "\n".join(lines)


@dataclass(frozen=True)
class LPOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    solution: dict | None = None
    objective_value: Fraction | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def solve(lp: LinearProgram) -> LPOutcome:
    """Two-phase exact simplex with Bland's rule.

    Infeasible and unbounded are statuses, not errors.  For fixed input the
    pivot sequence, and hence the returned vertex, is fixed.
    """
    # --- standard-form columns ------------------------------------------
    # Each original variable becomes one or two nonnegative columns plus a
    # constant shift:  x = shift + sum(sign * column).
    col_of: dict = {}   # var name -> list of (col index, sign)
    shift: dict = {}    # var name -> Fraction
    ncols = 0
    bound_rows: list[tuple[dict, str, Fraction]] = []
    for name in lp.variables:
        lo, hi = lp.bounds[name]
        if lo is not None:
            col_of[name] = [(ncols, ONE)]
            shift[name] = lo
            ncols += 1
            if hi is not None:
                if hi < lo:
                    return LPOutcome(status="infeasible")
                bound_rows.append(({name: ONE}, "<=", hi))
        elif hi is not None:
            col_of[name] = [(ncols, -ONE)]
            shift[name] = hi
            ncols += 1
        else:
            # free variable: difference of two nonnegative columns
            col_of[name] = [(ncols, ONE), (ncols + 1, -ONE)]
            shift[name] = ZERO
            ncols += 2

    def expand(coeffs: dict, rhs: Fraction):
        dense = [ZERO] * ncols
        b = rhs
        for name, c in coeffs.items():
            b -= c * shift[name]
            for col, sign in col_of[name]:
                dense[col] += c * sign
        return dense, b

    rows = []
    for coeffs, rel, rhs in list(lp.constraints) + bound_rows:
        dense, b = expand(coeffs, rhs)
        if b < 0:
            dense = [-v for v in dense]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append((dense, rel, b))

    nstruct = ncols
    # slack / surplus columns
    for _dense, rel, _b in rows:
        if rel == "<=" or rel == ">=":
            ncols += 1
    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    art_cols: list[int] = []
    col = nstruct
    need_artificial = []
    for dense, rel, b in rows:
        row = list(dense)
        row.extend([ZERO] * (ncols - nstruct))
        if rel == "<=":
            row[col] = ONE
            basis.append(col)
            need_artificial.append(False)
            col += 1
        elif rel == ">=":
            row[col] = -ONE
            basis.append(-1)  # placeholder, artificial assigned below
            need_artificial.append(True)
            col += 1
        else:
            basis.append(-1)
            need_artificial.append(True)
        row.append(b)
        tableau.append(row)
    first_artificial = ncols
    for r, needed in enumerate(need_artificial):
        if needed:
            art_cols.append(ncols)
            basis[r] = ncols
            ncols += 1
    width = ncols + 1  # + rhs
    for r, row in enumerate(tableau):
        extra = [ZERO] * (width - len(row))
        if extra:
            row[-1:-1] = extra  # grow before the rhs entry
        # place the artificial 1
        if basis[r] >= first_artificial:
            row[basis[r]] = ONE

    # --- cost rows -------------------------------------------------------
    # Internally we always minimize; reduced-cost rows are maintained through
    # every pivot, phase-2's included during phase 1.
    phase2 = [ZERO] * width
    if lp.sense != "feasibility":
        flip = -ONE if lp.sense == "max" else ONE
        for name, c in lp.objective.items():
            for colx, sign in col_of[name]:
                phase2[colx] += flip * c * sign
            phase2[-1] -= flip * c * shift[name]  # constant term tracked in rhs slot
    phase1 = [ZERO] * width
    for c in art_cols:
        phase1[c] = ONE
    for r, row in enumerate(tableau):
        if basis[r] >= first_artificial:
            for j in range(width):
                if row[j]:
                    phase1[j] -= row[j]

    active = list(range(len(tableau)))

    def pivot(r: int, c: int) -> None:
        row = tableau[r]
        piv = row[c]
        if piv != 1:
            inv = ONE / piv
            tableau[r] = row = [v * inv for v in row]
        for rr in active:
            if rr != r:
                other = tableau[rr]
                f = other[c]
                if f:
                    tableau[rr] = [a - f * b for a, b in zip(other, row)]
        for cost in (phase1, phase2):
            f = cost[c]
            if f:
                cost[:] = [a - f * b for a, b in zip(cost, row)]
        basis[r] = c

    def run_phase(cost: list[Fraction], allowed: int) -> str:
        # Bland: entering = lowest-index negative reduced cost; leaving =
        # min ratio, ties by lowest basic column index.
        while True:
            enter = -1
            for j in range(allowed):
                if cost[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            leave = -1
            best = None
            for r in active:
                a = tableau[r][enter]
                if a > 0:
                    ratio = tableau[r][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                        best = ratio
                        leave = r
            if leave < 0:
                return "unbounded"
            pivot(leave, enter)

    # --- phase 1 ---------------------------------------------------------
    if art_cols:
        run_phase(phase1, ncols)
        if -phase1[-1] != 0:  # leftover infeasibility mass
            return LPOutcome(status="infeasible")
        # pivot lingering artificials out of the basis; all-zero rows are
        # redundant constraints and get dropped
        for r in list(active):
            if basis[r] >= first_artificial:
                row = tableau[r]
                enter = -1
                for j in range(first_artificial):
                    if row[j]:
                        enter = j
                        break
                if enter >= 0:
                    pivot(r, enter)
                else:
                    active.remove(r)

    # --- phase 2 ---------------------------------------------------------
    if lp.sense != "feasibility":
        status = run_phase(phase2, first_artificial)
        if status == "unbounded":
            return LPOutcome(status="unbounded")

    x_std = [ZERO] * ncols
    for r in active:
        x_std[basis[r]] = tableau[r][-1]
    solution = {}
    for name in lp.variables:
        val = shift[name]
        for colx, sign in col_of[name]:
            v = x_std[colx]
            if v:
                val += sign * v
        solution[name] = val
    if lp.sense == "feasibility":
        objective = ZERO
    else:
        objective = sum((c * solution[name] for name, c in lp.objective.items()), ZERO)
    return LPOutcome(status="optimal", solution=solution, objective_value=objective)


def solve_conditional_feasibility(
        plain: LinearProgram,
        conditional: list[tuple[Fraction, dict, str, Fraction]]) -> LPOutcome:
    """Solve the plain constraints plus exactly the active conditionals.

    A conditional constraint (guard, row, relation, rhs) is active iff
    guard > 0; guards are exact rationals evaluated by the caller.
    """
    lp = plain.copy()
    for guard, coeffs, relation, rhs in conditional:
        if rat(guard) > 0:
            lp.add_constraint(coeffs, relation, rhs)
    return solve(lp)


def check_solution(lp: LinearProgram, solution: dict) -> list[str]:
    """Exact re-substitution: list every constraint or bound the point violates."""
    problems = []
    for name in lp.variables:
        lo, hi = lp.bounds[name]
        val = solution[name]
        if lo is not None and val < lo:
            problems.append(f"{name} = {rat_str(val)} below lower bound {rat_str(lo)}")
        if hi is not None and val > hi:
            problems.append(f"{name} = {rat_str(val)} above upper bound {rat_str(hi)}")
    for idx, (coeffs, rel, rhs) in enumerate(lp.constraints):
        lhs = sum((c * solution[name] for name, c in coeffs.items()), ZERO)
        ok = lhs <= rhs if rel == "<=" else lhs >= rhs if rel == ">=" else lhs == rhs
        if not ok:
            problems.append(f"constraint {idx}: {rat_str(lhs)} {rel} {rat_str(rhs)} fails")
    return problems
