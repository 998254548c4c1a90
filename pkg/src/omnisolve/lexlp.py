"""Exact-rational lexicographic minimisation of per-round sum-rates.

The per-round programs are covering LPs: minimise the round's sum-rate over
all cut-set rows, with earlier rounds' optima pinned by equality rows. All
arithmetic is exact (gmpy2.mpq inside the solver, fractions.Fraction at the
API), because optimal rates are fractional and tolerance comparisons would
poison the lexicographic pinning.

``simplex_min`` solves the given program by running the primal simplex with
Bland's (smallest-index) anti-cycling rule on the program's dual, which is
in canonical form with an immediately feasible slack basis; the optimal
primal vertex is read off the dual's reduced costs. This avoids a phase-1
search entirely. The dual view requires nonnegative objective coefficients,
which every sum-rate objective satisfies.

``vertex_oracle`` is an independent check: it enumerates all basic
solutions of the primal directly (every maximal-rank choice of tight rows,
including variable-at-zero bounds) and returns the best feasible one. It
shares no pivoting code with ``simplex_min``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from gmpy2 import mpq

from .constraints import ConstraintSet
from .instance import RateMatrix

__all__ = [
    "Infeasible",
    "Unbounded",
    "TooLarge",
    "LinearRow",
    "LinearProgram",
    "LexResult",
    "simplex_min",
    "stage_program",
    "solve_lex",
    "vertex_oracle",
    "verify_feasible",
]

Var = Hashable

_Q0 = mpq(0)
_Q1 = mpq(1)


class Infeasible(ValueError):
    """No point satisfies the rows; signals a malformed constraint set."""


class Unbounded(RuntimeError):
    """Objective unbounded below.

    Unreachable for programs with nonnegative variables and nonnegative
    objective coefficients (the only shape this solver accepts); kept for
    contract completeness.
    """


class TooLarge(ValueError):
    """Program exceeds the vertex-enumeration oracle's variable cap."""


@dataclass
class LinearRow:
    coeffs: dict[Var, Fraction]
    sense: str  # ">=" or "="
    rhs: Fraction


@dataclass
class LinearProgram:
    """min objective . x  subject to rows, x >= 0 for all declared variables."""

    variables: tuple[Var, ...]
    rows: list[LinearRow]
    objective: dict[Var, Fraction]

    def __post_init__(self):
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise ValueError("duplicate variables")
        for row in self.rows:
            if row.sense not in (">=", "="):
                raise ValueError(f"unsupported row sense {row.sense!r}")
            undeclared = set(row.coeffs) - declared
            if undeclared:
                raise ValueError(f"row references undeclared variables {undeclared}")
        undeclared = set(self.objective) - declared
        if undeclared:
            raise ValueError(f"objective references undeclared variables {undeclared}")


@dataclass(frozen=True)
class LexResult:
    round_sums: tuple[Fraction, ...]
    rates: RateMatrix


def _to_mpq(value: Fraction | int) -> mpq:
    if isinstance(value, int):
        return mpq(value)
    return mpq(value.numerator, value.denominator)


def _to_fraction(value: mpq) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def simplex_min(lp: LinearProgram) -> tuple[Fraction, dict[Var, Fraction]]:
    """Exact minimum and one optimal basic point of ``lp``.

    Deterministic; anti-cycling via Bland's smallest-index rule. Raises
    ``Infeasible`` when the rows admit no point. Objective coefficients must
    be nonnegative (see module docstring).
    """
    nv = len(lp.variables)
    var_index = {v: i for i, v in enumerate(lp.variables)}
    cost = [_to_mpq(lp.objective.get(v, Fraction(0))) for v in lp.variables]
    if any(c < 0 for c in cost):
        raise ValueError("objective coefficients must be nonnegative")

    # Dual columns: one per ">=" row, a +/- pair per "=" row.
    columns: list[tuple[dict[int, mpq], mpq]] = []
    for row in lp.rows:
        col = {var_index[v]: _to_mpq(c) for v, c in row.coeffs.items() if c != 0}
        rhs = _to_mpq(row.rhs)
        columns.append((col, rhs))
        if row.sense == "=":
            columns.append(({i: -c for i, c in col.items()}, -rhs))

    ncols = len(columns)
    width = ncols + nv + 1  # structural + slacks + rhs
    tableau: list[list[mpq]] = []
    for i in range(nv):
        trow = [_Q0] * width
        for j, (col, _) in enumerate(columns):
            if i in col:
                trow[j] = col[i]
        trow[ncols + i] = _Q1
        trow[-1] = cost[i]
        tableau.append(trow)
    redcost = [_Q0] * (ncols + nv)
    for j, (_, g) in enumerate(columns):
        redcost[j] = -g
    basis = [ncols + i for i in range(nv)]

    while True:
        enter = next((j for j, r in enumerate(redcost) if r < 0), None)
        if enter is None:
            break
        leave = None
        best_ratio = None
        for i in range(nv):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][-1] / a
                if (
                    leave is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leave])
                ):
                    leave = i
                    best_ratio = ratio
        if leave is None:
            raise Infeasible(
                "constraint rows admit no feasible point (dual objective unbounded)"
            )
        _pivot(tableau, redcost, basis, leave, enter)

    value = _Q0
    for i in range(nv):
        j = basis[i]
        if j < ncols:
            value += columns[j][1] * tableau[i][-1]
    solution = {
        v: _to_fraction(redcost[ncols + var_index[v]]) for v in lp.variables
    }
    check = sum(
        (lp.objective.get(v, Fraction(0)) * solution[v] for v in lp.variables),
        Fraction(0),
    )
    result = _to_fraction(value)
    if check != result:
        raise AssertionError("internal solver inconsistency: primal/dual value mismatch")
    return result, solution


def _pivot(tableau, redcost, basis, leave, enter):
    pivot_row = tableau[leave]
    pv = pivot_row[enter]
    if pv != 1:
        inv = 1 / pv
        tableau[leave] = pivot_row = [x * inv for x in pivot_row]
    nz = [j for j, x in enumerate(pivot_row) if x]
    for i, trow in enumerate(tableau):
        if i == leave:
            continue
        a = trow[enter]
        if a:
            for j in nz:
                trow[j] -= a * pivot_row[j]
    a = redcost[enter]
    if a:
        for j in nz:
            if j < len(redcost):
                redcost[j] -= a * pivot_row[j]
    basis[leave] = enter


def stage_program(
    cs: ConstraintSet, stage: int, pinned: Sequence[Fraction]
) -> LinearProgram:
    """Round-``stage`` program: all cut rows plus pins for earlier optima."""
    if not 1 <= stage <= cs.rounds:
        raise ValueError(f"stage must lie in 1..{cs.rounds}")
    if len(pinned) < stage - 1:
        raise ValueError("one pinned optimum required per earlier stage")
    zero = set(cs.zero_forced)
    variables = tuple(
        (l, i)
        for l in range(1, cs.rounds + 1)
        for i in range(1, cs.n + 1)
        if (l, i) not in zero
    )
    declared = set(variables)
    rows = []
    for cut in cs.constraints:
        coeffs = {
            (m, i): Fraction(1)
            for m in range(1, cut.round + 1)
            for i in cut.subset
            if (m, i) in declared
        }
        rows.append(LinearRow(coeffs, ">=", Fraction(cut.rhs)))
    for j in range(1, stage):
        coeffs = {
            (j, i): Fraction(1) for i in range(1, cs.n + 1) if (j, i) in declared
        }
        rows.append(LinearRow(coeffs, "=", Fraction(pinned[j - 1])))
    objective = {
        (stage, i): Fraction(1) for i in range(1, cs.n + 1) if (stage, i) in declared
    }
    return LinearProgram(variables, rows, objective)


def solve_lex(cs: ConstraintSet, rounds: int | None = None) -> LexResult:
    """Per-round minimum sum-rates, each subject to the earlier optima.

    Stage m re-solves with equality rows pinning every earlier round's
    sum-rate to its optimum; the returned rates are one optimal vertex of
    the final stage. Exact throughout.
    """
    if rounds is None:
        rounds = cs.rounds
    elif rounds != cs.rounds:
        raise ValueError(f"constraint set covers {cs.rounds} rounds, not {rounds}")
    sums: list[Fraction] = []
    vertex: dict[Var, Fraction] = {}
    for stage in range(1, rounds + 1):
        value, vertex = simplex_min(stage_program(cs, stage, sums))
        sums.append(value)
    rates = RateMatrix.from_entries(rounds, cs.n, vertex)
    return LexResult(tuple(sums), rates)


def verify_feasible(cs: ConstraintSet, rates: RateMatrix) -> bool:
    """Exact feasibility of a rate matrix against every cut row and pin."""
    if rates.rounds != cs.rounds or rates.users != cs.n:
        return False
    for l, i in cs.zero_forced:
        if rates.rate(l, i) != 0:
            return False
    for cut in cs.constraints:
        acc = Fraction(0)
        for m in range(1, cut.round + 1):
            for i in cut.subset:
                acc += rates.rate(m, i)
        if acc < cut.rhs:
            return False
    return True


# -- independent enumeration oracle ----------------------------------------


def _integer_rows(lp: LinearProgram, var_index: Mapping[Var, int]):
    """Rows scaled to integers as (coeff vector, sense, rhs)."""
    out = []
    for row in lp.rows:
        denom = row.rhs.denominator
        for c in row.coeffs.values():
            denom = denom * c.denominator // math.gcd(denom, c.denominator)
        vec = [0] * len(var_index)
        for v, c in row.coeffs.items():
            vec[var_index[v]] = int(c * denom)
        out.append((vec, row.sense, int(row.rhs * denom)))
    return out


def _solve_square_int(rows: list[tuple[list[int], int]]) -> list[Fraction] | None:
    """Exact solution of a square integer system, or None when singular.

    Fraction-free (Bareiss) elimination keeps intermediate values integral;
    back-substitution reintroduces rationals only at the end.
    """
    n = len(rows)
    m = [list(vec) + [rhs] for vec, rhs in rows]
    prev = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return None
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        for r in range(col + 1, n):
            f = m[r][col]
            mr, mc = m[r], m[col]
            for j in range(col + 1, n + 1):
                mr[j] = (pv * mr[j] - f * mc[j]) // prev
            mr[col] = 0
        prev = pv
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        s = Fraction(m[r][n])
        for j in range(r + 1, n):
            s -= m[r][j] * x[j]
        x[r] = s / m[r][r]
    return x


def _drop_implied(rows: list[tuple[list[int], int]]) -> list[tuple[list[int], int]]:
    """Remove ">=" rows implied by another row under x >= 0.

    With nonnegative variables, ``a.x >= rhs_a`` implies ``b.x >= rhs_b``
    whenever b's coefficients dominate a's and rhs_b <= rhs_a, so dropping b
    leaves the feasible set (and the optimum) unchanged.
    """
    kept = []
    for i, (vec_b, rhs_b) in enumerate(rows):
        dominated = False
        for j, (vec_a, rhs_a) in enumerate(rows):
            if i == j:
                continue
            if rhs_b <= rhs_a and all(cb >= ca for cb, ca in zip(vec_b, vec_a)):
                strict = rhs_b < rhs_a or vec_b != vec_a
                if strict or j < i:
                    dominated = True
                    break
        if not dominated:
            kept.append((vec_b, rhs_b))
    return kept


def vertex_oracle(lp: LinearProgram, cap: int = 12) -> Fraction:
    """Minimum objective over all feasible basic solutions of ``lp``.

    Enumerates every choice of tight rows (constraint rows and
    variable-at-zero bounds) that yields a square solvable system, keeps the
    feasible ones, and returns the best objective. Rows that cannot change
    the feasible set are dropped first: vacuous rows (nonnegative
    coefficients with nonpositive rhs) and rows implied by a dominating row.
    Equality rows are tight everywhere, so they are forced into every
    candidate basis.
    """
    nv = len(lp.variables)
    if nv > cap:
        raise TooLarge(f"oracle supports at most {cap} variables, got {nv}")
    var_index = {v: i for i, v in enumerate(lp.variables)}
    rows = _integer_rows(lp, var_index)

    eq_rows = [(vec, rhs) for vec, sense, rhs in rows if sense == "="]
    ineq_rows = _drop_implied(
        [
            (vec, rhs)
            for vec, sense, rhs in rows
            if sense == ">=" and not (rhs <= 0 and all(c >= 0 for c in vec))
        ]
    )
    checks = [(vec, ">=", rhs) for vec, rhs in ineq_rows] + [
        (vec, "=", rhs) for vec, rhs in eq_rows
    ]
    if len(eq_rows) > nv:
        raise TooLarge("more equality rows than variables")

    coord_rows = []
    for i in range(nv):
        vec = [0] * nv
        vec[i] = 1
        coord_rows.append((vec, 0))

    pool = ineq_rows + coord_rows
    need = nv - len(eq_rows)
    cost = [lp.objective.get(v, Fraction(0)) for v in lp.variables]

    best: Fraction | None = None
    for combo in itertools.combinations(pool, need):
        x = _solve_square_int(eq_rows + list(combo))
        if x is None:
            continue
        if any(v < 0 for v in x):
            continue
        denom = 1
        for v in x:
            denom = denom * v.denominator // math.gcd(denom, v.denominator)
        xs = [int(v * denom) for v in x]
        ok = True
        for vec, sense, rhs in checks:
            s = sum(c * xv for c, xv in zip(vec, xs) if c)
            if sense == ">=":
                if s < rhs * denom:
                    ok = False
                    break
            elif s != rhs * denom:
                ok = False
                break
        if not ok:
            continue
        obj = sum((c * v for c, v in zip(cost, x) if c), Fraction(0))
        if best is None or obj < best:
            best = obj
    if best is None:
        raise Infeasible("no feasible basic solution found")
    return best
