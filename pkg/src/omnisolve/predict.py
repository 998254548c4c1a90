"""Fast solution predictors for randomly distributed instances.

For large random instances the per-round optima concentrate, and the
optimal rates are characterised by a square linear system (one per mode)
or, with exactly two groups, by closed-form expressions. These predictors
evaluate those characterisations exactly; they hold with high probability
for large packet counts, so a non-typical instance can legitimately produce
a singular system or a negative rate. Both conditions are reported as
errors for the caller to fall back to the exact LP path (``lexlp``), never
clamped: clamping would fabricate infeasible rate matrices.

Also here: the concentration constant ``z_value`` for normalised
missing-set intersections, the asymptotic sum-rate and excess-rate
formulas, crossover/minimum finders for the excess-rate curves, and a dual
certificate that proves per-round optimality for two-group local-objective
instances without rerunning the LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .constraints import slo_constraints
from .instance import Instance, RateMatrix
from .lexlp import solve_lex

__all__ = [
    "SingularSystem",
    "NegativeRate",
    "NotTwoGroups",
    "InvalidArgument",
    "NoSignChange",
    "SleSystem",
    "z_value",
    "slo_sle_system",
    "slo_sle_solve",
    "sgo_pivot_user",
    "sgo_sle_system",
    "sgo_sle_solve",
    "slo_closed_form",
    "sgo_closed_form",
    "AsymptoticParams",
    "AsymptoticRates",
    "ExcessRates",
    "asymptotic_rates",
    "excess_rates",
    "find_crossover",
    "find_slo_excess_minimum",
    "DualCertificate",
    "CertificateReport",
    "slo_dual_certificate",
]


class SingularSystem(ArithmeticError):
    """The predictor's linear system is not invertible for this instance."""


class NegativeRate(ValueError):
    """The predicted solution has a negative entry; instance is not typical."""


class NotTwoGroups(ValueError):
    """Operation requires exactly two nested groups."""


class InvalidArgument(ValueError):
    """Argument outside the formula's domain."""


class NoSignChange(ValueError):
    """Bracket endpoints have equal sign; no crossover to bisect."""


# -- concentration constant --------------------------------------------------


def z_value(m: int, s: int, p: float) -> float:
    """Asymptotic normalised size of the missing-set intersection left by
    removing an s-subset from an m-user group under availability p."""
    if not isinstance(m, int) or not isinstance(s, int) or not 0 <= s < m:
        raise InvalidArgument(f"need integers 0 <= s < m, got s={s!r}, m={m!r}")
    if not 0 < p < 1:
        raise InvalidArgument(f"need 0 < p < 1, got {p!r}")
    q = 1.0 - p
    return (q ** (m - s) - q**m) / (1.0 - q**m)


# -- linear-system predictors ------------------------------------------------


@dataclass(frozen=True)
class SleSystem:
    """Square exact system whose solution is the predicted rate matrix.

    Variables are ordered round-major: index (l-1)*n + (i-1) is the rate of
    user i in round l. ``row_tags`` records which equation family produced
    each row, for diagnostics.
    """

    dimension: int
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    row_tags: tuple[str, ...]


def _solve_sle(system: SleSystem) -> list[Fraction]:
    """Exact Gaussian elimination; raises SingularSystem when rank-deficient."""
    n = system.dimension
    m = [list(row) + [system.rhs[r]] for r, row in enumerate(system.matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularSystem(
                f"no pivot for variable {col} (row tag there: {system.row_tags[col]})"
            )
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / pv
                mr, mc = m[r], m[col]
                for j in range(col, n + 1):
                    mr[j] -= f * mc[j]
    return [m[r][n] / m[r][r] for r in range(n)]


def _rates_from_vector(inst: Instance, x: list[Fraction]) -> RateMatrix:
    n, rounds = inst.n, inst.num_groups
    for idx, v in enumerate(x):
        if v < 0:
            l, i = divmod(idx, n)
            raise NegativeRate(
                f"predicted rate for round {l + 1}, user {i + 1} is negative: {v}"
            )
    grid = tuple(
        tuple(x[(l - 1) * n + (i - 1)] for i in range(1, n + 1))
        for l in range(1, rounds + 1)
    )
    return RateMatrix(grid)


def slo_sle_system(inst: Instance) -> SleSystem:
    """System characterising optimal rates for the local objective.

    Four row families: leave-one-out sums inside the first group; prefix
    sums over each later group's fresh users; zero rows for users outside
    the round's group; zero rows for previous-group users in later rounds.
    """
    n, rounds = inst.n, inst.num_groups
    dim = n * rounds
    F0, F1 = Fraction(0), Fraction(1)

    def var(l: int, i: int) -> int:
        return (l - 1) * n + (i - 1)

    matrix: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    tags: list[str] = []

    def add(coeffs: dict[int, Fraction], b, tag: str) -> None:
        row = [F0] * dim
        for idx, c in coeffs.items():
            row[idx] = c
        matrix.append(tuple(row))
        rhs.append(Fraction(b))
        tags.append(tag)

    n1 = inst.groups[0]
    for i in range(1, n1 + 1):
        coeffs = {var(1, j): F1 for j in range(1, n1 + 1) if j != i}
        add(coeffs, inst.missing_mask(i, 1).bit_count(), f"leave_one_out(i={i})")
    for l in range(2, rounds + 1):
        lo, hi = inst.groups[l - 2], inst.groups[l - 1]
        coll = inst.collective_mask(l)
        for j in range(1, hi - lo + 1):
            prefix = range(lo + 1, lo + j + 1)
            inter = coll
            for i in range(1, hi + 1):
                if i not in prefix:
                    inter &= inst.missing_mask(i, l)
            coeffs = {var(l, i): F1 for i in prefix}
            add(coeffs, inter.bit_count(), f"prefix_cut(l={l},j={j})")
    for l in range(1, rounds + 1):
        for i in range(inst.groups[l - 1] + 1, n + 1):
            add({var(l, i): F1}, 0, f"idle_outside(l={l},i={i})")
    for l in range(2, rounds + 1):
        for i in range(1, inst.groups[l - 2] + 1):
            add({var(l, i): F1}, 0, f"idle_settled(l={l},i={i})")

    return SleSystem(dim, tuple(matrix), tuple(rhs), tuple(tags))


def slo_sle_solve(inst: Instance) -> RateMatrix:
    return _rates_from_vector(inst, _solve_sle(slo_sle_system(inst)))


def _top_missing_masks(inst: Instance) -> list[int]:
    full = (1 << inst.k) - 1
    return [full & ~inst.holding_mask(i) for i in range(1, inst.n + 1)]


def _pivot_score(inst: Instance, miss: list[int], l: int, j: int) -> int:
    """Selection score for the designated user of group l: the sum of the
    other members' missing counts plus the intersection count over everyone
    else (outsiders and the candidate)."""
    n_l = inst.groups[l - 1]
    total = 0
    inter = (1 << inst.k) - 1
    for i in range(1, inst.n + 1):
        if i <= n_l and i != j:
            total += miss[i - 1].bit_count()
        else:
            inter &= miss[i - 1]
    return total + inter.bit_count()


def sgo_pivot_user(inst: Instance, l: int) -> int:
    """Designated user j_l of group l (score-maximal, smallest index wins ties)."""
    miss = _top_missing_masks(inst)
    n_l = inst.groups[l - 1]
    best_j, best_score = 1, None
    for j in range(1, n_l + 1):
        score = _pivot_score(inst, miss, l, j)
        if best_score is None or score > best_score:
            best_j, best_score = j, score
    return best_j


def _shell_index(inst: Instance, user: int) -> int:
    """The unique group shell containing the user: smallest l with user <= n_l."""
    for l, bound in enumerate(inst.groups, start=1):
        if user <= bound:
            return l
    raise InvalidArgument(f"user {user} outside 1..{inst.n}")


def sgo_sle_system(inst: Instance) -> SleSystem:
    """System characterising optimal rates for the global objective.

    Row families: one designated-user cut per non-final group; cumulative
    leave-one-out cuts for every user at the round its shell is reached;
    zero rows for users outside the previous group in later rounds; and
    equal-rate rows tying previous-group members together in later rounds.
    """
    n, rounds = inst.n, inst.num_groups
    dim = n * rounds
    F0, F1 = Fraction(0), Fraction(1)
    miss = _top_missing_masks(inst)
    full = (1 << inst.k) - 1

    def var(l: int, i: int) -> int:
        return (l - 1) * n + (i - 1)

    matrix: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    tags: list[str] = []

    def add(coeffs: dict[int, Fraction], b, tag: str) -> None:
        row = [F0] * dim
        for idx, c in coeffs.items():
            row[idx] = c
        matrix.append(tuple(row))
        rhs.append(Fraction(b))
        tags.append(tag)

    for l in range(1, rounds):
        j_l = sgo_pivot_user(inst, l)
        m_l = _shell_index(inst, j_l)
        n_l = inst.groups[l - 1]
        members = [i for i in range(1, n_l + 1) if i != j_l]
        inter = full
        for i in range(1, n + 1):
            if i not in members:
                inter &= miss[i - 1]
        coeffs = {var(m, i): F1 for m in range(1, m_l + 1) for i in members}
        add(coeffs, inter.bit_count(), f"designated_cut(l={l},j={j_l})")
    for l in range(1, rounds + 1):
        lo = inst.groups[l - 2] if l > 1 else 0
        for i in range(lo + 1, inst.groups[l - 1] + 1):
            coeffs = {
                var(m, j): F1
                for m in range(1, l + 1)
                for j in range(1, n + 1)
                if j != i
            }
            add(coeffs, miss[i - 1].bit_count(), f"leave_one_out(l={l},i={i})")
    for l in range(2, rounds + 1):
        for i in range(inst.groups[l - 2] + 1, n + 1):
            add({var(l, i): F1}, 0, f"idle_fresh(l={l},i={i})")
    for l in range(2, rounds + 1):
        prev = inst.groups[l - 2]
        for i in range(1, prev):
            add(
                {var(l, i): F1, var(l, i + 1): -F1},
                0,
                f"equal_rate(l={l},i={i})",
            )

    return SleSystem(dim, tuple(matrix), tuple(rhs), tuple(tags))


def sgo_sle_solve(inst: Instance) -> RateMatrix:
    return _rates_from_vector(inst, _solve_sle(sgo_sle_system(inst)))


# -- two-group closed forms ----------------------------------------------------


def _require_two_groups(inst: Instance) -> None:
    if inst.num_groups != 2:
        raise NotTwoGroups(f"instance has {inst.num_groups} groups, need exactly 2")


def slo_closed_form(inst: Instance) -> RateMatrix:
    """Two-group local-objective rates in closed form.

    First round: each first-group member transmits the group's average
    missing count (scaled by n1/(n1-1)) minus its own. Second round: fresh
    user i transmits the increment between consecutive prefix intersections;
    the empty-prefix intersection runs over every user and is zero.
    """
    _require_two_groups(inst)
    n, n1 = inst.n, inst.groups[0]
    miss1 = [inst.missing_mask(i, 1) for i in range(1, n1 + 1)]
    miss2 = _top_missing_masks(inst)
    total1 = sum(m.bit_count() for m in miss1)

    def prefix_inter(t: int) -> int:
        # count of packets missed by everyone outside the first t fresh users
        inter = (1 << inst.k) - 1
        for i in range(1, n + 1):
            if not n1 < i <= n1 + t:
                inter &= miss2[i - 1]
        return inter.bit_count()

    entries: dict[tuple[int, int], Fraction] = {}
    for i in range(1, n1 + 1):
        entries[(1, i)] = Fraction(total1, n1 - 1) - miss1[i - 1].bit_count()
    for i in range(n1 + 1, n + 1):
        t = i - n1
        entries[(2, i)] = Fraction(prefix_inter(t) - prefix_inter(t - 1))
    for key, v in entries.items():
        if v < 0:
            raise NegativeRate(
                f"predicted rate for round {key[0]}, user {key[1]} is negative: {v}"
            )
    return RateMatrix.from_entries(2, n, entries)


def sgo_closed_form(inst: Instance) -> RateMatrix:
    """Two-group global-objective rates in closed form.

    Uses the designated first-group user j_1; M is the rest of the first
    group. Second-round rates are equal across the first group and zero
    elsewhere.
    """
    _require_two_groups(inst)
    n, n1 = inst.n, inst.groups[0]
    if n1 >= n:
        raise InvalidArgument("first group must be a proper subgroup")
    miss = _top_missing_masks(inst)
    j1 = sgo_pivot_user(inst, 1)
    m_set = [i for i in range(1, n1 + 1) if i != j1]
    inter = (1 << inst.k) - 1
    for i in range(1, n + 1):
        if i not in m_set:
            inter &= miss[i - 1]
    cap = inter.bit_count()
    sum_in = sum(miss[i - 1].bit_count() for i in m_set)
    sum_out = sum(
        miss[i - 1].bit_count() for i in range(1, n + 1) if i not in m_set
    )

    entries: dict[tuple[int, int], Fraction] = {}
    for i in range(1, n1 + 1):
        entries[(1, i)] = Fraction(sum_in + cap, n1 - 1) - miss[i - 1].bit_count()
    for i in range(n1 + 1, n + 1):
        entries[(1, i)] = Fraction(sum_out - cap, n - n1) - miss[i - 1].bit_count()
    second = (
        Fraction(sum_out, n1 * (n - n1))
        - Fraction(sum_in, n1 * (n1 - 1))
        - Fraction((n - 1) * cap, n1 * (n1 - 1) * (n - n1))
    )
    for i in range(1, n1 + 1):
        entries[(2, i)] = second
    for key, v in entries.items():
        if v < 0:
            raise NegativeRate(
                f"predicted rate for round {key[0]}, user {key[1]} is negative: {v}"
            )
    return RateMatrix.from_entries(2, n, entries)


# -- asymptotic rates ----------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticParams:
    """Arguments of the large-instance sum-rate formulas."""

    n: int
    n1: int
    p: float

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.n1, int):
            raise InvalidArgument("n and n1 must be integers")
        if not 1 < self.n1 <= self.n - 1:
            raise InvalidArgument(f"need 1 < n1 <= n-1, got n1={self.n1}, n={self.n}")
        if not 0 < self.p < 1:
            raise InvalidArgument(f"need 0 < p < 1, got p={self.p!r}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


class AsymptoticRates(NamedTuple):
    slo: float
    sgo: float
    cde: float


class ExcessRates(NamedTuple):
    slo: float
    sgo: float


def asymptotic_rates(params: AsymptoticParams) -> AsymptoticRates:
    """Normalised total sum-rates the three schemes concentrate around."""
    n, n1, q = params.n, params.n1, params.q
    r_slo = (n1 * (q - q**n1)) / ((n1 - 1) * (1 - q**n1)) + (q**n1 - q**n) / (
        1 - q**n
    )
    r_sgo = ((n - n1 + 1) * q - (n - n1) * q**n - q ** (n - n1 + 1)) / (
        (n - n1) * (1 - q**n)
    )
    r_cde = (n * (q - q**n)) / ((n - 1) * (1 - q**n))
    return AsymptoticRates(r_slo, r_sgo, r_cde)


def excess_rates(params: AsymptoticParams) -> ExcessRates:
    """Relative excess of each scheme's total sum-rate over the single-round baseline."""
    r = asymptotic_rates(params)
    return ExcessRates((r.slo - r.cde) / r.cde, (r.sgo - r.cde) / r.cde)


_BRACKET_LO = 1e-6
_BRACKET_HI = 1.0 - 1e-6
_TOL = 1e-9


def _excess_gap(n: int, n1: int, p: float) -> float:
    e = excess_rates(AsymptoticParams(n, n1, p))
    return e.slo - e.sgo


def find_crossover(n: int, n1: int) -> float:
    """Bisection root of the excess-rate gap over p in (0, 1).

    Only group splits larger than half the users cross; otherwise the gap
    keeps one sign and NoSignChange is raised.
    """
    lo, hi = _BRACKET_LO, _BRACKET_HI
    flo, fhi = _excess_gap(n, n1, lo), _excess_gap(n, n1, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoSignChange(
            f"excess-rate gap has equal sign at both bracket ends for n={n}, n1={n1}"
        )
    while hi - lo > _TOL:
        mid = 0.5 * (lo + hi)
        fmid = _excess_gap(n, n1, mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def find_slo_excess_minimum(n: int, n1: int) -> float:
    """Golden-section minimiser of the local-objective excess rate over p.

    Defined for small first groups (1 < n1 <= n/2), where the curve dips to
    an interior minimum before rising again.
    """
    if not 1 < n1 <= n / 2:
        raise InvalidArgument(f"need 1 < n1 <= n/2, got n1={n1}, n={n}")

    def f(p: float) -> float:
        return excess_rates(AsymptoticParams(n, n1, p)).slo

    a, b = _BRACKET_LO, _BRACKET_HI
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > _TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


# -- dual optimality certificate -----------------------------------------------


@dataclass(frozen=True)
class DualCertificate:
    """Nonnegative weights on cut rows (plus a free weight on the pin row for
    the second stage) that certify a stage optimum by weak duality."""

    cut_weights: dict[tuple[int, frozenset[int]], Fraction]
    pin_weight: Fraction | None
    objective: Fraction
    feasible: bool


class CertificateReport(NamedTuple):
    stage1: DualCertificate
    stage2: DualCertificate
    verified: bool


def slo_dual_certificate(inst: Instance) -> CertificateReport:
    """Closed-form dual certificates for both stages of a two-group local
    objective, checked exactly against the LP optima.

    Stage 1 puts weight 1/(n1-1) on every leave-one-out cut of the first
    group. Stage 2 keeps those weights, adds weight 1 on the cumulative cut
    of the complement of the first group, and weight -1 on the pinned
    first-stage sum. ``verified`` means both certificates are dual-feasible
    and their objectives equal the exact LP round optima.
    """
    _require_two_groups(inst)
    n, n1 = inst.n, inst.groups[0]
    cs = slo_constraints(inst)
    lex = solve_lex(cs)
    rhs_by_key = {(c.round, c.subset): Fraction(c.rhs) for c in cs.constraints}
    zero = set(cs.zero_forced)
    variables = [
        (l, i) for l in (1, 2) for i in range(1, n + 1) if (l, i) not in zero
    ]

    w = Fraction(1, n1 - 1)
    group1 = frozenset(range(1, n1 + 1))
    stage1_weights = {
        (1, group1 - {i}): w for i in range(1, n1 + 1)
    }
    complement = frozenset(range(n1 + 1, n + 1))
    stage2_weights = dict(stage1_weights)
    stage2_weights[(2, complement)] = Fraction(1)
    pin_weight = Fraction(-1)

    def column_sum(weights, var):
        l, i = var
        acc = Fraction(0)
        for (rnd, subset), weight in weights.items():
            if l <= rnd and i in subset:
                acc += weight
        return acc

    def objective_of(weights) -> Fraction:
        return sum(
            (weight * rhs_by_key[key] for key, weight in weights.items()),
            Fraction(0),
        )

    feas1 = all(
        column_sum(stage1_weights, v) <= (1 if v[0] == 1 else 0) for v in variables
    )
    obj1 = objective_of(stage1_weights)
    stage1 = DualCertificate(stage1_weights, None, obj1, feas1)

    feas2 = all(
        column_sum(stage2_weights, v) + (pin_weight if v[0] == 1 else 0)
        <= (1 if v[0] == 2 else 0)
        for v in variables
    )
    obj2 = objective_of(stage2_weights) + pin_weight * lex.round_sums[0]
    stage2 = DualCertificate(stage2_weights, pin_weight, obj2, feas2)

    verified = (
        feas1
        and feas2
        and obj1 == lex.round_sums[0]
        and obj2 == lex.round_sums[1]
    )
    return CertificateReport(stage1, stage2, verified)
