"""Cut-set constraint generation for the two omniscience objectives.

Every constraint bounds the cumulative rate of a user subset from below by
the number of packets that nobody outside the subset can supply:

    sum_{m=1..round} r^(m)_S  >=  rhs.

``slo`` mode (local objective) emits, for each round l, one constraint per
nonempty proper subset S of group N_l, with rhs counted inside the group's
collective packet set; users outside N_l have their round-l rate pinned to
zero. ``sgo`` mode (global objective) emits, for each round l, constraints
for subsets S of all users that contain the previous group, do not contain
N_l, and are proper and nonempty; nothing is pinned.

The empty subset is omitted in both modes: group coverage forces its rhs to
zero, so the row is vacuous.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance

__all__ = ["CutConstraint", "ConstraintSet", "slo_constraints", "sgo_constraints"]


@dataclass(frozen=True)
class CutConstraint:
    round: int
    subset: frozenset[int]
    rhs: int


@dataclass(frozen=True)
class ConstraintSet:
    mode: str  # "slo" | "sgo"
    n: int
    rounds: int
    constraints: tuple[CutConstraint, ...]
    zero_forced: tuple[tuple[int, int], ...]  # (round, user) pairs pinned to rate 0


def _subset_users(mask: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(mask.bit_length()) if (mask >> i) & 1)


def slo_constraints(inst: Instance) -> ConstraintSet:
    """Constraints for groups learning their own collective packets."""
    rounds = inst.num_groups
    out = []
    for l in range(1, rounds + 1):
        n_l = inst.groups[l - 1]
        coll = inst.collective_mask(l)
        miss = [coll & ~inst.holding_mask(i) for i in range(1, n_l + 1)]
        for smask in range(1, (1 << n_l) - 1):
            inter = coll
            rest = ~smask
            for idx in range(n_l):
                if (rest >> idx) & 1:
                    inter &= miss[idx]
                    if inter == 0:
                        break
            out.append(CutConstraint(l, _subset_users(smask), inter.bit_count()))
    zero = tuple(
        (l, i)
        for l in range(1, rounds + 1)
        for i in range(inst.groups[l - 1] + 1, inst.n + 1)
    )
    return ConstraintSet("slo", inst.n, rounds, tuple(out), zero)


def sgo_constraints(inst: Instance) -> ConstraintSet:
    """Constraints for groups learning the whole ground set."""
    rounds = inst.num_groups
    n = inst.n
    full = (1 << inst.k) - 1
    miss = [full & ~inst.holding_mask(i) for i in range(1, n + 1)]
    out = []
    for l in range(1, rounds + 1):
        prev_mask = (1 << inst.groups[l - 2]) - 1 if l > 1 else 0
        group_mask = (1 << inst.groups[l - 1]) - 1
        for smask in range(1, 1 << n):
            if smask & prev_mask != prev_mask:
                continue
            if smask & group_mask == group_mask:
                continue
            inter = full
            rest = ~smask
            for idx in range(n):
                if (rest >> idx) & 1:
                    inter &= miss[idx]
                    if inter == 0:
                        break
            out.append(CutConstraint(l, _subset_users(smask), inter.bit_count()))
    return ConstraintSet("sgo", n, rounds, tuple(out), ())
