"""Problem instances for multi-round cooperative data exchange.

An instance is a group of users 1..n, a ground set of packets 1..k, the
per-user packet holdings, and nested group boundaries n_1 < ... < n_len = n
defining the groups N_l = {1, ..., n_l} that must reach their objective in
round l.

Packet sets are stored as integer bitmasks (bit j-1 set <=> packet j held),
so the subset-intersection counts that drive constraint generation reduce to
bitwise AND plus popcount even for k in the 10^5 range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InvalidInstance",
    "InvalidGroupIndex",
    "InvalidSubset",
    "InvalidProbability",
    "Instance",
    "RateMatrix",
    "random_instance",
]


class InvalidInstance(ValueError):
    """An instance invariant is violated; the message names the invariant."""


class InvalidGroupIndex(ValueError):
    """Group index outside 1..len(groups)."""


class InvalidSubset(ValueError):
    """User subset is empty or not contained in the referenced group."""


class InvalidProbability(ValueError):
    """Availability probability outside the open interval (0, 1)."""


def _mask_from_packets(packets: Iterable[int], k: int) -> int:
    mask = 0
    for p in packets:
        if not isinstance(p, int) or isinstance(p, bool) or not 1 <= p <= k:
            raise InvalidInstance(
                f"packet indices must be integers in 1..{k}, got {p!r}"
            )
        mask |= 1 << (p - 1)
    return mask


class Instance:
    """Immutable problem instance.

    ``holdings`` entries may be given either as iterables of 1-based packet
    indices or as ready-made bitmasks (int), which avoids materialising huge
    index lists for generated instances.
    """

    __slots__ = ("n", "k", "groups", "_masks", "_full")

    def __init__(
        self,
        n: int,
        k: int,
        holdings: Sequence[Iterable[int] | int],
        groups: Sequence[int],
    ):
        if not isinstance(n, int) or n < 1:
            raise InvalidInstance(f"user count n must be a positive integer, got {n!r}")
        if not isinstance(k, int) or k < 1:
            raise InvalidInstance(f"packet count k must be a positive integer, got {k!r}")
        if len(holdings) != n:
            raise InvalidInstance(
                f"holdings must list exactly n={n} user packet sets, got {len(holdings)}"
            )
        groups = tuple(groups)
        if not 1 <= len(groups) <= n:
            raise InvalidInstance(
                f"group count must lie in 1..n={n}, got {len(groups)}"
            )
        if any(not isinstance(g, int) for g in groups):
            raise InvalidInstance(f"group boundaries must be integers, got {groups!r}")
        if any(b <= a for a, b in zip(groups, groups[1:])):
            raise InvalidInstance(f"group boundaries must be strictly increasing, got {groups!r}")
        if groups[-1] != n:
            raise InvalidInstance(
                f"last group boundary must equal n={n}, got {groups[-1]}"
            )
        if len(groups) >= 2 and groups[0] <= 1:
            raise InvalidInstance(
                "first group boundary must exceed 1 when there are multiple groups"
            )

        full = (1 << k) - 1
        masks = []
        for h in holdings:
            if isinstance(h, int):
                if h < 0 or h > full:
                    raise InvalidInstance(f"packet indices must be integers in 1..{k}")
                masks.append(h)
            else:
                masks.append(_mask_from_packets(h, k))
        union = 0
        for m in masks:
            union |= m
        if union != full:
            raise InvalidInstance(
                "union of holdings must equal the full packet set 1..k"
            )

        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "_masks", tuple(masks))
        object.__setattr__(self, "_full", full)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Instance is immutable")

    # -- basic accessors ---------------------------------------------------

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def holdings(self) -> tuple[frozenset[int], ...]:
        """Per-user packet sets as frozensets of 1-based indices."""
        return tuple(
            frozenset(j + 1 for j in range(self.k) if (m >> j) & 1)
            for m in self._masks
        )

    def holding_mask(self, i: int) -> int:
        """Bitmask of user i's packets (users are 1-based)."""
        return self._masks[i - 1]

    def group_users(self, l: int) -> range:
        """Members of group l as a range of 1-based user ids."""
        self._check_group(l)
        return range(1, self.groups[l - 1] + 1)

    def _check_group(self, l: int) -> None:
        if not isinstance(l, int) or not 1 <= l <= len(self.groups):
            raise InvalidGroupIndex(
                f"group index must lie in 1..{len(self.groups)}, got {l!r}"
            )

    # -- set quantities ----------------------------------------------------

    def collective_mask(self, l: int) -> int:
        """Bitmask of all packets held collectively by group l."""
        self._check_group(l)
        mask = 0
        for i in range(self.groups[l - 1]):
            mask |= self._masks[i]
        return mask

    def collective_packets(self, l: int) -> frozenset[int]:
        """Packets held collectively by group l (the whole ground set for l = len(groups))."""
        mask = self.collective_mask(l)
        return frozenset(j + 1 for j in range(self.k) if (mask >> j) & 1)

    def missing_mask(self, i: int, l: int) -> int:
        """Bitmask of group-l packets that user i does not hold."""
        self._check_group(l)
        return self.collective_mask(l) & ~self._masks[i - 1]

    def intersect_missing(self, users: Iterable[int], l: int) -> int:
        """Count of group-l packets missed by every user in ``users``.

        ``users`` must be a nonempty subset of group l.
        """
        self._check_group(l)
        ids = sorted(set(users))
        n_l = self.groups[l - 1]
        if not ids:
            raise InvalidSubset("user subset must be nonempty")
        if ids[0] < 1 or ids[-1] > n_l:
            raise InvalidSubset(
                f"user subset must be contained in group {l} = 1..{n_l}, got {ids}"
            )
        coll = self.collective_mask(l)
        inter = coll
        for i in ids:
            inter &= coll & ~self._masks[i - 1]
            if inter == 0:
                break
        return inter.bit_count()

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "groups": list(self.groups),
            "holdings": [sorted(h) for h in self.holdings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict) -> "Instance":
        if not isinstance(data, dict):
            raise InvalidInstance("instance JSON must be an object")
        missing = {"n", "k", "groups", "holdings"} - set(data)
        if missing:
            raise InvalidInstance(f"instance JSON lacks required fields: {sorted(missing)}")
        return cls(data["n"], data["k"], data["holdings"], data["groups"])

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInstance(f"instance JSON is not valid JSON: {exc}") from exc
        return cls.from_json_dict(data)

    # -- dunder ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and self.groups == other.groups
            and self._masks == other._masks
        )

    def __hash__(self) -> int:
        return hash((self.n, self.k, self.groups, self._masks))

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, k={self.k}, groups={self.groups})"


def random_instance(
    n: int, k: int, p: float, groups: Sequence[int], seed: int
) -> Instance:
    """Draw an instance with i.i.d. packet availability probability ``p``.

    Every (user, packet) membership is an independent Bernoulli(p) draw from
    a seeded generator; packet columns held by nobody are redrawn until held
    by at least one user, so the ground-set coverage invariant always holds.
    Identical arguments yield identical instances.
    """
    if not 0 < p < 1:
        raise InvalidProbability(f"availability probability must lie in (0, 1), got {p!r}")
    if not isinstance(n, int) or n < 1:
        raise InvalidInstance(f"user count n must be a positive integer, got {n!r}")
    if not isinstance(k, int) or k < 1:
        raise InvalidInstance(f"packet count k must be a positive integer, got {k!r}")
    rng = np.random.default_rng(seed)
    held = rng.random((n, k)) < p
    uncovered = ~held.any(axis=0)
    while uncovered.any():
        held[:, uncovered] = rng.random((n, int(uncovered.sum()))) < p
        uncovered = ~held.any(axis=0)
    masks = [
        int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")
        for row in held
    ]
    return Instance(n, k, masks, groups)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"rates must be exact rationals, got {type(value).__name__}")


@dataclass(frozen=True)
class RateMatrix:
    """Exact per-round, per-user transmission rates (rounds x users)."""

    rates: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rounds = tuple(tuple(_as_fraction(v) for v in row) for row in self.rates)
        if not rounds:
            raise ValueError("rate matrix needs at least one round")
        width = len(rounds[0])
        if any(len(row) != width for row in rounds):
            raise ValueError("all rounds must cover the same user count")
        for l, row in enumerate(rounds, start=1):
            for i, v in enumerate(row, start=1):
                if v < 0:
                    raise ValueError(f"rate for round {l}, user {i} is negative: {v}")
        object.__setattr__(self, "rates", rounds)

    @property
    def rounds(self) -> int:
        return len(self.rates)

    @property
    def users(self) -> int:
        return len(self.rates[0])

    def rate(self, l: int, i: int) -> Fraction:
        """Rate of user i in round l (both 1-based)."""
        return self.rates[l - 1][i - 1]

    def round_sum(self, l: int) -> Fraction:
        return sum(self.rates[l - 1], Fraction(0))

    def round_sums(self) -> tuple[Fraction, ...]:
        return tuple(self.round_sum(l) for l in range(1, self.rounds + 1))

    def total(self) -> Fraction:
        return sum(self.round_sums(), Fraction(0))

    def to_strings(self) -> list[list[str]]:
        return [
            [f"{v.numerator}/{v.denominator}" for v in row] for row in self.rates
        ]

    @classmethod
    def from_entries(cls, rounds: int, users: int, entries: dict) -> "RateMatrix":
        """Build from a {(round, user): rate} map; absent entries are zero."""
        grid = [
            [entries.get((l, i), Fraction(0)) for i in range(1, users + 1)]
            for l in range(1, rounds + 1)
        ]
        return cls(tuple(tuple(row) for row in grid))
