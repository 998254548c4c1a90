"""Achievability verification by random linear network coding over GF(2^8).

Packets are split into equal chunks so fractional rates become integer
chunk counts. Each round is simulated as a lossless broadcast: users take
one-chunk turns in round-robin order, each transmitting a uniformly random
field combination of everything currently in their row space, until every
user has sent its round quota. After each round the round's target users
are rank-checked: a chunk is decodable exactly when its unit vector lies in
the user's row space.

Only coefficient vectors are tracked; payload bytes would add nothing to a
rank check. Field arithmetic uses byte tables for the reduction polynomial
x^8 + x^4 + x^3 + x^2 + 1 (0x11D), so elimination vectorises over numpy
uint8 rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .instance import Instance, RateMatrix

__all__ = [
    "NonIntegralTransmission",
    "REDUCTION_POLY",
    "gf_mul",
    "gf_rref",
    "gf_rank",
    "can_decode",
    "chunk_granularity",
    "KnowledgeState",
    "RoundOutcome",
    "SimReport",
    "simulate_exchange",
]


class NonIntegralTransmission(ValueError):
    """A rate times the chunk count is not an integer chunk total."""


REDUCTION_POLY = 0x11D

_EXP = np.zeros(510, dtype=np.uint8)
_LOG = np.zeros(256, dtype=np.int32)
_x = 1
for _i in range(255):
    _EXP[_i] = _x
    _EXP[_i + 255] = _x
    _LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= REDUCTION_POLY
del _x, _i

# MUL[a, b] = a * b in the field; row/column 0 stay zero.
_MUL = np.zeros((256, 256), dtype=np.uint8)
_nz = np.arange(1, 256)
_MUL[1:, 1:] = _EXP[(_LOG[_nz][:, None] + _LOG[_nz][None, :]) % 255]
_INV = np.zeros(256, dtype=np.uint8)
_INV[_nz] = _EXP[(255 - _LOG[_nz]) % 255]
del _nz


def gf_mul(a: int, b: int) -> int:
    """Scalar field product."""
    return int(_MUL[a, b])


def gf_rref(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over the field.

    Returns the nonzero rows and their pivot columns.
    """
    m = np.array(matrix, dtype=np.uint8, copy=True)
    if m.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(m[r:, col])[0]
        if nz.size == 0:
            continue
        lead = r + int(nz[0])
        if lead != r:
            m[[r, lead]] = m[[lead, r]]
        inv = _INV[m[r, col]]
        m[r] = _MUL[inv, m[r]]
        factors = m[:, col].copy()
        factors[r] = 0
        rows_to_fix = np.nonzero(factors)[0]
        if rows_to_fix.size:
            m[rows_to_fix] ^= _MUL[factors[rows_to_fix][:, None], m[r][None, :]]
        pivots.append(col)
        r += 1
    return m[:r], pivots


def gf_rank(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    return len(gf_rref(matrix)[1])


def can_decode(rows: np.ndarray | Sequence[Sequence[int]], targets: Iterable[int]) -> bool:
    """True iff every target unit vector lies in the row space of ``rows``.

    ``targets`` are 0-based column indices. Decided by Gaussian elimination:
    in reduced echelon form, a unit vector belongs to the row space exactly
    when its column is a pivot whose row is that unit vector.
    """
    rows = np.asarray(rows, dtype=np.uint8)
    wanted = set(targets)
    if not wanted:
        return True
    if rows.size == 0:
        return False
    rref, pivots = gf_rref(rows)
    pivot_row = {col: idx for idx, col in enumerate(pivots)}
    for t in wanted:
        idx = pivot_row.get(t)
        if idx is None:
            return False
        row = rref[idx]
        if int(np.count_nonzero(row)) != 1:
            return False
    return True


def chunk_granularity(rates: RateMatrix) -> int:
    """Least chunk count per packet making every transmission integral."""
    return math.lcm(*(v.denominator for row in rates.rates for v in row))


class KnowledgeState:
    """One user's coefficient row space.

    Rows are the unit vectors of the user's own chunks plus a prefix of the
    shared broadcast log (every user hears every transmission). The row
    space only ever grows; the own-chunk unit vectors are always present.
    """

    def __init__(self, own_columns: np.ndarray, log: np.ndarray, ncols: int):
        self.own_columns = own_columns
        self._log = log
        self._ncols = ncols
        self.heard = 0

    def matrix(self) -> np.ndarray:
        own = np.zeros((len(self.own_columns), self._ncols), dtype=np.uint8)
        own[np.arange(len(self.own_columns)), self.own_columns] = 1
        return np.vstack([own, self._log[: self.heard]])

    def rank(self) -> int:
        return gf_rank(self.matrix())

    def can_decode(self, targets: Iterable[int]) -> bool:
        return can_decode(self.matrix(), targets)


@dataclass(frozen=True)
class RoundOutcome:
    round: int
    targets: tuple[tuple[int, bool], ...]  # (user, objective achieved)
    transmissions: tuple[int, ...]  # chunks sent per user this round
    ranks: tuple[int, ...]  # row-space rank per user after the round


@dataclass(frozen=True)
class SimReport:
    mode: str
    chunks_per_packet: int
    rounds: tuple[RoundOutcome, ...]

    @property
    def all_achieved(self) -> bool:
        return all(ok for r in self.rounds for _, ok in r.targets)

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "chunks_per_packet": self.chunks_per_packet,
            "all_achieved": self.all_achieved,
            "rounds": [
                {
                    "round": r.round,
                    "targets": [
                        {"user": u, "achieved": ok} for u, ok in r.targets
                    ],
                    "transmissions": list(r.transmissions),
                    "ranks": list(r.ranks),
                }
                for r in self.rounds
            ],
        }


def _chunk_columns(packet_mask: int, k: int, c: int) -> np.ndarray:
    cols = []
    for j in range(k):
        if (packet_mask >> j) & 1:
            cols.extend(range(j * c, (j + 1) * c))
    return np.array(cols, dtype=np.int64)


def simulate_exchange(
    inst: Instance,
    rates: RateMatrix,
    mode: str,
    seed: int,
    chunks_per_packet: int | None = None,
) -> SimReport:
    """Broadcast simulation at the given rates; reports per-round decoding.

    ``mode`` selects the per-round target: "slo" checks that each group
    member can decode every chunk of the group's collective packets, "sgo"
    that it can decode every chunk of the ground set. Rates must be
    feasible for the targets to be achievable; the simulation itself only
    requires integral chunk counts.

    A transmission is a uniformly random nonzero element of the sender's
    current row space (all-zero draws are redrawn); a sender with an empty
    row space contributes nothing.

    Cost grows with (total chunks transmitted)^2 times the column count;
    this is a verification tool for desk-scale instances, not a throughput
    simulator.
    """
    if mode not in ("slo", "sgo"):
        raise ValueError(f"mode must be 'slo' or 'sgo', got {mode!r}")
    if rates.rounds != inst.num_groups or rates.users != inst.n:
        raise ValueError("rate matrix shape does not match the instance")
    c = chunks_per_packet if chunks_per_packet is not None else chunk_granularity(rates)
    if c < 1:
        raise NonIntegralTransmission(f"chunk count must be >= 1, got {c}")
    counts: list[list[int]] = []
    for l in range(1, rates.rounds + 1):
        row = []
        for i in range(1, inst.n + 1):
            t = rates.rate(l, i) * c
            if t.denominator != 1:
                raise NonIntegralTransmission(
                    f"rate {rates.rate(l, i)} times {c} chunks is not integral"
                )
            row.append(int(t))
        counts.append(row)

    n, k = inst.n, inst.k
    ncols = k * c
    total_tx = sum(sum(row) for row in counts)
    log = np.zeros((total_tx, ncols), dtype=np.uint8)
    rng = np.random.default_rng(seed)

    own_cols = [_chunk_columns(inst.holding_mask(i), k, c) for i in range(1, n + 1)]
    states = [KnowledgeState(own_cols[i], log, ncols) for i in range(n)]

    sent = 0
    outcomes = []
    for l in range(1, rates.rounds + 1):
        quota = list(counts[l - 1])
        while any(quota):
            for u in range(n):
                if quota[u] == 0:
                    continue
                vec = _random_combination(rng, log[:sent], own_cols[u], ncols)
                log[sent] = vec
                sent += 1
                quota[u] -= 1
                for st in states:
                    st.heard = sent

        if mode == "slo":
            target_cols = set(_chunk_columns(inst.collective_mask(l), k, c).tolist())
        else:
            target_cols = set(range(ncols))
        group_size = inst.groups[l - 1]
        achieved = tuple(
            (i, states[i - 1].can_decode(target_cols))
            for i in range(1, group_size + 1)
        )
        ranks = tuple(st.rank() for st in states)
        outcomes.append(
            RoundOutcome(l, achieved, tuple(counts[l - 1]), ranks)
        )
    return SimReport(mode, c, tuple(outcomes))


def _random_combination(
    rng: np.random.Generator, heard: np.ndarray, own: np.ndarray, ncols: int
) -> np.ndarray:
    """Uniformly random nonzero vector in span(own unit rows, heard rows).

    Coefficients are drawn i.i.d. over the generating set, which induces the
    uniform distribution on the span; all-zero results are redrawn. Returns
    the zero vector only when the span itself is trivial.
    """
    if heard.shape[0] == 0 and own.size == 0:
        return np.zeros(ncols, dtype=np.uint8)
    for _ in range(64):
        vec = np.zeros(ncols, dtype=np.uint8)
        if heard.shape[0]:
            coeffs = rng.integers(0, 256, size=heard.shape[0], dtype=np.uint8)
            nz = np.nonzero(coeffs)[0]
            if nz.size:
                vec = np.bitwise_xor.reduce(
                    _MUL[coeffs[nz][:, None], heard[nz]], axis=0
                )
        if own.size:
            vec[own] ^= rng.integers(0, 256, size=own.size, dtype=np.uint8)
        if vec.any():
            return vec
    return vec
