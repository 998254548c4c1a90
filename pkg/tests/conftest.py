"""Shared fixtures: small hand-checked instances and instance samplers."""

from __future__ import annotations

import numpy as np
import pytest

from omnisolve.instance import Instance, random_instance


@pytest.fixture(scope="session")
def inst_a() -> Instance:
    """Three users with disjoint singletons, groups (2, 3)."""
    return Instance(3, 3, [[1], [2], [3]], (2, 3))


@pytest.fixture(scope="session")
def inst_c() -> Instance:
    """Missing sets {1}, {2,3}, {4,5} over six packets, groups (2, 3)."""
    return Instance(3, 6, [[2, 3, 4, 5, 6], [1, 4, 5, 6], [1, 2, 3, 6]], (2, 3))


@pytest.fixture(scope="session")
def inst_d() -> Instance:
    """Four users with disjoint singletons, groups (2, 3, 4)."""
    return Instance(4, 4, [[1], [2], [3], [4]], (2, 3, 4))


@pytest.fixture(scope="session")
def inst_atypical() -> Instance:
    """Lopsided holdings that defeat the two-group global-objective
    predictors (their second-round rate comes out negative)."""
    return Instance(3, 6, [[1, 2, 3, 4, 5, 6], [1], [1, 2, 3]], (2, 3))


def sample_config(seed: int) -> tuple[int, int, float, tuple[int, ...]]:
    """Deterministic mixed-size configuration for randomized suites."""
    rng = np.random.default_rng(10_000 + seed)
    n = int(rng.integers(3, 7))
    k = int(rng.integers(4, 21))
    p = [0.3, 0.5, 0.7][seed % 3]
    ell = int(rng.integers(1, 4))
    if ell == 1:
        groups: tuple[int, ...] = (n,)
    elif ell == 2 or n < 4:
        groups = (int(rng.integers(2, n)), n)
    else:
        n1 = int(rng.integers(2, n - 1))
        groups = (n1, int(rng.integers(n1 + 1, n)), n)
    return n, k, p, groups


def sample_instance(seed: int) -> Instance:
    n, k, p, groups = sample_config(seed)
    return random_instance(n, k, p, groups, seed)
