import numpy as np
import pytest

from pbkit.model import PBInstance


@pytest.fixture
def toy():
    """Three unit-cost projects, budget 2; ballots {0,1,2}, {0,1}, {0}."""
    return PBInstance(
        approvals=(frozenset({0, 1, 2}), frozenset({0, 1}), frozenset({0})),
        costs=np.array([1.0, 1.0, 1.0]),
        budget=2.0,
    )


def random_instance(rng, max_voters=12, max_projects=8, integer_costs=False):
    """Small random instance for oracle comparisons (always has a feasible project)."""
    n = int(rng.integers(1, max_voters + 1))
    m = int(rng.integers(1, max_projects + 1))
    if integer_costs:
        costs = rng.integers(1, 6, size=m).astype(float)
    else:
        costs = np.round(rng.uniform(0.1, 3.0, size=m), 3)
    budget = float(np.round(rng.uniform(costs.min(), costs.sum()), 3))
    approvals = []
    for _ in range(n):
        k = int(rng.integers(0, m + 1))
        approvals.append(frozenset(map(int, rng.choice(m, size=k, replace=False))))
    return PBInstance(approvals=tuple(approvals), costs=costs, budget=budget)
