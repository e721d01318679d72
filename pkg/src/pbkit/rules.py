"""Exact optimizers, heuristic baselines and tie enumeration for PB objectives.

Four objectives are supported: maximum social welfare (``av``), maximum
representation (``cc``), the harmonic interpolation between them (``pav``) and
the scalarized mixture ``p * welfare + (1 - p) * representation``
(``weighted``).  All are concave functions of each voter's count of funded
approved projects, so a single branch-and-bound engine with a
fractional-knapsack bound over current marginal gains proves optimality for
all of them (classic Dantzig bound for the modular welfare case, a
submodularity-based bound otherwise).

``solve_exact`` either returns a provably optimal bundle or raises
:class:`SolveLimitReached`; it never silently degrades to a heuristic.  The
search budget is a node count rather than wall time so results stay
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import (
    BUDGET_RTOL,
    PBInstance,
    greedy_fill_from_scores,
    harmonic_numbers,
)

#: Default branch-and-bound node budget per solver invocation.
DEFAULT_NODE_LIMIT = 30_000_000

#: Value tolerance for tie detection with float-valued objectives.
TIE_TOL = 1e-9


class SolveLimitReached(RuntimeError):
    """Optimality was not proven within the configured search budget."""


@dataclass(frozen=True)
class Objective:
    """The score being maximized: ``av``, ``cc``, ``pav`` or ``weighted``.

    ``p`` is the welfare weight of the scalarized objective and must be given
    exactly for ``weighted`` (score ``p * SW + (1 - p) * REP``) and omitted
    otherwise.
    """

    kind: str
    p: float | None = None

    KINDS = ("av", "cc", "pav", "weighted")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "weighted":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("weighted objective needs p in [0, 1]")
        elif self.p is not None:
            raise ValueError("p is only meaningful for the weighted objective")

    @classmethod
    def av(cls) -> "Objective":
        return cls("av")

    @classmethod
    def cc(cls) -> "Objective":
        return cls("cc")

    @classmethod
    def pav(cls) -> "Objective":
        return cls("pav")

    @classmethod
    def weighted(cls, p: float) -> "Objective":
        return cls("weighted", float(p))

    def is_integral(self) -> bool:
        return self.kind in ("av", "cc")

    def per_count_value(self, max_count: int) -> np.ndarray:
        """Voter contribution to the objective as a function of its count."""
        k = np.arange(max_count + 1, dtype=np.float64)
        if self.kind == "av":
            return k
        if self.kind == "cc":
            return np.minimum(k, 1.0)
        if self.kind == "pav":
            return harmonic_numbers(max_count)
        return self.p * k + (1.0 - self.p) * np.minimum(k, 1.0)

    def value(self, instance: PBInstance, bundle) -> float:
        """Objective score of a bundle (exact integer-valued float for av/cc)."""
        from .model import intersection_counts

        counts = intersection_counts(instance, bundle)
        table = self.per_count_value(instance.num_projects)
        return float(table[counts].sum())


@dataclass(frozen=True)
class OptimalResult:
    """A provably optimal bundle together with its objective value."""

    bundle: frozenset
    value: float
    proven_optimal: bool


@dataclass(frozen=True)
class TieReport:
    """Number of distinct optima of an instance (saturating at a cap).

    ``count`` is the number of minimal optimal bundles: removing any project
    from such a bundle strictly lowers the objective, so optima padded with
    zero-gain affordable projects are not counted as separate ties.
    """

    count: int
    saturated: bool
    sample_bundles: tuple[frozenset, ...]
    optimum_value: float


def _delta_table(objective: Objective, m: int) -> np.ndarray:
    v = objective.per_count_value(m + 1)
    return np.ascontiguousarray(np.diff(v))


def _density_order(instance: PBInstance) -> np.ndarray:
    """Static branching order: initial gain/cost density desc, index asc.

    The first-unit marginal is 1 for every objective here, so the initial
    density ranking by approvals/cost is shared by all of them.
    """
    deg = instance.approval_counts.astype(np.float64)
    density = deg / instance.costs
    return np.lexsort((np.arange(instance.num_projects), -density)).astype(np.int32)


def _packed(instance: PBInstance):
    indptr, idx = instance.approver_csr
    return indptr, idx, instance.num_voters, instance.costs, float(instance.budget)


def _selection_to_bundle(selected: np.ndarray) -> frozenset:
    return frozenset(int(j) for j in np.flatnonzero(selected))


def solve_sequential(instance: PBInstance, objective: Objective) -> frozenset:
    """Greedy baseline: repeatedly fund the affordable project with the largest
    marginal objective gain (plain gain, not cost-normalized; ties to the lower
    index) until nothing affordable remains."""
    indptr, idx, n, costs, budget = _packed(instance)
    delta = _delta_table(objective, instance.num_projects)
    slack = budget * BUDGET_RTOL
    selected = kernels.sequential_select(indptr, idx, n, costs, budget, delta, slack)
    return _selection_to_bundle(selected)


def solve_random(instance: PBInstance, seed: int) -> frozenset:
    """Random baseline: shuffle the projects, fund each one that still fits."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(instance.num_projects)
    scores = np.empty(instance.num_projects, dtype=np.float64)
    scores[order] = np.linspace(1.0, 0.0, instance.num_projects)
    return greedy_fill_from_scores(instance, scores)


def _maximize(instance: PBInstance, objective: Objective, node_limit: int):
    """Optimal value search; returns (value, one optimal selection array)."""
    indptr, idx, n, costs, budget = _packed(instance)
    delta = _delta_table(objective, instance.num_projects)
    slack = budget * BUDGET_RTOL
    order = _density_order(instance)
    init_sel = kernels.sequential_select(indptr, idx, n, costs, budget, delta, slack)
    init_cnt = kernels.counts_for_selection(indptr, idx, n, init_sel)
    table = objective.per_count_value(instance.num_projects)
    init_val = float(table[init_cnt].sum())
    status, best_val, best_sel, _nodes = kernels.bnb_maximize(
        indptr, idx, n, costs, budget, delta, order,
        init_sel.astype(np.uint8), init_val, node_limit, slack,
    )
    if status == kernels.STATUS_NODE_LIMIT:
        raise SolveLimitReached(
            f"optimality not proven within the node limit ({node_limit})"
        )
    return best_val, best_sel


def _lex_smallest_optimal(instance: PBInstance, objective: Objective,
                          target: float, node_limit: int) -> frozenset:
    """Lexicographically smallest optimal bundle (by sorted index sequence).

    Grows the bundle index by index: a candidate is committed iff the fixed
    prefix extended by it can still be completed to the optimum using only
    higher indices; the walk stops as soon as the prefix itself is optimal,
    since any strict superset sorts lexicographically later.
    """
    indptr, idx, n, costs, budget = _packed(instance)
    m = instance.num_projects
    delta = _delta_table(objective, m)
    table = objective.per_count_value(m)
    slack = budget * BUDGET_RTOL
    order = _density_order(instance)

    fixed = np.zeros(m, dtype=np.uint8)
    spent = 0.0
    cnt = np.zeros(n, dtype=np.int32)
    value = 0.0
    for q in range(m):
        if value >= target - TIE_TOL:
            break
        cq = float(instance.costs[q])
        if cq > budget - spent + slack:
            continue
        fixed[q] = 1
        allowed = order[order > q]
        status = kernels.bnb_reachable(
            indptr, idx, n, costs, budget, delta, allowed.astype(np.int32),
            fixed, target, node_limit, slack,
        )
        if status == kernels.STATUS_NODE_LIMIT:
            raise SolveLimitReached(
                f"optimality not proven within the node limit ({node_limit})"
            )
        if status == kernels.STATUS_FOUND:
            # commit q: update running counts and value
            spent += cq
            pi, pj = indptr[q], indptr[q + 1]
            for t in range(pi, pj):
                voter = idx[t]
                value += float(delta[cnt[voter]])
                cnt[voter] += 1
        else:
            fixed[q] = 0
    bundle = _selection_to_bundle(fixed)
    return bundle


def solve_exact(instance: PBInstance, objective: Objective,
                node_limit: int = DEFAULT_NODE_LIMIT) -> OptimalResult:
    """Provably optimal bundle for the objective, or :class:`SolveLimitReached`.

    The reported bundle is the lexicographically smallest optimal one (by
    sorted index sequence), which makes ground-truth labels reproducible.
    Values are exact integers for av/cc and carry a 1e-9 tie tolerance for
    pav/weighted.
    """
    best_val, _sel = _maximize(instance, objective, node_limit)
    bundle = _lex_smallest_optimal(instance, objective, best_val, node_limit)
    value = objective.value(instance, bundle)
    return OptimalResult(bundle=bundle, value=value, proven_optimal=True)


def enumerate_optima(instance: PBInstance, objective: Objective, cap: int,
                     sample_limit: int = 8,
                     node_limit: int = DEFAULT_NODE_LIMIT) -> TieReport:
    """Count the distinct minimal optimal bundles, saturating at ``cap``."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    best_val, _sel = _maximize(instance, objective, node_limit)
    indptr, idx, n, costs, budget = _packed(instance)
    vindptr, vidx = instance.ballot_csr
    delta = _delta_table(objective, instance.num_projects)
    slack = budget * BUDGET_RTOL
    order = _density_order(instance)
    status, count, samples, num_samples, _nodes = kernels.bnb_count_minimal(
        indptr, idx, vindptr, vidx, n, costs, budget, delta, order,
        best_val, cap, sample_limit, node_limit, slack,
    )
    if status == kernels.STATUS_NODE_LIMIT:
        raise SolveLimitReached(
            f"tie enumeration exceeded the node limit ({node_limit})"
        )
    bundles = tuple(
        _selection_to_bundle(samples[i]) for i in range(num_samples)
    )
    return TieReport(
        count=int(count),
        saturated=count >= cap,
        sample_bundles=bundles,
        optimum_value=float(best_val),
    )
