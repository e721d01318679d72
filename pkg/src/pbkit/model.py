"""Core domain types for participatory budgeting and the scoring functions built on them.

A PB instance is a triple of approval ballots, per-project costs and a total
budget.  A bundle is a set of funded project indices; it is feasible when its
total cost stays within the budget.  Three per-bundle scores are provided:

* social welfare  -- total number of approvals of funded projects,
* representation  -- number of voters with at least one funded approved project,
* harmonic (PAV)  -- sum over voters of H(|A_i n B|), with H the harmonic numbers.

All types are immutable after construction and all operations are pure, so they
can be used freely from parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# Relative slack used whenever float costs are summed against a budget.  With
# integer costs this never changes a decision; with budget-normalized costs it
# absorbs accumulation error (e.g. five times 0.2 summing to 1 + 2**-52).
BUDGET_RTOL = 1e-9

Bundle = frozenset  # set of project indices, validated against an instance on use


@dataclass(frozen=True)
class PBInstance:
    """An approval-based participatory budgeting instance.

    Parameters
    ----------
    approvals : tuple of frozenset of int
        One approval set per voter, containing indices in ``[0, num_projects)``.
        Empty ballots are allowed (they contribute 0 to every score).
    costs : numpy.ndarray
        Strictly positive per-project costs, in currency units.
    budget : float
        Total budget, same units as ``costs``.
    project_ids : tuple of str, optional
        Original external identifiers (kept by the Pabulib reader so reports
        can use the published ids); purely informational.
    """

    approvals: tuple[frozenset, ...]
    costs: np.ndarray
    budget: float
    project_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        costs = np.array(self.costs, dtype=np.float64)  # own copy, then frozen
        costs.flags.writeable = False
        object.__setattr__(self, "costs", costs)
        object.__setattr__(
            self, "approvals", tuple(frozenset(a) for a in self.approvals)
        )
        m = costs.shape[0]
        if costs.ndim != 1:
            raise ValueError("costs must be a 1-d array")
        if m == 0:
            raise ValueError("instance needs at least one project")
        if not np.all(costs > 0):
            raise ValueError("all project costs must be strictly positive")
        if not self.budget > 0:
            raise ValueError("budget must be strictly positive")
        if float(costs.min()) > self.budget * (1.0 + BUDGET_RTOL):
            raise ValueError("no project fits the budget; instance rejected")
        for i, ballot in enumerate(self.approvals):
            for p in ballot:
                if not 0 <= p < m:
                    raise ValueError(f"voter {i} approves unknown project {p}")
        if self.project_ids is not None and len(self.project_ids) != m:
            raise ValueError("project_ids length must equal the number of projects")

    @property
    def num_voters(self) -> int:
        return len(self.approvals)

    @property
    def num_projects(self) -> int:
        return int(self.costs.shape[0])

    @cached_property
    def approval_matrix(self) -> np.ndarray:
        """Dense ``(num_voters, num_projects)`` boolean vote matrix (read-only)."""
        mat = np.zeros((self.num_voters, self.num_projects), dtype=bool)
        for i, ballot in enumerate(self.approvals):
            if ballot:
                mat[i, list(ballot)] = True
        mat.flags.writeable = False
        return mat

    @cached_property
    def approver_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Project-major CSR view: (indptr, voter_indices) of each project's approvers."""
        counts = np.zeros(self.num_projects + 1, dtype=np.int64)
        for ballot in self.approvals:
            for p in ballot:
                counts[p + 1] += 1
        indptr = np.cumsum(counts)
        idx = np.empty(int(indptr[-1]), dtype=np.int32)
        cursor = indptr[:-1].copy()
        for i, ballot in enumerate(self.approvals):
            for p in sorted(ballot):
                idx[cursor[p]] = i
                cursor[p] += 1
        indptr.flags.writeable = False
        idx.flags.writeable = False
        return indptr, idx

    @cached_property
    def ballot_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Voter-major CSR view: (indptr, project_indices) of each ballot."""
        indptr = np.zeros(self.num_voters + 1, dtype=np.int64)
        for i, ballot in enumerate(self.approvals):
            indptr[i + 1] = indptr[i] + len(ballot)
        idx = np.empty(int(indptr[-1]), dtype=np.int32)
        for i, ballot in enumerate(self.approvals):
            idx[indptr[i] : indptr[i + 1]] = sorted(ballot)
        indptr.flags.writeable = False
        idx.flags.writeable = False
        return indptr, idx

    @cached_property
    def approval_counts(self) -> np.ndarray:
        """Number of approvers per project (read-only int64 array)."""
        deg = np.zeros(self.num_projects, dtype=np.int64)
        for ballot in self.approvals:
            for p in ballot:
                deg[p] += 1
        deg.flags.writeable = False
        return deg

    def _bundle_array(self, bundle: Iterable) -> np.ndarray:
        sel = np.fromiter((int(p) for p in bundle), dtype=np.int64)
        if sel.size and (sel.min() < 0 or sel.max() >= self.num_projects):
            raise IndexError("bundle contains an invalid project index")
        if sel.size != np.unique(sel).size:
            raise ValueError("bundle contains duplicate project indices")
        return sel


def harmonic_numbers(upto: int) -> np.ndarray:
    """Prefix harmonic numbers ``H_0..H_upto`` in double precision."""
    h = np.zeros(upto + 1, dtype=np.float64)
    if upto >= 1:
        h[1:] = np.cumsum(1.0 / np.arange(1, upto + 1, dtype=np.float64))
    return h


def feasible(instance: PBInstance, bundle: Iterable) -> bool:
    """True iff the bundle's total cost stays within the budget.

    The comparison uses a relative slack of ``BUDGET_RTOL`` so that
    budget-normalized float costs whose exact sum equals the budget are not
    rejected for accumulation error.
    """
    sel = instance._bundle_array(bundle)
    total = float(instance.costs[sel].sum()) if sel.size else 0.0
    return total <= instance.budget * (1.0 + BUDGET_RTOL)


def intersection_counts(instance: PBInstance, bundle: Iterable) -> np.ndarray:
    """Per-voter count of funded approved projects, ``|A_i n B|``."""
    sel = instance._bundle_array(bundle)
    if sel.size == 0:
        return np.zeros(instance.num_voters, dtype=np.int64)
    return instance.approval_matrix[:, sel].sum(axis=1, dtype=np.int64)


def social_welfare(instance: PBInstance, bundle: Iterable) -> int:
    """Total number of approvals of funded projects, summed over voters.

    Feasibility is not required: surrogate losses may evaluate overfull
    bundles, whose welfare can exceed the feasible optimum.
    """
    return int(intersection_counts(instance, bundle).sum())


def representation(instance: PBInstance, bundle: Iterable) -> int:
    """Number of voters with at least one funded approved project."""
    return int(np.count_nonzero(intersection_counts(instance, bundle)))


def pav_score(instance: PBInstance, bundle: Iterable) -> float:
    """Harmonic proportional-approval score, sum over voters of H(|A_i n B|).

    Accumulated from a precomputed harmonic prefix table in double precision;
    equality comparisons against this value should use a 1e-9 tolerance.
    """
    counts = intersection_counts(instance, bundle)
    h = harmonic_numbers(instance.num_projects)
    return float(h[counts].sum())


def greedy_fill_from_scores(instance: PBInstance, scores: Sequence[float]) -> frozenset:
    """Select projects greedily by decreasing score until the budget is exhausted.

    Projects are considered once, in decreasing score order with ties broken by
    the lower index; a project is added iff it still fits the remaining budget.
    Skipped projects are not revisited, so the result is feasible and no project
    was ever passed over for a non-budget reason.
    """
    sc = np.asarray(scores, dtype=np.float64)
    if sc.shape != (instance.num_projects,):
        raise ValueError("scores length must equal the number of projects")
    if not np.all(np.isfinite(sc)):
        raise ValueError("scores must be finite")
    order = np.lexsort((np.arange(sc.size), -sc))
    selected = []
    remaining = instance.budget
    slack = instance.budget * BUDGET_RTOL
    for p in order:
        c = float(instance.costs[p])
        if c <= remaining + slack:
            selected.append(int(p))
            remaining -= c
    return frozenset(selected)


def validate_score_vector(scores: Sequence[float], num_projects: int) -> np.ndarray:
    """Check a per-project score vector: correct length, every entry in [0, 1]."""
    sc = np.asarray(scores, dtype=np.float64)
    if sc.shape != (num_projects,):
        raise ValueError(
            f"score vector has length {sc.size}, expected {num_projects}"
        )
    if not np.all(np.isfinite(sc)) or sc.min(initial=0.0) < 0.0 or sc.max(initial=0.0) > 1.0:
        raise ValueError("scores must lie in [0, 1]")
    return sc
