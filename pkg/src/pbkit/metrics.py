"""Normalized evaluation of aggregation rules.

Scores are compared across instances by dividing by the exact optimum of the
respective dimension: the welfare ratio of a bundle is its social welfare over
the best achievable social welfare, the representation ratio likewise.  A rule
evaluated on a dataset becomes a single point (mean welfare ratio, mean
representation ratio); rules are compared by the RMSE between their point
lists, reported per dimension plus the total (the sum of the two components).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import PBInstance, representation, social_welfare


class DegenerateInstanceError(ValueError):
    """An optimum of zero makes the ratio undefined for this instance."""


@dataclass(frozen=True)
class RatioPair:
    """Welfare and representation of one bundle, normalized by the exact optima.

    The welfare ratio is reported unclamped: infeasible bundles (e.g. raw
    network outputs) can exceed 1; feasibility is tracked separately.
    """

    welfare_ratio: float
    representation_ratio: float


@dataclass(frozen=True)
class EvalPoint:
    """A rule's mean ratios over one dataset."""

    dataset_id: str
    mean_welfare_ratio: float
    mean_representation_ratio: float
    count: int


def ratio_pair(instance: PBInstance, bundle, opt_sw: int, opt_rep: int) -> RatioPair:
    """Componentwise ratios against caller-supplied exact optima."""
    if opt_sw <= 0 or opt_rep <= 0:
        raise DegenerateInstanceError(
            f"optima must be positive, got SW*={opt_sw}, REP*={opt_rep}"
        )
    return RatioPair(
        welfare_ratio=social_welfare(instance, bundle) / opt_sw,
        representation_ratio=representation(instance, bundle) / opt_rep,
    )


def dataset_point(dataset_id: str, pairs: Sequence[RatioPair]) -> EvalPoint:
    """Arithmetic mean of per-instance ratio pairs."""
    if not pairs:
        raise ValueError(f"dataset {dataset_id!r} has no ratio pairs to average")
    return EvalPoint(
        dataset_id=dataset_id,
        mean_welfare_ratio=float(np.mean([p.welfare_ratio for p in pairs])),
        mean_representation_ratio=float(
            np.mean([p.representation_ratio for p in pairs])
        ),
        count=len(pairs),
    )


def rmse_distance(pred_points: Sequence[EvalPoint],
                  gt_points: Sequence[EvalPoint]) -> tuple[float, float, float]:
    """Root-mean-square distance between two rules' dataset points.

    Returns ``(welfare_rmse, representation_rmse, total)`` with the total
    defined as the sum of the two components.  Point lists must cover the same
    datasets in the same order.
    """
    if len(pred_points) != len(gt_points) or not pred_points:
        raise ValueError("point lists must be non-empty and equally long")
    for a, b in zip(pred_points, gt_points):
        if a.dataset_id != b.dataset_id:
            raise ValueError(
                f"dataset mismatch: {a.dataset_id!r} vs {b.dataset_id!r}"
            )
    dw = np.array(
        [a.mean_welfare_ratio - b.mean_welfare_ratio
         for a, b in zip(pred_points, gt_points)]
    )
    dr = np.array(
        [a.mean_representation_ratio - b.mean_representation_ratio
         for a, b in zip(pred_points, gt_points)]
    )
    welfare_rmse = float(np.sqrt(np.mean(dw ** 2)))
    representation_rmse = float(np.sqrt(np.mean(dr ** 2)))
    return welfare_rmse, representation_rmse, welfare_rmse + representation_rmse


def jaccard(a: Iterable, b: Iterable) -> float:
    """Set similarity |a n b| / |a u b|; two empty bundles count as identical."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)
