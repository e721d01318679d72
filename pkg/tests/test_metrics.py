import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pbkit.metrics import (
    DegenerateInstanceError,
    EvalPoint,
    RatioPair,
    dataset_point,
    jaccard,
    ratio_pair,
    rmse_distance,
)
from pbkit.rules import Objective, solve_exact

from .conftest import random_instance


def test_ratio_pair_toy(toy):
    pair = ratio_pair(toy, {1, 2}, opt_sw=5, opt_rep=3)
    assert pair.welfare_ratio == pytest.approx(0.6)
    assert pair.representation_ratio == pytest.approx(2 / 3, abs=1e-3)


def test_ratio_pair_optimum_identity():
    rng = np.random.default_rng(3)
    for _ in range(15):
        inst = random_instance(rng)
        opt_sw = solve_exact(inst, Objective.av())
        opt_rep = solve_exact(inst, Objective.cc())
        if opt_sw.value < 1 or opt_rep.value < 1:
            continue
        a = ratio_pair(inst, opt_sw.bundle, int(opt_sw.value), int(opt_rep.value))
        assert a.welfare_ratio == pytest.approx(1.0)
        b = ratio_pair(inst, opt_rep.bundle, int(opt_sw.value), int(opt_rep.value))
        assert b.representation_ratio == pytest.approx(1.0)


def test_ratio_pair_degenerate(toy):
    with pytest.raises(DegenerateInstanceError):
        ratio_pair(toy, {0}, opt_sw=0, opt_rep=3)


def test_ratio_pair_unclamped_for_infeasible(toy):
    # the full (infeasible) bundle exceeds the feasible optimum
    pair = ratio_pair(toy, {0, 1, 2}, opt_sw=5, opt_rep=3)
    assert pair.welfare_ratio > 1.0


def test_dataset_point_mean():
    pairs = [RatioPair(1.0, 1.0), RatioPair(0.5, 0.5)]
    pt = dataset_point("d", pairs)
    assert (pt.mean_welfare_ratio, pt.mean_representation_ratio) == (0.75, 0.75)
    assert pt.count == 2


def test_dataset_point_single_pair():
    pt = dataset_point("d", [RatioPair(0.4, 0.9)])
    assert (pt.mean_welfare_ratio, pt.mean_representation_ratio) == (0.4, 0.9)


def test_dataset_point_empty_errors():
    with pytest.raises(ValueError):
        dataset_point("d", [])


def _points(values):
    return [EvalPoint(f"d{i}", w, r, 1) for i, (w, r) in enumerate(values)]


def test_rmse_identical_is_zero():
    pts = _points([(0.9, 0.8), (1.0, 0.7)])
    assert rmse_distance(pts, pts) == (0.0, 0.0, 0.0)


def test_rmse_hand_computed():
    pred = _points([(0.9, 1.0), (0.8, 0.9)])
    gt = _points([(1.0, 1.0), (1.0, 0.9)])
    w, r, total = rmse_distance(pred, gt)
    assert w == pytest.approx(np.sqrt((0.1 ** 2 + 0.2 ** 2) / 2), abs=1e-12)
    assert w == pytest.approx(0.158, abs=1e-3)
    assert r == 0.0
    assert total == pytest.approx(0.158, abs=1e-3)


def test_rmse_total_is_component_sum():
    rng = np.random.default_rng(8)
    for _ in range(30):
        k = int(rng.integers(1, 12))
        a = _points(rng.uniform(0, 1, size=(k, 2)))
        b = _points(rng.uniform(0, 1, size=(k, 2)))
        w, r, total = rmse_distance(a, b)
        assert total == w + r


def test_rmse_symmetric_and_zero_iff_equal():
    rng = np.random.default_rng(9)
    a = _points(rng.uniform(0, 1, size=(5, 2)))
    b = _points(rng.uniform(0, 1, size=(5, 2)))
    assert rmse_distance(a, b) == rmse_distance(b, a)
    w, r, total = rmse_distance(a, b)
    assert total > 0.0


def test_rmse_mismatched_ids_error():
    a = [EvalPoint("x", 1, 1, 1)]
    b = [EvalPoint("y", 1, 1, 1)]
    with pytest.raises(ValueError):
        rmse_distance(a, b)
    with pytest.raises(ValueError):
        rmse_distance(a, [])


def test_jaccard_cases():
    assert jaccard({1, 2}, {1, 2}) == 1.0
    assert jaccard({1}, {2}) == 0.0
    assert jaccard({1, 2}, {2, 3}) == pytest.approx(1 / 3)
    assert jaccard(set(), set()) == 1.0


@given(st.sets(st.integers(0, 10)), st.sets(st.integers(0, 10)))
@settings(max_examples=100, deadline=None)
def test_jaccard_bounds_and_symmetry(a, b):
    v = jaccard(a, b)
    assert 0.0 <= v <= 1.0
    assert v == jaccard(b, a)
    assert jaccard(a, a) == 1.0
