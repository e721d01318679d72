"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
complete.  Tolerances are fixed here, not calibrated elsewhere.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from pbkit import exchange
from pbkit.generators import (
    EucParams,
    SizeRegime,
    gen_euc,
    gen_toav,
    gen_tocc,
    instance_seed,
    toav_shape,
    tocc_shape,
)
from pbkit.metrics import EvalPoint, jaccard, ratio_pair, rmse_distance
from pbkit.model import PBInstance, feasible, representation, social_welfare
from pbkit.pabulib import read_pabulib_file
from pbkit.rules import (
    Objective,
    enumerate_optima,
    solve_exact,
    solve_random,
    solve_sequential,
)

FIXTURES = Path(__file__).parent / "fixtures"
EUC_SMALL = SizeRegime.named("small")


def _report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# helpers: an independent float enumeration oracle over approval bitmasks
# ---------------------------------------------------------------------------


def _enumerate_all_objectives(approvals, costs, budget):
    """Optimal value per objective kind by full subset enumeration.

    Integer costs keep feasibility exact; counts per voter come from bitmask
    intersections, sharing nothing with the package's search kernels.
    """
    m = len(costs)
    n = len(approvals)
    voter_masks = [sum(1 << p for p in ballot) for ballot in approvals]
    harmonics = [0.0]
    for k in range(1, m + 1):
        harmonics.append(harmonics[-1] + 1.0 / k)
    best = {"av": -1.0, "cc": -1.0, "pav": -1.0, "w30": -1.0, "w70": -1.0}
    for mask in range(1 << m):
        cost = 0
        mm = mask
        while mm:
            cost += costs[(mm & -mm).bit_length() - 1]
            mm &= mm - 1
        if cost > budget:
            continue
        sw = rep = 0
        pav = 0.0
        for vm in voter_masks:
            k = (vm & mask).bit_count()
            sw += k
            rep += 1 if k else 0
            pav += harmonics[k]
        values = {
            "av": float(sw),
            "cc": float(rep),
            "pav": pav,
            "w30": 0.3 * sw + 0.7 * rep,
            "w70": 0.7 * sw + 0.3 * rep,
        }
        for key, v in values.items():
            if v > best[key]:
                best[key] = v
    return best


def _random_small_instance(rng):
    n = int(rng.integers(2, 41))
    m = int(rng.integers(2, 13))
    costs = [int(c) for c in rng.integers(1, 7, size=m)]
    budget = int(rng.integers(min(costs), sum(costs) + 1))
    approvals = []
    for _ in range(n):
        k = int(rng.integers(0, m + 1))
        approvals.append(frozenset(map(int, rng.choice(m, size=k, replace=False))))
    return PBInstance(tuple(approvals), np.array(costs, dtype=float), float(budget))


OBJECTIVES = {
    "av": Objective.av(),
    "cc": Objective.cc(),
    "pav": Objective.pav(),
    "w30": Objective.weighted(0.3),
    "w70": Objective.weighted(0.7),
}


def test_oracle_equivalence_200_instances():
    rng = np.random.default_rng(2024)
    t0 = time.time()
    worst = 0.0
    for trial in range(200):
        inst = _random_small_instance(rng)
        best = _enumerate_all_objectives(
            inst.approvals, [int(c) for c in inst.costs], inst.budget
        )
        for key, objective in OBJECTIVES.items():
            res = solve_exact(inst, objective)
            err = abs(res.value - best[key])
            worst = max(worst, err)
            tol = 0.0 if objective.is_integral() else 1e-9
            assert err <= tol, (trial, key, res.value, best[key])
    elapsed = time.time() - t0
    _report(
        "oracle equivalence",
        elapsed < 300.0,
        f"200 instances x {len(OBJECTIVES)} objectives, "
        f"max deviation {worst:.2e}, {elapsed:.1f}s (< 300s)",
    )


def test_analytic_family_identities():
    checked_pow = 0
    for i in range(100):
        seed = instance_seed("toav", 77, i)
        shape = toav_shape(seed)
        inst = gen_toav(seed)
        assert solve_exact(inst, Objective.av()).value == shape.m * (shape.x + shape.x_extra)
        assert solve_exact(inst, Objective.cc()).value == shape.m * shape.x + shape.x_extra
        if shape.m <= 4:
            rep = enumerate_optima(inst, Objective.cc(), cap=1_000_000)
            assert rep.count == shape.m ** shape.m, (i, shape)
            checked_pow += 1
    for i in range(100):
        seed = instance_seed("tocc", 78, i)
        shape = tocc_shape(seed)
        inst = gen_tocc(seed)
        cc = solve_exact(inst, Objective.cc())
        assert cc.value == shape.n1 + shape.n2
        assert social_welfare(inst, cc.bundle) == shape.n2 * (shape.n1 - 1) + shape.n1
        rep = enumerate_optima(inst, Objective.cc(), cap=1_000_000)
        assert rep.count == shape.n1, (i, shape)
    _report(
        "analytic family identities",
        True,
        f"100+100 instances exact; optimum-count law verified on "
        f"{checked_pow} group-family instances with m <= 4",
    )


def test_weighted_curve_monotonicity():
    ps = [round(0.1 * k, 1) for k in range(11)]
    sums_sw = {p: 0 for p in ps}
    sums_rep = {p: 0 for p in ps}
    av_sw_total = 0
    cc_rep_total = 0
    count = 200
    for i in range(count):
        inst = gen_euc(EucParams(), EUC_SMALL, instance_seed("euc", 99, i))
        av = solve_exact(inst, Objective.av())
        cc = solve_exact(inst, Objective.cc())
        av_sw_total += int(av.value)
        cc_rep_total += int(cc.value)
        for p in ps:
            bundle = solve_exact(inst, Objective.weighted(p)).bundle
            sums_sw[p] += social_welfare(inst, bundle)
            sums_rep[p] += representation(inst, bundle)
    mean_sw = [sums_sw[p] / count for p in ps]
    mean_rep = [sums_rep[p] / count for p in ps]
    nondecreasing = all(a <= b for a, b in zip(mean_sw, mean_sw[1:]))
    nonincreasing = all(a >= b for a, b in zip(mean_rep, mean_rep[1:]))
    endpoints = (
        sums_sw[1.0] == av_sw_total and sums_rep[0.0] == cc_rep_total
    )
    _report(
        "weighted-curve monotonicity",
        nondecreasing and nonincreasing and endpoints,
        f"mean welfare {mean_sw[0]:.1f} -> {mean_sw[-1]:.1f} non-decreasing="
        f"{nondecreasing}, mean representation {mean_rep[0]:.1f} -> "
        f"{mean_rep[-1]:.1f} non-increasing={nonincreasing}, "
        f"endpoints exact={endpoints}",
    )


def test_random_baseline_gap():
    count = 500
    random_ratios = np.empty(count)
    sequential_ratios = np.empty(count)
    for i in range(count):
        inst = gen_euc(EucParams(), EUC_SMALL, instance_seed("euc", 500, i))
        opt = solve_exact(inst, Objective.av()).value
        random_ratios[i] = social_welfare(inst, solve_random(inst, (500, i))) / opt
        sequential_ratios[i] = social_welfare(
            inst, solve_sequential(inst, Objective.av())
        ) / opt
    rnd = float(random_ratios.mean())
    seq = float(sequential_ratios.mean())
    ok = 0.45 <= rnd <= 0.62 and seq - rnd >= 0.10
    _report(
        "random-baseline gap",
        ok,
        f"random mean welfare ratio {rnd:.3f} in [0.45, 0.62], "
        f"sequential {seq:.3f} exceeds it by {seq - rnd:.3f} (>= 0.10)",
    )


def test_tie_profile():
    count = 200
    av_counts = np.empty(count)
    cc_counts = np.empty(count)
    for i in range(count):
        inst = gen_euc(EucParams(), EUC_SMALL, instance_seed("euc", 321, i))
        av_counts[i] = enumerate_optima(inst, Objective.av(), cap=1000).count
        cc_counts[i] = enumerate_optima(inst, Objective.cc(), cap=1000).count
    av_mean = float(av_counts.mean())
    cc_mean = float(cc_counts.mean())
    ok = 1.0 <= av_mean <= 1.8 and cc_mean >= 10.0
    _report(
        "tie profile",
        ok,
        f"mean optimum count: welfare rule {av_mean:.2f} in [1.0, 1.8]; "
        f"coverage rule {cc_mean:.1f} (>= 10, cap 1000)",
    )


def test_metrics_algebra(toy):
    pred = [EvalPoint("d0", 0.9, 1.0, 1), EvalPoint("d1", 0.8, 0.9, 1)]
    gt = [EvalPoint("d0", 1.0, 1.0, 1), EvalPoint("d1", 1.0, 0.9, 1)]
    w, r, total = rmse_distance(pred, gt)
    hand_w = np.sqrt((0.1 ** 2 + 0.2 ** 2) / 2)
    algebra_ok = abs(w - hand_w) <= 1e-9 and r == 0.0 and total == w + r

    rng = np.random.default_rng(5)
    sums_ok = True
    for _ in range(200):
        k = int(rng.integers(1, 8))
        a = [EvalPoint(f"d{i}", *rng.uniform(0, 1, 2), 1) for i in range(k)]
        b = [EvalPoint(f"d{i}", *rng.uniform(0, 1, 2), 1) for i in range(k)]
        w, r, total = rmse_distance(a, b)
        sums_ok &= total == w + r
        sums_ok &= rmse_distance(a, b) == rmse_distance(b, a)
        sums_ok &= rmse_distance(a, a) == (0.0, 0.0, 0.0)

    identity_ok = True
    for i in range(20):
        inst = gen_euc(EucParams(), EUC_SMALL, instance_seed("euc", 42, i))
        opt_sw = solve_exact(inst, Objective.av())
        opt_rep = solve_exact(inst, Objective.cc())
        pair = ratio_pair(inst, opt_sw.bundle, int(opt_sw.value), int(opt_rep.value))
        identity_ok &= pair.welfare_ratio == 1.0
        pair = ratio_pair(inst, opt_rep.bundle, int(opt_sw.value), int(opt_rep.value))
        identity_ok &= pair.representation_ratio == 1.0
        identity_ok &= jaccard(opt_sw.bundle, opt_sw.bundle) == 1.0

    ok = algebra_ok and sums_ok and identity_ok
    _report(
        "metrics algebra",
        ok,
        f"hand RMSE to 1e-9: {algebra_ok}; total=sum on 200 random point "
        f"lists: {sums_ok}; optimizer ratio identities: {identity_ok}",
    )


def test_pabulib_corpus(tmp_path):
    warsaw = sorted(
        p for p in (FIXTURES / "pabulib").glob("poland_warszawa_*.pb")
        if "oversize" not in p.name
    )
    parsed = 0
    records = []
    for path in warsaw:
        election = read_pabulib_file(path)
        inst = election.instance
        assert 20 <= inst.num_projects <= 50
        records.append(exchange.record_from_instance(path.stem, inst))
        parsed += 1

    # round-trip through the exchange format
    out = tmp_path / "poland.jsonl"
    exchange.write_dataset(records, out)
    loaded = exchange.read_dataset(out)
    out2 = tmp_path / "poland2.jsonl"
    exchange.write_dataset(loaded, out2)
    round_trip_ok = loaded == records and out.read_bytes() == out2.read_bytes()

    oversize = read_pabulib_file(
        FIXTURES / "pabulib" / "poland_warszawa_2018_zoliborz_oversize.pb"
    )
    filter_ok = oversize.instance.num_projects > 50

    ok = parsed >= 3 and round_trip_ok and filter_ok
    _report(
        "pabulib ingestion",
        ok,
        f"{parsed} Warsaw-format files parsed (>= 3), byte-stable round-trip: "
        f"{round_trip_ok}, oversize file exceeds the 50-project filter: {filter_ok}",
    )
