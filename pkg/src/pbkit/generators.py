"""Seeded construction of the synthetic PB instance families.

Four families are provided:

* ``euc``  -- 2-d spatial model: voters and projects placed in the unit square,
  each voter approving its nearest projects, with mixed cost/coordinate/ballot
  sub-models.
* ``ovm``  -- one big budget-exhausting project versus several small ones.
* ``toav`` -- disjoint voter groups with per-group project blocks, where
  welfare and representation pull in opposite directions.
* ``tocc`` -- a large bloc approving a shared slate plus a minority sharing a
  single project, with analytically known optima.

All generation is a pure function of (parameters, seed).  The trade-off
families use unit costs and an integer budget so their analytic identities
stay exact; scaling happens only at export time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import PBInstance
from .rules import Objective, SolveLimitReached, solve_exact

logger = logging.getLogger(__name__)

COST_MODELS = ("uniform", "exponential", "normal")
COORD_MODELS = ("uniform", "gaussian")
K_MODELS = ("uniform", "normal")

#: Voter-count ranges per size regime of the spatial family.
EUC_REGIMES = {
    "small": (20, 100),
    "medium": (100, 500),
    "large": (500, 1000),
    "xlarge": (1000, 10000),
}

FAMILIES = ("euc", "ovm", "toav", "tocc")


@dataclass(frozen=True)
class SizeRegime:
    """A named voter-count range."""

    name: str
    voter_range: tuple[int, int]

    @classmethod
    def named(cls, name: str) -> "SizeRegime":
        if name not in EUC_REGIMES:
            raise ValueError(f"unknown size regime {name!r}")
        return cls(name, EUC_REGIMES[name])


@dataclass(frozen=True)
class EucParams:
    """Sub-model configuration of the spatial family.

    ``None`` for a model field means "draw one of the variants with equal
    probability per instance".  Ranges are inclusive.
    """

    project_range: tuple[int, int] = (20, 50)
    budget_range: tuple[float, float] = (10_000.0, 250_000.0)
    cost_model: str | None = None
    voter_coord_model: str | None = None
    project_coord_model: str | None = None
    k_model: str | None = None
    gaussian_sigmas: tuple[float, ...] = (0.1, 0.2, 0.3)
    k_normal_scales: tuple[float, ...] = (3.0, 2.5, 2.0)
    exp_min_costs: tuple[float, ...] = (10.0, 20.0, 500.0, 1000.0)
    exp_mean_costs: tuple[float, ...] = (10_000.0, 15_000.0, 30_000.0)
    cost_uniform_range: tuple[float, float] = (100.0, 100_000.0)

    def __post_init__(self):
        for name, allowed in (
            ("cost_model", COST_MODELS),
            ("voter_coord_model", COORD_MODELS),
            ("project_coord_model", COORD_MODELS),
            ("k_model", K_MODELS),
        ):
            value = getattr(self, name)
            if value is not None and value not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {value!r}")


@dataclass(frozen=True)
class LabeledExample:
    """A training triplet: instance, optimal bundle, and the rule that produced it."""

    instance: PBInstance
    label_bundle: frozenset
    label_rule: str


def _coords(rng, count, model, sigmas):
    if model == "uniform":
        return rng.uniform(0.0, 1.0, size=(count, 2))
    sigma = float(rng.choice(sigmas))
    return np.clip(rng.normal(0.5, sigma, size=(count, 2)), 0.0, 1.0)


def _euc_costs(rng, m, budget, model, params: EucParams):
    if model == "uniform":
        lo, hi = params.cost_uniform_range
        return rng.uniform(lo, hi, size=m)
    if model == "exponential":
        min_cost = float(rng.choice(params.exp_min_costs))
        mean_cost = float(rng.choice(params.exp_mean_costs))
        return min_cost + rng.exponential(mean_cost - min_cost, size=m)
    # normal costs around half the budget, truncated at one currency unit
    costs = rng.normal(budget / 2.0, budget / 5.0, size=m)
    while np.any(costs < 1.0):
        bad = costs < 1.0
        costs[bad] = rng.normal(budget / 2.0, budget / 5.0, size=int(bad.sum()))
    return costs


def gen_euc(params: EucParams, regime: SizeRegime, seed) -> PBInstance:
    """Spatial instance: each voter approves its ``k_v`` nearest projects."""
    rng = np.random.default_rng(seed)
    lo, hi = regime.voter_range
    while True:
        n = int(rng.integers(lo, hi + 1))
        m = int(rng.integers(params.project_range[0], params.project_range[1] + 1))
        budget = float(rng.uniform(*params.budget_range))
        cost_model = params.cost_model or str(rng.choice(COST_MODELS))
        costs = _euc_costs(rng, m, budget, cost_model, params)
        voter_model = params.voter_coord_model or str(rng.choice(COORD_MODELS))
        project_model = params.project_coord_model or str(rng.choice(COORD_MODELS))
        voters = _coords(rng, n, voter_model, params.gaussian_sigmas)
        projects = _coords(rng, m, project_model, params.gaussian_sigmas)
        k_model = params.k_model or str(rng.choice(K_MODELS))
        if k_model == "uniform":
            k = rng.integers(1, int(0.75 * m) + 1, size=n)
        else:
            scale = float(rng.choice(params.k_normal_scales))
            k = np.clip(np.rint(rng.normal(m / scale, 3.0, size=n)), 1, m).astype(int)
        if float(costs.min()) > budget:
            continue  # resample: no affordable project
        d2 = ((voters[:, None, :] - projects[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")  # ties to the lower index
        approvals = tuple(
            frozenset(map(int, nearest[i, : k[i]])) for i in range(n)
        )
        return PBInstance(approvals=approvals, costs=costs, budget=budget)


#: (approvers per small project, extra-voter range) per size preset.
OVM_PRESETS = {
    "small": (100, 100, (3, 409)),
    # widened pool so totals span roughly [61, 50000] voters
    "large": (29, 9918, (3, 409)),
}


def gen_ovm(seed, preset: str = "small") -> PBInstance:
    """One big project against 2..5 small ones that jointly exhaust the budget.

    Each small project is approved by ``a`` voters drawn without replacement
    from a shared pool of ``a * p`` voters; the big project costs the whole
    budget and is approved by ``v`` fresh voters.
    """
    a_lo, a_hi, (v_lo, v_hi) = OVM_PRESETS[preset]
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 6))
    a = int(rng.integers(a_lo, a_hi + 1)) if a_hi > a_lo else a_lo
    v = int(rng.integers(v_lo, v_hi + 1))
    pool = a * p
    ballots: list[set] = [set() for _ in range(pool + v)]
    for j in range(p):
        for voter in rng.choice(pool, size=a, replace=False):
            ballots[int(voter)].add(j)
    for voter in range(pool, pool + v):
        ballots[voter].add(p)
    costs = np.ones(p + 1)
    costs[p] = float(p)  # the big project consumes the entire budget
    return PBInstance(
        approvals=tuple(frozenset(b) for b in ballots),
        costs=costs,
        budget=float(p),
    )


#: (x range, x' range) per size preset; voters total m*x + x'.
TOAV_PRESETS = {
    "small": ((5, 20), (1, 100)),
    # widened so totals span roughly [66, 1000] voters
    "large": ((20, 100), (6, 300)),
}


@dataclass(frozen=True)
class ToavShape:
    m: int
    x: int
    x_extra: int


def toav_shape(seed, preset: str = "small") -> ToavShape:
    (x_lo, x_hi), (e_lo, e_hi) = TOAV_PRESETS[preset]
    rng = np.random.default_rng(seed)
    return ToavShape(
        m=int(rng.integers(3, 8)),
        x=int(rng.integers(x_lo, x_hi + 1)),
        x_extra=int(rng.integers(e_lo, e_hi + 1)),
    )


def gen_toav(seed, preset: str = "small") -> PBInstance:
    """Disjoint-group trade-off instance: m groups over m*m unit-cost projects.

    Group g's voters all approve the block ``g*m .. g*m+m-1``; the first group
    has x + x' voters, the rest x.  Exactly m projects fit the budget, so the
    welfare optimum (fund the largest group's block, value m*(x+x')) excludes
    most voters while the representation optimum (one project per group, value
    m*x + x') caps welfare at the same number.
    """
    shape = toav_shape(seed, preset)
    m, x, xp = shape.m, shape.x, shape.x_extra
    approvals = []
    sizes = [x + xp] + [x] * (m - 1)
    for g, size in enumerate(sizes):
        block = frozenset(range(g * m, g * m + m))
        approvals.extend([block] * size)
    return PBInstance(tuple(approvals), np.ones(m * m), float(m))


#: n1 range per size preset; voters total n1 + n2 with n2 in [n1, 2*n1].
TOCC_PRESETS = {"small": (3, 24), "large": (8, 40)}


@dataclass(frozen=True)
class ToccShape:
    n1: int
    n2: int


def tocc_shape(seed, preset: str = "small") -> ToccShape:
    lo, hi = TOCC_PRESETS[preset]
    rng = np.random.default_rng(seed)
    n1 = int(rng.integers(lo, hi + 1))
    n2 = int(rng.integers(n1, 2 * n1 + 1))
    return ToccShape(n1=n1, n2=n2)


def gen_tocc(seed, preset: str = "small") -> PBInstance:
    """Coverage trade-off instance: 2*n1 unit-cost projects, budget n1.

    n2 voters approve the first n1 projects; n1 voters all approve one shared
    extra project; the remaining n1 - 1 projects get no approvals.  The best
    representation (n1 + n2) is reached by the shared project plus n1 - 1
    slate projects, with welfare n2*(n1-1) + n1; the best welfare (n1*n2)
    funds the whole slate but represents only n2 voters.
    """
    shape = tocc_shape(seed, preset)
    n1, n2 = shape.n1, shape.n2
    approvals = [frozenset(range(n1))] * n2 + [frozenset({n1})] * n1
    return PBInstance(tuple(approvals), np.ones(2 * n1), float(n1))


def generate(family: str, seed, regime: str = "small",
             euc_params: EucParams | None = None) -> PBInstance:
    """Dispatch to one family generator by name."""
    if family == "euc":
        return gen_euc(euc_params or EucParams(), SizeRegime.named(regime), seed)
    if family == "ovm":
        return gen_ovm(seed, preset="large" if regime in ("large", "xlarge") else "small")
    if family == "toav":
        return gen_toav(seed, preset="large" if regime in ("large", "xlarge") else "small")
    if family == "tocc":
        return gen_tocc(seed, preset="large" if regime in ("large", "xlarge") else "small")
    raise ValueError(f"unknown family {family!r}")


_FAMILY_STREAM = {"euc": 0, "ovm": 1, "toav": 2, "tocc": 3}


def instance_seed(family: str, seed: int, index: int, attempt: int = 0) -> tuple:
    """Derived seed for the index-th instance of a family within a dataset seed."""
    return (seed, _FAMILY_STREAM[family], index, attempt)


def build_training_set(counts: dict, rule: str, seed,
                       regime: str = "small",
                       euc_params: EucParams | None = None,
                       node_limit: int | None = None) -> list[LabeledExample]:
    """Generate instances per family and label each with its exact optimum.

    ``counts`` maps family names to instance counts.  Instances whose exact
    solve exceeds the search budget are resampled (with a logged count), so the
    returned list always has the requested size.
    """
    if rule not in ("av", "cc", "pav"):
        raise ValueError(f"label rule must be av, cc or pav, got {rule!r}")
    objective = Objective(rule)
    kwargs = {} if node_limit is None else {"node_limit": node_limit}
    out: list[LabeledExample] = []
    resampled = 0
    for family in FAMILIES:
        count = int(counts.get(family, 0))
        for i in range(count):
            attempt = 0
            while True:
                instance = generate(
                    family, instance_seed(family, seed, i, attempt), regime, euc_params
                )
                try:
                    result = solve_exact(instance, objective, **kwargs)
                except SolveLimitReached:
                    attempt += 1
                    resampled += 1
                    continue
                out.append(LabeledExample(instance, result.bundle, rule))
                break
    if resampled:
        logger.info("resampled %d instances after solver limit", resampled)
    return out


@dataclass(frozen=True)
class MixtureSource:
    """Where mixture examples are drawn from: the low-tie families.

    ``pool_size`` distinct instances are generated (default: one per example)
    and examples sample from the pool with repetition, so one instance can
    occur once with a welfare label and once with a representation label.
    """

    families: tuple[str, ...] = ("euc", "ovm")
    weights: tuple[float, ...] = (0.75, 0.25)
    regime: str = "small"
    euc_params: EucParams | None = None
    pool_size: int | None = None

    def __post_init__(self):
        if len(self.families) != len(self.weights) or not self.families:
            raise ValueError("families and weights must align and be non-empty")
        for f in self.families:
            if f not in ("euc", "ovm"):
                raise ValueError("mixture sources are the low-tie families euc/ovm")


def build_mixture_set(p: float, n: int, source: MixtureSource, seed,
                      node_limit: int | None = None) -> list[LabeledExample]:
    """Blend of welfare- and representation-labeled examples.

    Exactly ``round(p * n)`` examples carry the exact welfare optimum as label
    and the remaining ``n - round(p * n)`` the exact representation optimum.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng((seed, 17))
    pool_size = source.pool_size or n
    weights = np.asarray(source.weights, dtype=float)
    weights = weights / weights.sum()
    pool_families = [
        str(f) for f in rng.choice(source.families, size=pool_size, p=weights)
    ]
    pool = [
        generate(fam, (seed, 23, i), source.regime, source.euc_params)
        for i, fam in enumerate(pool_families)
    ]
    picks = rng.integers(0, pool_size, size=n)
    n_av = int(round(p * n))
    label_is_av = np.zeros(n, dtype=bool)
    label_is_av[rng.permutation(n)[:n_av]] = True
    kwargs = {} if node_limit is None else {"node_limit": node_limit}
    cache: dict[tuple[int, str], frozenset] = {}
    out = []
    for pos in range(n):
        idx = int(picks[pos])
        rule = "av" if label_is_av[pos] else "cc"
        key = (idx, rule)
        if key not in cache:
            cache[key] = solve_exact(pool[idx], Objective(rule), **kwargs).bundle
        out.append(LabeledExample(pool[idx], cache[key], rule))
    return out
