"""Independent brute-force oracles used to freeze expected values in tests.

Everything here is written from first principles with plain Python sets,
``itertools`` enumeration and exact ``Fraction`` arithmetic; it deliberately
shares no code path with the package's solvers or its numpy scoring, so the
two routes check each other.
"""

from fractions import Fraction
from itertools import combinations


def sw_oracle(approvals, bundle):
    b = set(bundle)
    return sum(len(set(a) & b) for a in approvals)


def rep_oracle(approvals, bundle):
    b = set(bundle)
    return sum(1 for a in approvals if set(a) & b)


def pav_oracle(approvals, bundle):
    """Exact harmonic score as a Fraction."""
    b = set(bundle)
    total = Fraction(0)
    for a in approvals:
        k = len(set(a) & b)
        total += sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))
    return total


def objective_oracle(kind, approvals, bundle, p=None):
    """Objective value as an exact Fraction (p is Fraction-converted)."""
    if kind == "av":
        return Fraction(sw_oracle(approvals, bundle))
    if kind == "cc":
        return Fraction(rep_oracle(approvals, bundle))
    if kind == "pav":
        return pav_oracle(approvals, bundle)
    if kind == "weighted":
        pf = Fraction(p).limit_denominator(10**12)
        return pf * sw_oracle(approvals, bundle) + (1 - pf) * rep_oracle(
            approvals, bundle
        )
    raise ValueError(kind)


def feasible_bundles(costs, budget):
    """All subsets of projects whose exact cost (as Fractions) fits the budget."""
    m = len(costs)
    fc = [Fraction(c).limit_denominator(10**12) for c in costs]
    fb = Fraction(budget).limit_denominator(10**12)
    out = []
    for size in range(m + 1):
        for combo in combinations(range(m), size):
            if sum((fc[j] for j in combo), Fraction(0)) <= fb:
                out.append(frozenset(combo))
    return out


def exhaustive_optimum(kind, approvals, costs, budget, p=None):
    """(optimal value, list of all optimal bundles) by full enumeration."""
    best = None
    winners = []
    for b in feasible_bundles(costs, budget):
        v = objective_oracle(kind, approvals, b, p)
        if best is None or v > best:
            best = v
            winners = [b]
        elif v == best:
            winners.append(b)
    return best, winners


def lex_smallest(bundles):
    """Smallest bundle by its sorted index sequence (prefixes sort first)."""
    return min(bundles, key=lambda b: tuple(sorted(b)))


def minimal_optima(kind, approvals, costs, budget, p=None):
    """All optimal bundles from which no single project can be dropped
    without strictly lowering the objective."""
    best, winners = exhaustive_optimum(kind, approvals, costs, budget, p)
    out = []
    for b in winners:
        if all(
            objective_oracle(kind, approvals, b - {j}, p) < best for j in b
        ):
            out.append(b)
    return best, out
