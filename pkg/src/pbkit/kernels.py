"""Hot numeric kernels for the solvers.

Everything here operates on packed arrays (project-major CSR of approver
indices, float cost vector, a per-count marginal table) so the inner loops can
be JIT-compiled.  By default the kernels are compiled with numba; setting the
environment variable ``PBKIT_DISABLE_NUMBA=1`` before import selects the
interpreted fallback path instead (same algorithms, plus vectorized numpy
variants where they exist).  ``benchmarks/bench_kernels.py`` compares the two.

The objective is encoded by ``delta``: ``delta[k]`` is the marginal value a
voter contributes when its count of funded approved projects grows from ``k``
to ``k + 1``.  All four objectives used by the package are concave in the
count (``delta`` non-increasing), which makes the bundle value submodular and
the fractional-knapsack bound over current marginal gains valid.

Status codes returned by the search kernels:

* ``STATUS_OK``        -- search completed, result proven.
* ``STATUS_NODE_LIMIT``-- node budget exhausted before completion.
* ``STATUS_FOUND``     -- reachability search hit the target value.
"""

from __future__ import annotations

import os

import numpy as np

STATUS_OK = 0
STATUS_NODE_LIMIT = 1
STATUS_FOUND = 2

# Strictly-greater margin for float value comparisons inside the search; the
# solver-level tie tolerance (1e-9) is applied by the callers.
_EPS = 1e-12
_TIE_TOL = 1e-9


def numba_enabled() -> bool:
    """True when the compiled kernel path is active."""
    return _USE_NUMBA


def _use_numba_from_env() -> bool:
    flag = os.environ.get("PBKIT_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


# --------------------------------------------------------------------------
# scoring
# --------------------------------------------------------------------------


def _counts_for_selection(indptr, idx, num_voters, selected):
    """Per-voter count of selected approved projects from the project CSR."""
    cnt = np.zeros(num_voters, dtype=np.int32)
    m = selected.shape[0]
    for j in range(m):
        if selected[j]:
            for t in range(indptr[j], indptr[j + 1]):
                cnt[idx[t]] += 1
    return cnt


def _counts_for_selection_numpy(indptr, idx, num_voters, selected):
    """Vectorized fallback of :func:`_counts_for_selection`."""
    cnt = np.zeros(num_voters, dtype=np.int32)
    for j in np.flatnonzero(selected):
        np.add.at(cnt, idx[indptr[j] : indptr[j + 1]], 1)
    return cnt


# --------------------------------------------------------------------------
# greedy marginal-gain selection
# --------------------------------------------------------------------------


def _sequential_select(indptr, idx, num_voters, costs, budget, delta, slack):
    """Repeatedly add the affordable project with the largest marginal gain.

    Ties go to the lower project index; projects with zero gain are still
    added while they fit, so the loop ends only when nothing affordable is
    left.
    """
    m = costs.shape[0]
    cnt = np.zeros(num_voters, dtype=np.int32)
    selected = np.zeros(m, dtype=np.uint8)
    rem = budget
    while True:
        best_gain = -1.0
        best_j = -1
        for j in range(m):
            if selected[j] or costs[j] > rem + slack:
                continue
            g = 0.0
            for t in range(indptr[j], indptr[j + 1]):
                g += delta[cnt[idx[t]]]
            if g > best_gain + _EPS:
                best_gain = g
                best_j = j
        if best_j < 0:
            break
        for t in range(indptr[best_j], indptr[best_j + 1]):
            cnt[idx[t]] += 1
        rem -= costs[best_j]
        selected[best_j] = 1
    return selected


def _sequential_select_numpy(indptr, idx, num_voters, costs, budget, delta, slack):
    """Vectorized fallback: recompute all marginal gains each round with numpy."""
    m = costs.shape[0]
    proj_of_entry = np.repeat(np.arange(m), np.diff(indptr))
    cnt = np.zeros(num_voters, dtype=np.int64)
    selected = np.zeros(m, dtype=np.uint8)
    rem = float(budget)
    while True:
        gains = np.bincount(proj_of_entry, weights=delta[cnt[idx]], minlength=m)
        gains[selected == 1] = -1.0
        gains[costs > rem + slack] = -1.0
        best_j = int(np.argmax(gains))  # argmax takes the first max: lower index wins
        if gains[best_j] < 0.0:
            break
        np.add.at(cnt, idx[indptr[best_j] : indptr[best_j + 1]], 1)
        rem -= float(costs[best_j])
        selected[best_j] = 1
    return selected


# --------------------------------------------------------------------------
# branch and bound
# --------------------------------------------------------------------------


def _frac_bound(level, order, cnt, rem, costs, indptr, idx, delta, gains, bval, bcost, bdens):
    """Fractional-knapsack bound over the undecided projects ``order[level:]``.

    Also fills ``gains[pos]`` with the current marginal gain of ``order[pos]``
    so the caller can reuse the branching project's gain.  Valid as an upper
    bound because per-project gains only shrink as the partial bundle grows.
    """
    m = order.shape[0]
    items = 0
    for pos in range(level, m):
        j = order[pos]
        g = 0.0
        for t in range(indptr[j], indptr[j + 1]):
            g += delta[cnt[idx[t]]]
        gains[pos] = g
        if g > _EPS:
            c = costs[j]
            d = g / c
            i = items
            while i > 0 and bdens[i - 1] < d:
                bdens[i] = bdens[i - 1]
                bval[i] = bval[i - 1]
                bcost[i] = bcost[i - 1]
                i -= 1
            bdens[i] = d
            bval[i] = g
            bcost[i] = c
            items += 1
    bound = 0.0
    cap = rem
    for i in range(items):
        if bcost[i] <= cap:
            bound += bval[i]
            cap -= bcost[i]
        else:
            bound += bdens[i] * cap
            break
    return bound


def _voter_cap_init(indptr, idx, num_voters, delta, maxcnt):
    """Initial per-voter maximum counts and the total still-achievable value.

    ``maxcnt[i]`` starts at voter i's ballot size and is decremented whenever
    one of its approved projects is excluded; the running total
    ``sum_i (v[maxcnt_i] - v[cnt_i])`` is an exact cap on any completion's
    remaining gain that the overlap-blind knapsack bound lacks.
    """
    m = indptr.shape[0] - 1
    for j in range(m):
        for t in range(indptr[j], indptr[j + 1]):
            maxcnt[idx[t]] += 1
    cap = 0.0
    for v in range(num_voters):
        for k in range(maxcnt[v]):
            cap += delta[k]
    return cap


def _bnb_maximize(indptr, idx, num_voters, costs, budget, delta, order,
                  init_selected, init_value, node_limit, slack):
    """Depth-first branch and bound for the maximum bundle value.

    Starts from a caller-supplied incumbent (typically the greedy bundle) and
    returns ``(status, best_value, best_selected, nodes)``.  Zero-gain
    inclusions are skipped: they never change the value and only consume
    budget, so the exclude branch dominates.  Pruning uses the cheaper
    voter-cap bound first and the fractional-knapsack bound second.
    """
    m = costs.shape[0]
    cnt = np.zeros(num_voters, dtype=np.int32)
    maxcnt = np.zeros(num_voters, dtype=np.int32)
    ubv = _voter_cap_init(indptr, idx, num_voters, delta, maxcnt)
    included = np.zeros(m, dtype=np.uint8)
    choice = np.zeros(m, dtype=np.uint8)
    gains = np.empty(m, dtype=np.float64)
    bval = np.empty(m, dtype=np.float64)
    bcost = np.empty(m, dtype=np.float64)
    bdens = np.empty(m, dtype=np.float64)
    best_selected = init_selected.copy()
    best_value = init_value
    value = 0.0
    rem = budget
    level = 0
    nodes = 0
    while True:
        nodes += 1
        if nodes > node_limit:
            return STATUS_NODE_LIMIT, best_value, best_selected, nodes
        if value > best_value + _EPS:
            best_value = value
            for t in range(m):
                best_selected[t] = included[t]
        descend = False
        include_ok = False
        if level < m and value + ubv > best_value + _EPS:
            ub = _frac_bound(level, order, cnt, rem, costs, indptr, idx, delta,
                             gains, bval, bcost, bdens)
            if value + ub > best_value + _EPS:
                descend = True
                include_ok = gains[level] > _EPS
        if descend:
            j = order[level]
            if include_ok and costs[j] <= rem + slack:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    value += delta[cnt[v]]
                    ubv -= delta[cnt[v]]
                    cnt[v] += 1
                rem -= costs[j]
                included[j] = 1
                choice[level] = 1
            else:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    maxcnt[v] -= 1
                    ubv -= delta[maxcnt[v]]
                choice[level] = 2
            level += 1
            continue
        # backtrack, undoing include or exclude bookkeeping level by level
        while True:
            level -= 1
            if level < 0:
                return STATUS_OK, best_value, best_selected, nodes
            j = order[level]
            if choice[level] == 1:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    cnt[v] -= 1
                    value -= delta[cnt[v]]
                    ubv += delta[cnt[v]]
                rem += costs[j]
                included[j] = 0
                # take the exclude branch of the same level
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    maxcnt[v] -= 1
                    ubv -= delta[maxcnt[v]]
                choice[level] = 2
                level += 1
                break
            # choice == 2: undo the exclude bookkeeping and keep popping
            for t in range(indptr[j], indptr[j + 1]):
                v = idx[t]
                ubv += delta[maxcnt[v]]
                maxcnt[v] += 1


def _bnb_reachable(indptr, idx, num_voters, costs, budget, delta, allowed,
                   fixed_selected, target, node_limit, slack):
    """Can some completion of ``fixed_selected`` over ``allowed`` reach ``target``?

    ``allowed`` lists candidate projects (search order); the fixed projects are
    applied first.  Returns ``STATUS_FOUND``, ``STATUS_OK`` (proven
    unreachable) or ``STATUS_NODE_LIMIT``.
    """
    m = costs.shape[0]
    cnt = np.zeros(num_voters, dtype=np.int32)
    value = 0.0
    rem = budget
    for j in range(m):
        if fixed_selected[j]:
            for t in range(indptr[j], indptr[j + 1]):
                v = idx[t]
                value += delta[cnt[v]]
                cnt[v] += 1
            rem -= costs[j]
    k = allowed.shape[0]
    # voter cap restricted to what the fixed set plus the allowed set can reach
    maxcnt = cnt.copy()
    ubv = 0.0
    for pos in range(k):
        j = allowed[pos]
        for t in range(indptr[j], indptr[j + 1]):
            v = idx[t]
            ubv += delta[maxcnt[v]]
            maxcnt[v] += 1
    choice = np.zeros(k + 1, dtype=np.uint8)
    gains = np.empty(k + 1, dtype=np.float64)
    bval = np.empty(k + 1, dtype=np.float64)
    bcost = np.empty(k + 1, dtype=np.float64)
    bdens = np.empty(k + 1, dtype=np.float64)
    level = 0
    nodes = 0
    while True:
        nodes += 1
        if nodes > node_limit:
            return STATUS_NODE_LIMIT
        if value >= target - _TIE_TOL:
            return STATUS_FOUND
        descend = False
        include_ok = False
        if level < k and value + ubv >= target - _TIE_TOL:
            ub = _frac_bound(level, allowed, cnt, rem, costs, indptr, idx, delta,
                             gains, bval, bcost, bdens)
            if value + ub >= target - _TIE_TOL:
                descend = True
                include_ok = gains[level] > _EPS
        if descend:
            j = allowed[level]
            if include_ok and costs[j] <= rem + slack:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    value += delta[cnt[v]]
                    ubv -= delta[cnt[v]]
                    cnt[v] += 1
                rem -= costs[j]
                choice[level] = 1
            else:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    maxcnt[v] -= 1
                    ubv -= delta[maxcnt[v]]
                choice[level] = 2
            level += 1
            continue
        while True:
            level -= 1
            if level < 0:
                return STATUS_OK
            j = allowed[level]
            if choice[level] == 1:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    cnt[v] -= 1
                    value -= delta[cnt[v]]
                    ubv += delta[cnt[v]]
                rem += costs[j]
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    maxcnt[v] -= 1
                    ubv -= delta[maxcnt[v]]
                choice[level] = 2
                level += 1
                break
            for t in range(indptr[j], indptr[j + 1]):
                v = idx[t]
                ubv += delta[maxcnt[v]]
                maxcnt[v] += 1


def _bnb_count_minimal(indptr, idx, vindptr, vidx, num_voters, costs, budget,
                       delta, order, target, cap, sample_cap, node_limit, slack):
    """Count minimal bundles whose value reaches ``target`` (the optimum).

    A bundle is minimal when removing any single project strictly lowers its
    value; equal-value supersets obtained by padding an optimum with zero-gain
    projects are therefore not counted as extra ties.  Each included project's
    removal loss (``drop``) is maintained incrementally, and a branch dies as
    soon as some included project becomes redundant: counts never recover once
    lost, so no minimal bundle lives below such a node.  Counting saturates at
    ``cap``.  Returns ``(status, count, samples, num_samples, nodes)``.
    """
    m = costs.shape[0]
    cnt = np.zeros(num_voters, dtype=np.int32)
    maxcnt = np.zeros(num_voters, dtype=np.int32)
    ubv = _voter_cap_init(indptr, idx, num_voters, delta, maxcnt)
    included = np.zeros(m, dtype=np.uint8)
    choice = np.zeros(m, dtype=np.uint8)
    drop = np.zeros(m, dtype=np.float64)
    gains = np.empty(m, dtype=np.float64)
    bval = np.empty(m, dtype=np.float64)
    bcost = np.empty(m, dtype=np.float64)
    bdens = np.empty(m, dtype=np.float64)
    samples = np.zeros((sample_cap, m), dtype=np.uint8)
    num_samples = 0
    count = 0
    value = 0.0
    rem = budget
    level = 0
    nodes = 0
    while True:
        nodes += 1
        if nodes > node_limit:
            return STATUS_NODE_LIMIT, count, samples, num_samples, nodes
        descend = False
        include_ok = False
        if level < m and value + ubv >= target - _TIE_TOL:
            ub = _frac_bound(level, order, cnt, rem, costs, indptr, idx, delta,
                             gains, bval, bcost, bdens)
            if value + ub >= target - _TIE_TOL:
                descend = True
                include_ok = gains[level] > _EPS
        elif level == m and value >= target - _TIE_TOL:
            # optimal leaf; the redundancy prune kept it minimal, but verify
            # against freshly recomputed drops before counting it
            minimal = True
            for j in range(m):
                if included[j]:
                    d = 0.0
                    for t in range(indptr[j], indptr[j + 1]):
                        d += delta[cnt[idx[t]] - 1]
                    if d <= _TIE_TOL:
                        minimal = False
                        break
            if minimal:
                count += 1
                if num_samples < sample_cap:
                    for t in range(m):
                        samples[num_samples, t] = included[t]
                    num_samples += 1
                if count >= cap:
                    return STATUS_OK, count, samples, num_samples, nodes
        if descend:
            j = order[level]
            if include_ok and costs[j] <= rem + slack:
                # include j, updating the removal losses of included projects
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    k = cnt[v]
                    if k >= 1:
                        shift = delta[k] - delta[k - 1]
                        if shift != 0.0:
                            for u in range(vindptr[v], vindptr[v + 1]):
                                q = vidx[u]
                                if included[q]:
                                    drop[q] += shift
                    value += delta[k]
                    ubv -= delta[k]
                    cnt[v] = k + 1
                rem -= costs[j]
                included[j] = 1
                drop[j] = gains[level]
                weak = False
                for q in range(m):
                    if included[q] and drop[q] <= _TIE_TOL:
                        weak = True
                        break
                if weak:
                    # some included project became removable: no minimal
                    # bundle below this node, revert and take the exclude arm
                    included[j] = 0
                    rem += costs[j]
                    for t in range(indptr[j], indptr[j + 1]):
                        v = idx[t]
                        cnt[v] -= 1
                        k = cnt[v]
                        value -= delta[k]
                        ubv += delta[k]
                        if k >= 1:
                            shift = delta[k] - delta[k - 1]
                            if shift != 0.0:
                                for u in range(vindptr[v], vindptr[v + 1]):
                                    q = vidx[u]
                                    if included[q]:
                                        drop[q] -= shift
                    for t in range(indptr[j], indptr[j + 1]):
                        v = idx[t]
                        maxcnt[v] -= 1
                        ubv -= delta[maxcnt[v]]
                    choice[level] = 2
                else:
                    choice[level] = 1
            else:
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    maxcnt[v] -= 1
                    ubv -= delta[maxcnt[v]]
                choice[level] = 2
            level += 1
            continue
        while True:
            level -= 1
            if level < 0:
                return STATUS_OK, count, samples, num_samples, nodes
            j = order[level]
            if choice[level] == 1:
                included[j] = 0
                rem += costs[j]
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    cnt[v] -= 1
                    k = cnt[v]
                    value -= delta[k]
                    ubv += delta[k]
                    if k >= 1:
                        shift = delta[k] - delta[k - 1]
                        if shift != 0.0:
                            for u in range(vindptr[v], vindptr[v + 1]):
                                q = vidx[u]
                                if included[q]:
                                    drop[q] -= shift
                for t in range(indptr[j], indptr[j + 1]):
                    v = idx[t]
                    maxcnt[v] -= 1
                    ubv -= delta[maxcnt[v]]
                choice[level] = 2
                level += 1
                break
            for t in range(indptr[j], indptr[j + 1]):
                v = idx[t]
                ubv += delta[maxcnt[v]]
                maxcnt[v] += 1


# --------------------------------------------------------------------------
# implementation selection
# --------------------------------------------------------------------------
# With numba active, the search loops and the CSR counting loop are compiled;
# the vectorized numpy variants stay available under their private names so
# parity tests can cross-check the two code paths.  With numba disabled the
# vectorized variants become the public ones and the search loops run
# interpreted (correct, markedly slower; see benchmarks/bench_kernels.py).

_USE_NUMBA = _use_numba_from_env()

if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        _USE_NUMBA = False

if _USE_NUMBA:
    _jit = njit(cache=True, nogil=True)
    _frac_bound = _jit(_frac_bound)
    _voter_cap_init = _jit(_voter_cap_init)
    counts_for_selection = _jit(_counts_for_selection)
    sequential_select = _jit(_sequential_select)
    bnb_maximize = _jit(_bnb_maximize)
    bnb_reachable = _jit(_bnb_reachable)
    bnb_count_minimal = _jit(_bnb_count_minimal)
else:
    counts_for_selection = _counts_for_selection_numpy
    sequential_select = _sequential_select_numpy
    bnb_maximize = _bnb_maximize
    bnb_reachable = _bnb_reachable
    bnb_count_minimal = _bnb_count_minimal
