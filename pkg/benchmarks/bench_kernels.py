"""Compare the compiled kernel path against the interpreted/numpy fallback.

Each configuration runs in a fresh subprocess so the PBKIT_DISABLE_NUMBA flag
takes effect at import time.  Usage:

    python3 benchmarks/bench_kernels.py [--instances 30] [--repeat 2]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
import pbkit.kernels as kernels
from pbkit.generators import EucParams, SizeRegime, gen_euc, instance_seed
from pbkit.rules import Objective, solve_exact, solve_sequential, enumerate_optima

cfg = json.loads(sys.argv[1])
instances = [
    gen_euc(EucParams(), SizeRegime.named("small"), instance_seed("euc", 7, i))
    for i in range(cfg["instances"])
]

def timed(label, fn):
    best = float("inf")
    for _ in range(cfg["repeat"]):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    print(json.dumps({"label": label, "seconds": best,
                      "path": "numba" if kernels.numba_enabled() else "python"}))

def run_scoring():
    for inst in instances:
        indptr, idx = inst.approver_csr
        sel = np.zeros(inst.num_projects, dtype=np.uint8)
        sel[:: 2] = 1
        for _ in range(50):
            kernels.counts_for_selection(indptr, idx, inst.num_voters, sel)

def run_sequential():
    for inst in instances:
        for kind in ("av", "cc", "pav"):
            solve_sequential(inst, Objective(kind))

def run_exact():
    for inst in instances:
        solve_exact(inst, Objective.av())
        solve_exact(inst, Objective.cc())
        solve_exact(inst, Objective.weighted(0.5))

def run_ties():
    for inst in instances:
        enumerate_optima(inst, Objective.cc(), cap=200)

# warm up the JIT before timing
run_scoring(); run_sequential(); run_exact(); run_ties()
timed("counts_for_selection x50", run_scoring)
timed("sequential av/cc/pav", run_sequential)
timed("exact av/cc/weighted", run_exact)
timed("tie count (cc, cap 200)", run_ties)
"""


def run(disable_numba: bool, instances: int, repeat: int):
    env = dict(os.environ, PBKIT_DISABLE_NUMBA="1" if disable_numba else "0")
    cfg = json.dumps({"instances": instances, "repeat": repeat})
    proc = subprocess.run(
        [sys.executable, "-c", WORKLOAD, cfg],
        env=env, capture_output=True, text=True,
    )
    if proc.returncode != 0:
        print(proc.stderr, file=sys.stderr)
        raise SystemExit(proc.returncode)
    return [json.loads(line) for line in proc.stdout.strip().splitlines()]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=2)
    args = ap.parse_args()
    fast = run(False, args.instances, args.repeat)
    slow = run(True, args.instances, args.repeat)
    width = max(len(r["label"]) for r in fast) + 2
    print(f"{'workload'.ljust(width)}{'numba':>12}{'python':>12}{'speedup':>10}")
    for a, b in zip(fast, slow):
        assert a["label"] == b["label"]
        ratio = b["seconds"] / a["seconds"] if a["seconds"] else float("inf")
        print(f"{a['label'].ljust(width)}{a['seconds']:>11.3f}s{b['seconds']:>11.3f}s"
              f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
