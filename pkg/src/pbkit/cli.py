"""Command-line front end for reproducible batch experiments.

Subcommands: ``generate`` (synthetic datasets, optionally labeled, plus
mixtures), ``solve`` (exact/sequential/random rules over a dataset), ``eval``
(normalized welfare/representation metrics, RMSE against a ground-truth rule,
Jaccard, feasibility), ``ties`` (optimum multiplicity statistics) and
``import-pabulib`` (.pb directory ingestion).

Every command is deterministic given its flags; stochastic commands require a
seed.  Relative paths are resolved against ``$PBKIT_DATA_DIR`` when it is set.
Exit code 0 means no record-level errors occurred (or --lenient was given).
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import exchange, generators, metrics
from .model import feasible, greedy_fill_from_scores
from .pabulib import PabulibParseError, read_pabulib_file
from .rules import DEFAULT_NODE_LIMIT, Objective, SolveLimitReached, solve_exact, \
    solve_random, solve_sequential, enumerate_optima


def _resolve(path: str) -> Path:
    base = os.environ.get("PBKIT_DATA_DIR")
    p = Path(path)
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _pmap(fn, items, jobs: int):
    """Order-preserving map over records, optionally via a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


@click.group()
def main():
    """Participatory-budgeting experiment toolkit."""


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _parse_counts(spec: str) -> dict:
    counts = {}
    for part in spec.split(","):
        family, _, num = part.partition("=")
        family = family.strip()
        if family not in generators.FAMILIES or not num.isdigit():
            raise click.BadParameter(f"bad counts entry {part!r}")
        counts[family] = int(num)
    return counts


@main.command()
@click.option("--family", type=click.Choice(generators.FAMILIES), default=None,
              help="Single instance family to generate.")
@click.option("--counts", default=None,
              help="Per-family counts, e.g. euc=300,ovm=100,toav=100,tocc=100.")
@click.option("--mixture", is_flag=True,
              help="Blend of welfare- and representation-labeled examples.")
@click.option("--p", type=click.FloatRange(0, 1), default=None,
              help="Welfare fraction of the mixture.")
@click.option("--regime", type=click.Choice(list(generators.EUC_REGIMES)),
              default="small", show_default=True)
@click.option("--count", type=click.IntRange(1), default=None,
              help="Number of instances (single family or mixture).")
@click.option("--label-rule", type=click.Choice(["av", "cc", "pav"]), default=None,
              help="Attach exact optimal bundles for this rule as labels.")
@click.option("--seed", type=int, required=True)
@click.option("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, show_default=True)
@click.option("--out", required=True, help="Output dataset (.jsonl).")
def generate(family, counts, mixture, p, regime, count, label_rule, seed,
             node_limit, out):
    """Write synthetic instances as exchange records."""
    modes = sum([family is not None, counts is not None, mixture])
    if modes != 1:
        raise click.UsageError("choose exactly one of --family, --counts, --mixture")
    records = []
    if mixture:
        if p is None or count is None:
            raise click.UsageError("--mixture needs --p and --count")
        examples = generators.build_mixture_set(
            p, count, generators.MixtureSource(regime=regime), seed,
            node_limit=node_limit,
        )
        for i, ex in enumerate(examples):
            records.append(exchange.record_from_instance(
                f"mix-s{seed}-{i:06d}", ex.instance,
                label_rule=ex.label_rule, label_bundle=ex.label_bundle,
            ))
        tally = {"av": sum(1 for e in examples if e.label_rule == "av"),
                 "cc": sum(1 for e in examples if e.label_rule == "cc")}
        click.echo(f"mixture p={p} seed={seed}: {tally['av']} av + {tally['cc']} cc labels")
    else:
        if family is not None and count is None:
            raise click.UsageError("--family needs --count")
        fam_counts = _parse_counts(counts) if counts else {family: count}
        if label_rule is not None:
            examples = generators.build_training_set(
                fam_counts, label_rule, seed, regime=regime, node_limit=node_limit,
            )
            pos = 0
            for fam in generators.FAMILIES:
                for i in range(fam_counts.get(fam, 0)):
                    ex = examples[pos]
                    records.append(exchange.record_from_instance(
                        f"{fam}_{regime}-s{seed}-{i:06d}", ex.instance,
                        label_rule=ex.label_rule, label_bundle=ex.label_bundle,
                    ))
                    pos += 1
        else:
            for fam in generators.FAMILIES:
                for i in range(fam_counts.get(fam, 0)):
                    inst = generators.generate(
                        fam, generators.instance_seed(fam, seed, i), regime
                    )
                    records.append(exchange.record_from_instance(
                        f"{fam}_{regime}-s{seed}-{i:06d}", inst,
                    ))
        for fam in generators.FAMILIES:
            if fam_counts.get(fam):
                click.echo(f"{fam}_{regime}: {fam_counts[fam]} records (seed {seed})")
    exchange.write_dataset(records, _resolve(out))
    click.echo(f"wrote {len(records)} records to {out}")


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


_SOLVE_CFG: dict = {}


def _solve_one(indexed: tuple[int, exchange.ExchangeRecord]) -> dict:
    index, record = indexed
    cfg = _SOLVE_CFG
    instance = record.to_instance()
    objective = cfg["objective"]
    try:
        if cfg["method"] == "exact":
            res = solve_exact(instance, objective, node_limit=cfg["node_limit"])
            bundle, value, proven = res.bundle, res.value, res.proven_optimal
        elif cfg["method"] == "sequential":
            bundle = solve_sequential(instance, objective)
            value, proven = objective.value(instance, bundle), False
        else:
            bundle = solve_random(instance, (cfg["seed"], index))
            value, proven = objective.value(instance, bundle), False
    except SolveLimitReached as exc:
        return {"id": record.id, "error": str(exc)}
    return {
        "id": record.id,
        "rule": objective.kind,
        "p": objective.p,
        "method": cfg["method"],
        "bundle": sorted(int(j) for j in bundle),
        "value": value,
        "proven_optimal": proven,
    }


@main.command()
@click.option("--data", required=True)
@click.option("--rule", type=click.Choice(Objective.KINDS), required=True)
@click.option("--p", type=click.FloatRange(0, 1), default=None,
              help="Welfare weight (weighted rule only).")
@click.option("--method", type=click.Choice(["exact", "sequential", "random"]),
              default="exact", show_default=True)
@click.option("--seed", type=int, default=None, help="Required for --method random.")
@click.option("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, show_default=True)
@click.option("--jobs", type=int, default=None, help="Worker processes (default: all cores).")
@click.option("--lenient", is_flag=True, help="Exit 0 even when records fail.")
@click.option("--out", required=True)
def solve(data, rule, p, method, seed, node_limit, jobs, lenient, out):
    """Run a rule over every record of a dataset; write bundles and values."""
    if method == "random" and seed is None:
        raise click.UsageError("--method random needs --seed")
    objective = Objective(rule, p) if rule == "weighted" else Objective(rule)
    records = exchange.read_dataset(_resolve(data))
    _SOLVE_CFG.update(objective=objective, method=method, seed=seed,
                      node_limit=node_limit)
    results = _pmap(_solve_one, enumerate(records),
                    jobs if jobs is not None else _default_jobs())
    failures = sum(1 for r in results if "error" in r)
    with _resolve(out).open("w", encoding="utf-8") as fh:
        for row in results:
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
    click.echo(f"solved {len(results) - failures}/{len(results)} records "
               f"({method} {rule}{'' if p is None else f' p={p}'})")
    if failures and not lenient:
        click.echo(f"{failures} records failed", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


_EVAL_CFG: dict = {}


def _eval_one(record: exchange.ExchangeRecord) -> dict:
    """Exact per-record optima and the ground-truth bundle."""
    cfg = _EVAL_CFG
    instance = record.to_instance()
    try:
        opt_sw = solve_exact(instance, Objective.av(), node_limit=cfg["node_limit"])
        opt_rep = solve_exact(instance, Objective.cc(), node_limit=cfg["node_limit"])
        truth = solve_exact(instance, cfg["truth"], node_limit=cfg["node_limit"])
    except SolveLimitReached as exc:
        return {"id": record.id, "error": str(exc)}
    return {
        "id": record.id,
        "opt_sw": int(opt_sw.value),
        "opt_rep": int(opt_rep.value),
        "truth_bundle": sorted(truth.bundle),
    }


def _load_bundles(path) -> dict:
    by_id = {}
    with _resolve(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "error" in obj:
                continue
            by_id[obj["id"]] = frozenset(obj["bundle"])
    return by_id


def _parse_named(values) -> dict:
    out = {}
    for value in values:
        name, _, path = value.partition("=")
        if not path:
            raise click.BadParameter(f"expected NAME=PATH, got {value!r}")
        out[name] = path
    return out


@main.command("eval")
@click.option("--data", "data_paths", multiple=True, required=True,
              help="Dataset file; repeat for several datasets (one point each).")
@click.option("--truth-rule", type=click.Choice(["av", "cc", "pav"]), required=True)
@click.option("--predictions", "prediction_specs", multiple=True,
              help="NAME=PATH of a score file; bundles via greedy fill.")
@click.option("--bundles", "bundle_specs", multiple=True,
              help="NAME=PATH of a solve output file.")
@click.option("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, show_default=True)
@click.option("--jobs", type=int, default=None)
@click.option("--report", default=None, help="Machine-readable JSON report path.")
@click.option("--table", default=None, help="Human-readable text table path.")
def eval_cmd(data_paths, truth_rule, prediction_specs, bundle_specs, node_limit,
             jobs, report, table):
    """Evaluate rule outputs against exact optima and a ground-truth rule."""
    truth = Objective(truth_rule)
    methods = {}
    for name, path in _parse_named(prediction_specs).items():
        methods[name] = ("predictions", path)
    for name, path in _parse_named(bundle_specs).items():
        if name in methods:
            raise click.UsageError(f"duplicate method name {name!r}")
        methods[name] = ("bundles", path)
    if not methods:
        raise click.UsageError("give at least one --predictions or --bundles")
    _EVAL_CFG.update(truth=truth, node_limit=node_limit)
    jobs = jobs if jobs is not None else _default_jobs()

    truth_points = []
    per_method_points = {name: [] for name in methods}
    per_method_jaccard = {name: [] for name in methods}
    per_method_feasible = {name: [] for name in methods}
    dataset_summaries = []
    for data_path in data_paths:
        dataset_id = Path(data_path).stem
        records = exchange.read_dataset(_resolve(data_path))
        base = _pmap(_eval_one, records, jobs)
        excluded = {row["id"] for row in base if "error" in row}
        usable = [
            (rec, row) for rec, row in zip(records, base) if "error" not in row
        ]
        if not usable:
            raise click.ClickException(f"no solvable records in {data_path}")
        dataset_summaries.append(
            {"id": dataset_id, "count": len(usable), "excluded": len(excluded)}
        )
        truth_pairs = []
        for rec, row in usable:
            instance = rec.to_instance()
            truth_pairs.append(metrics.ratio_pair(
                instance, row["truth_bundle"], row["opt_sw"], row["opt_rep"]
            ))
        truth_points.append(metrics.dataset_point(dataset_id, truth_pairs))
        for name, (kind, path) in methods.items():
            if kind == "predictions":
                scores = exchange.read_predictions(_resolve(path), records)
            else:
                bundles = _load_bundles(path)
            pairs = []
            for rec, row in usable:
                instance = rec.to_instance()
                if kind == "predictions":
                    if rec.id not in scores:
                        raise click.ClickException(
                            f"{name}: no prediction for record {rec.id!r}"
                        )
                    bundle = greedy_fill_from_scores(instance, scores[rec.id])
                else:
                    if rec.id not in bundles:
                        raise click.ClickException(
                            f"{name}: no bundle for record {rec.id!r}"
                        )
                    bundle = bundles[rec.id]
                pairs.append(metrics.ratio_pair(
                    instance, bundle, row["opt_sw"], row["opt_rep"]
                ))
                per_method_jaccard[name].append(
                    metrics.jaccard(bundle, row["truth_bundle"])
                )
                per_method_feasible[name].append(feasible(instance, bundle))
            per_method_points[name].append(metrics.dataset_point(dataset_id, pairs))

    out = {
        "truth_rule": truth_rule,
        "datasets": dataset_summaries,
        "truth_points": [vars(pt) for pt in truth_points],
        "methods": {},
    }
    for name in methods:
        w, r, total = metrics.rmse_distance(per_method_points[name], truth_points)
        out["methods"][name] = {
            "points": [vars(pt) for pt in per_method_points[name]],
            "welfare_rmse": w,
            "representation_rmse": r,
            "total_rmse": total,
            "mean_jaccard": float(np.mean(per_method_jaccard[name])),
            "feasibility_rate": float(np.mean(per_method_feasible[name])),
        }
    if report:
        _resolve(report).write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    text = _format_table(out)
    if table:
        _resolve(table).write_text(text, encoding="utf-8")
    click.echo(text)


def _format_table(out: dict) -> str:
    """Rows are metrics, columns are methods (ground truth first)."""
    names = list(out["methods"])
    width = max(12, *(len(n) for n in names)) + 2
    header = "metric".ljust(38) + "truth".rjust(10)
    header += "".join(n.rjust(width) for n in names)
    lines = [header, "-" * len(header)]

    def row(label, truth_cell, cells):
        line = label.ljust(38) + truth_cell.rjust(10)
        line += "".join(c.rjust(width) for c in cells)
        lines.append(line)

    for i, ds in enumerate(out["datasets"]):
        tp = out["truth_points"][i]
        row(f"welfare ratio [{ds['id']}]",
            f"{tp['mean_welfare_ratio']:.3f}",
            [f"{out['methods'][n]['points'][i]['mean_welfare_ratio']:.3f}"
             for n in names])
    for i, ds in enumerate(out["datasets"]):
        tp = out["truth_points"][i]
        row(f"representation ratio [{ds['id']}]",
            f"{tp['mean_representation_ratio']:.3f}",
            [f"{out['methods'][n]['points'][i]['mean_representation_ratio']:.3f}"
             for n in names])
    row("welfare ratio RMSE", "0.000",
        [f"{out['methods'][n]['welfare_rmse']:.3f}" for n in names])
    row("representation ratio RMSE", "0.000",
        [f"{out['methods'][n]['representation_rmse']:.3f}" for n in names])
    row("total RMSE", "0.000",
        [f"{out['methods'][n]['total_rmse']:.3f}" for n in names])
    row("mean Jaccard vs truth", "1.000",
        [f"{out['methods'][n]['mean_jaccard']:.3f}" for n in names])
    row("feasibility rate", "1.000",
        [f"{out['methods'][n]['feasibility_rate']:.3f}" for n in names])
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# ties
# ---------------------------------------------------------------------------


_TIES_CFG: dict = {}


def _ties_one(record: exchange.ExchangeRecord) -> dict:
    cfg = _TIES_CFG
    try:
        rep = enumerate_optima(
            record.to_instance(), cfg["objective"], cfg["cap"],
            node_limit=cfg["node_limit"],
        )
    except SolveLimitReached as exc:
        return {"id": record.id, "error": str(exc)}
    return {
        "id": record.id,
        "count": rep.count,
        "saturated": rep.saturated,
        "optimum_value": rep.optimum_value,
    }


@main.command()
@click.option("--data", required=True)
@click.option("--rule", type=click.Choice(Objective.KINDS), required=True)
@click.option("--p", type=click.FloatRange(0, 1), default=None)
@click.option("--cap", type=click.IntRange(1), default=1000, show_default=True)
@click.option("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, show_default=True)
@click.option("--jobs", type=int, default=None)
@click.option("--lenient", is_flag=True)
@click.option("--out", default=None, help="JSON report path.")
def ties(data, rule, p, cap, node_limit, jobs, lenient, out):
    """Optimum-multiplicity statistics of a rule over a dataset."""
    objective = Objective(rule, p) if rule == "weighted" else Objective(rule)
    records = exchange.read_dataset(_resolve(data))
    _TIES_CFG.update(objective=objective, cap=cap, node_limit=node_limit)
    rows = _pmap(_ties_one, records, jobs if jobs is not None else _default_jobs())
    good = [r for r in rows if "error" not in r]
    failures = len(rows) - len(good)
    counts = np.array([r["count"] for r in good], dtype=float)
    summary = {
        "rule": rule,
        "cap": cap,
        "records": len(rows),
        "failed": failures,
        "mean": float(counts.mean()) if good else None,
        "median": float(np.median(counts)) if good else None,
        "p90": float(np.percentile(counts, 90)) if good else None,
        "max": float(counts.max()) if good else None,
        "saturated": int(sum(r["saturated"] for r in good)),
    }
    if out:
        _resolve(out).write_text(
            json.dumps({"summary": summary, "records": rows}, indent=2) + "\n",
            encoding="utf-8",
        )
    click.echo(json.dumps(summary))
    if failures and not lenient:
        sys.exit(1)


# ---------------------------------------------------------------------------
# import-pabulib
# ---------------------------------------------------------------------------


@main.command("import-pabulib")
@click.option("--dir", "directory", required=True)
@click.option("--min-projects", type=int, default=20, show_default=True)
@click.option("--max-projects", type=int, default=50, show_default=True)
@click.option("--lenient", is_flag=True,
              help="Drop malformed ballots/files instead of failing.")
@click.option("--out", required=True)
def import_pabulib(directory, min_projects, max_projects, lenient, out):
    """Parse a directory of .pb files into an exchange dataset.

    Files outside the configured project-count window are dropped and logged.
    """
    paths = sorted(_resolve(directory).glob("*.pb"))
    if not paths:
        raise click.ClickException(f"no .pb files under {directory}")
    records, errors, filtered = [], [], []
    for path in paths:
        try:
            election = read_pabulib_file(path, lenient=lenient)
        except PabulibParseError as exc:
            errors.append(f"{path.name}: {exc}")
            continue
        m = election.instance.num_projects
        if not min_projects <= m <= max_projects:
            filtered.append(f"{path.name}: {m} projects outside "
                            f"[{min_projects}, {max_projects}]")
            continue
        records.append(exchange.record_from_instance(path.stem, election.instance))
    exchange.write_dataset(records, _resolve(out))
    click.echo(f"imported {len(records)}/{len(paths)} files "
               f"({len(filtered)} filtered, {len(errors)} failed)")
    for line in filtered:
        click.echo(f"filtered {line}")
    for line in errors:
        click.echo(f"error {line}", err=True)
    if errors and not lenient:
        sys.exit(1)


if __name__ == "__main__":
    main()
