"""Line-delimited JSON exchange format shared with external rule learners.

One record per line with fields ``id``, ``approvals``, ``costs`` (normalized
by the budget), ``budget`` (always 1.0 after normalization) and optionally
``label`` ({"rule", "bundle"}) for training data or ``scores`` (per-project
reals in [0, 1]) for predictions.  Field names are part of the contract; reals
round-trip exactly through their shortest-repr JSON encoding.

Prediction files are a reduced form: ``id`` plus ``scores`` only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import PBInstance, validate_score_vector

LABEL_RULES = ("av", "cc", "pav")


class SchemaError(ValueError):
    """A record violates the exchange schema; carries the 1-based record index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"record {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class Label:
    rule: str
    bundle: tuple[int, ...]


@dataclass(frozen=True)
class ExchangeRecord:
    """A budget-normalized PB instance with optional label or scores."""

    id: str
    approvals: tuple[tuple[int, ...], ...]
    costs: tuple[float, ...]
    budget: float = 1.0
    label: Label | None = None
    scores: tuple[float, ...] | None = None

    @property
    def num_projects(self) -> int:
        return len(self.costs)

    def to_instance(self) -> PBInstance:
        return PBInstance(
            approvals=tuple(frozenset(a) for a in self.approvals),
            costs=np.asarray(self.costs, dtype=np.float64),
            budget=float(self.budget),
        )


def record_from_instance(record_id: str, instance: PBInstance,
                         label_rule: str | None = None,
                         label_bundle=None,
                         scores=None) -> ExchangeRecord:
    """Budget-normalize an instance into an exchange record."""
    costs = tuple(float(c) for c in instance.costs / instance.budget)
    label = None
    if label_rule is not None or label_bundle is not None:
        if label_rule not in LABEL_RULES:
            raise ValueError(f"label rule must be one of {LABEL_RULES}")
        label = Label(label_rule, tuple(sorted(int(p) for p in label_bundle)))
    return ExchangeRecord(
        id=str(record_id),
        approvals=tuple(tuple(sorted(a)) for a in instance.approvals),
        costs=costs,
        budget=1.0,
        label=label,
        scores=None if scores is None else tuple(float(s) for s in scores),
    )


def _record_to_json(record: ExchangeRecord) -> str:
    obj = {
        "id": record.id,
        "approvals": [list(a) for a in record.approvals],
        "costs": list(record.costs),
        "budget": record.budget,
    }
    if record.label is not None:
        obj["label"] = {"rule": record.label.rule, "bundle": list(record.label.bundle)}
    if record.scores is not None:
        obj["scores"] = list(record.scores)
    return json.dumps(obj, separators=(",", ":"))


def _parse_record(obj, index: int) -> ExchangeRecord:
    if not isinstance(obj, dict):
        raise SchemaError(index, "record must be a JSON object")
    known = {"id", "approvals", "costs", "budget", "label", "scores"}
    unknown = set(obj) - known
    if unknown:
        raise SchemaError(index, f"unknown fields {sorted(unknown)}")
    try:
        rid = obj["id"]
        approvals = obj["approvals"]
        costs = obj["costs"]
        budget = obj["budget"]
    except KeyError as exc:
        raise SchemaError(index, f"missing field {exc.args[0]!r}") from None
    if not isinstance(rid, str) or not rid:
        raise SchemaError(index, "id must be a non-empty string")
    m = len(costs)
    if m == 0:
        raise SchemaError(index, "costs must be non-empty")
    if any(not isinstance(c, (int, float)) or c <= 0 for c in costs):
        raise SchemaError(index, "costs must be positive numbers")
    if not isinstance(budget, (int, float)) or budget <= 0:
        raise SchemaError(index, "budget must be a positive number")
    if not isinstance(approvals, list):
        raise SchemaError(index, "approvals must be a list of index lists")
    for ballot in approvals:
        if not isinstance(ballot, list) or any(
            not isinstance(p, int) or isinstance(p, bool) or not 0 <= p < m
            for p in ballot
        ):
            raise SchemaError(index, "approvals entries must be indices in [0, m)")
    label = None
    if "label" in obj:
        raw = obj["label"]
        if (
            not isinstance(raw, dict)
            or set(raw) != {"rule", "bundle"}
            or raw["rule"] not in LABEL_RULES
        ):
            raise SchemaError(index, "label must be {rule: av|cc|pav, bundle: [...]}")
        bundle = raw["bundle"]
        if not isinstance(bundle, list) or any(
            not isinstance(p, int) or isinstance(p, bool) or not 0 <= p < m
            for p in bundle
        ):
            raise SchemaError(index, "label bundle indices must lie in [0, m)")
        label = Label(raw["rule"], tuple(sorted(bundle)))
    scores = None
    if "scores" in obj:
        raw = obj["scores"]
        if not isinstance(raw, list) or len(raw) != m or any(
            not isinstance(s, (int, float)) or not 0.0 <= s <= 1.0 for s in raw
        ):
            raise SchemaError(index, "scores must be m numbers in [0, 1]")
        scores = tuple(float(s) for s in raw)
    return ExchangeRecord(
        id=rid,
        approvals=tuple(tuple(sorted(b)) for b in approvals),
        costs=tuple(float(c) for c in costs),
        budget=float(budget),
        label=label,
        scores=scores,
    )


def write_dataset(records, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(_record_to_json(record))
            fh.write("\n")


def read_dataset(path) -> list[ExchangeRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for index, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(index, f"invalid JSON ({exc.msg})") from None
            records.append(_parse_record(obj, index))
    return records


def write_predictions(pairs, path) -> None:
    """Write (id, scores) pairs as prediction records."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rid, scores in pairs:
            fh.write(json.dumps(
                {"id": str(rid), "scores": [float(s) for s in scores]},
                separators=(",", ":"),
            ))
            fh.write("\n")


def read_predictions(path, dataset: list[ExchangeRecord]) -> dict[str, np.ndarray]:
    """Read per-project score vectors and match them to dataset records.

    Every prediction must reference a known record id and carry exactly one
    score in [0, 1] per project of that record.
    """
    sizes = {r.id: r.num_projects for r in dataset}
    if len(sizes) != len(dataset):
        raise ValueError("dataset contains duplicate record ids")
    out: dict[str, np.ndarray] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for index, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(index, f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "id" not in obj or "scores" not in obj:
                raise SchemaError(index, "prediction needs id and scores")
            rid = obj["id"]
            if rid not in sizes:
                raise SchemaError(index, f"unknown record id {rid!r}")
            if rid in out:
                raise SchemaError(index, f"duplicate prediction for {rid!r}")
            try:
                out[rid] = validate_score_vector(obj["scores"], sizes[rid])
            except ValueError as exc:
                raise SchemaError(index, str(exc)) from None
    return out
