import json

import numpy as np
import pytest

from pbkit.exchange import (
    ExchangeRecord,
    SchemaError,
    read_dataset,
    read_predictions,
    record_from_instance,
    write_dataset,
    write_predictions,
)
from pbkit.generators import EucParams, SizeRegime, gen_euc, gen_toav, toav_shape

from .conftest import random_instance


def _dataset(tmp_path, records, name="d.jsonl"):
    path = tmp_path / name
    write_dataset(records, path)
    return path


def test_round_trip_identity(tmp_path):
    rng = np.random.default_rng(4)
    records = []
    for i in range(200):
        inst = random_instance(rng)
        label = None
        if i % 3 == 0:
            label = sorted(map(int, rng.choice(
                inst.num_projects,
                size=int(rng.integers(0, inst.num_projects + 1)),
                replace=False,
            )))
        records.append(record_from_instance(
            f"r{i:04d}", inst,
            label_rule="av" if label is not None else None,
            label_bundle=label,
        ))
    p1 = _dataset(tmp_path, records, "a.jsonl")
    loaded = read_dataset(p1)
    assert loaded == records
    p2 = _dataset(tmp_path, loaded, "b.jsonl")
    assert p1.read_bytes() == p2.read_bytes()


def test_costs_normalized_by_budget(tmp_path):
    inst = gen_euc(EucParams(), SizeRegime.named("small"), 2)
    rec = record_from_instance("x", inst)
    assert rec.budget == 1.0
    restored = np.asarray(rec.costs) * inst.budget
    assert np.allclose(restored, inst.costs, rtol=1e-12)


def test_toav_record_costs_equal_inverse_m():
    shape = toav_shape(1)
    rec = record_from_instance("t", gen_toav(1))
    assert all(c == pytest.approx(1 / shape.m, rel=1e-12) for c in rec.costs)


def test_label_bundle_validated(tmp_path):
    path = tmp_path / "bad.jsonl"
    row = {"id": "a", "approvals": [[0]], "costs": [0.5, 0.5], "budget": 1.0,
           "label": {"rule": "av", "bundle": [7]}}
    path.write_text(json.dumps(row) + "\n")
    with pytest.raises(SchemaError, match="record 1"):
        read_dataset(path)


def test_unknown_field_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    row = {"id": "a", "approvals": [], "costs": [1.0], "budget": 1.0, "extra": 1}
    path.write_text(json.dumps(row) + "\n")
    with pytest.raises(SchemaError):
        read_dataset(path)


def test_schema_error_carries_record_index(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = {"id": "a", "approvals": [[0]], "costs": [1.0], "budget": 1.0}
    bad = {"id": "b", "approvals": [[2]], "costs": [1.0], "budget": 1.0}
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
    with pytest.raises(SchemaError, match="record 2"):
        read_dataset(path)


def test_to_instance_round_trip():
    rng = np.random.default_rng(6)
    inst = random_instance(rng)
    rec = record_from_instance("z", inst)
    back = rec.to_instance()
    assert back.approvals == inst.approvals
    assert back.budget == 1.0
    assert np.allclose(np.asarray(back.costs) * inst.budget, inst.costs, rtol=1e-12)


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------


def _simple_records():
    rng = np.random.default_rng(13)
    return [record_from_instance(f"p{i}", random_instance(rng)) for i in range(5)]


def test_predictions_accepted(tmp_path):
    records = _simple_records()
    path = tmp_path / "preds.jsonl"
    write_predictions(
        [(r.id, [0.5] * r.num_projects) for r in records], path
    )
    scores = read_predictions(path, records)
    assert set(scores) == {r.id for r in records}
    assert all(np.all(s == 0.5) for s in scores.values())


def test_predictions_out_of_range(tmp_path):
    records = _simple_records()
    path = tmp_path / "preds.jsonl"
    path.write_text(json.dumps(
        {"id": records[0].id, "scores": [1.3] * records[0].num_projects}
    ) + "\n")
    with pytest.raises(SchemaError, match="0, 1"):
        read_predictions(path, records)


def test_predictions_unknown_id(tmp_path):
    records = _simple_records()
    path = tmp_path / "preds.jsonl"
    path.write_text(json.dumps({"id": "ghost", "scores": [0.5]}) + "\n")
    with pytest.raises(SchemaError, match="unknown record id"):
        read_predictions(path, records)


def test_predictions_length_mismatch(tmp_path):
    records = _simple_records()
    path = tmp_path / "preds.jsonl"
    path.write_text(json.dumps(
        {"id": records[0].id, "scores": [0.5] * (records[0].num_projects + 1)}
    ) + "\n")
    with pytest.raises(SchemaError):
        read_predictions(path, records)
