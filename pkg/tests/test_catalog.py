import json

import pytest

from driftscope.catalog import (
    DataError,
    IngestStats,
    ItemCatalog,
    MetricSpec,
    OutcomeRecord,
    build_catalog,
    ingest_outcomes,
)


def test_categorical_passthrough_two_items():
    records = [{"gender": "male"}, {"gender": "female"}, {"gender": "male"}]
    cat = build_catalog(records)
    assert cat.n_items == 2
    assert {it.label for it in cat.items} == {"gender=male", "gender=female"}


def test_quantile_bins_of_1_to_100_match_direct_sort():
    # oracle: equal-frequency cut points of 1..100 by direct sort are 25/50/75
    values = list(range(1, 101))
    srt = sorted(values)
    expected_edges = [srt[(len(srt) - 1) * k // 4] for k in (1, 2, 3)]
    assert expected_edges == [25, 50, 75]

    records = [{"age": v} for v in values]
    cat = build_catalog(records, binning_config={"age": ("quantile", 4)})
    labels = sorted(it.value for it in cat.items)
    assert labels == sorted(["[1,25]", "(25,50]", "(50,75]", "(75,100]"])


def test_zero_records_error():
    with pytest.raises(ValueError):
        build_catalog([])


def test_all_missing_attribute_names_attribute():
    records = [{"a": "x", "b": "?"}, {"a": "y", "b": ""}]
    with pytest.raises(DataError, match="'b'"):
        build_catalog(records)


def test_encode_example_gender_age():
    records = [{"gender": g, "age": a} for g, a in zip(["male", "female"] * 50, range(1, 101))]
    cat = build_catalog(records, binning_config={"age": ("quantile", 4)})
    ids = cat.encode({"gender": "female", "age": 30})
    expect = {cat.id_of("gender", "female"), cat.id_of("age", "(25,50]")}
    assert set(ids) == expect
    assert list(ids) == sorted(ids)


def test_encode_empty_record_and_unseen_value():
    cat = build_catalog([{"gender": "male"}, {"gender": "female"}])
    assert cat.encode({}) == ()
    ids, skipped = cat.encode_with_stats({"gender": "unknown_value"})
    assert ids == ()
    assert skipped == 1


def test_encode_missing_value_produces_no_item():
    cat = build_catalog([{"gender": "male", "city": "x"}, {"gender": "female", "city": "y"}])
    ids, skipped = cat.encode_with_stats({"gender": "male", "city": "?"})
    assert ids == (cat.id_of("gender", "male"),)
    assert skipped == 0  # missing is not "skipped", it is simply absent


def test_encode_deterministic():
    records = [{"g": "m", "age": v} for v in range(1, 51)]
    cat = build_catalog(records)
    rec = {"g": "m", "age": 17}
    assert cat.encode(rec) == cat.encode(rec)


def test_quantile_partition_covers_every_reference_value():
    import random

    rng = random.Random(7)
    values = [rng.uniform(-50, 50) for _ in range(500)]
    records = [{"x": v} for v in values]
    cat = build_catalog(records, binning_config={"x": ("quantile", 4)})
    for v in values:
        ids = cat.encode({"x": v})
        assert len(ids) == 1, f"value {v} fell into {len(ids)} bins"


def test_out_of_range_continuous_maps_to_no_item():
    cat = build_catalog([{"x": v} for v in range(10)])
    ids, skipped = cat.encode_with_stats({"x": 99})
    assert ids == () and skipped == 1


def test_low_cardinality_numeric_degrades_to_distinct_bins():
    cat = build_catalog([{"flag": v} for v in [0, 1, 0, 1, 1]])
    assert cat.n_items == 2
    (a,) = cat.encode({"flag": 0})
    (b,) = cat.encode({"flag": 1})
    assert a != b


def test_catalog_json_round_trip():
    records = [{"g": ["m", "f"][i % 2], "age": i + 1} for i in range(100)]
    cat = build_catalog(records)
    clone = ItemCatalog.from_dict(json.loads(json.dumps(cat.to_dict())))
    for rec in records[:10]:
        assert cat.encode(rec) == clone.encode(rec)


def test_outcome_record_rejects_alpha_plus_beta_over_one():
    with pytest.raises(ValueError):
        OutcomeRecord(item_ids=(), alpha=1, beta=1)


class TestIngestOutcomes:
    @pytest.fixture()
    def catalog(self):
        return build_catalog([{"g": "m"}, {"g": "f"}])

    def _write(self, tmp_path, text, name="data.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_accuracy_spec(self, tmp_path, catalog):
        p = self._write(tmp_path, "g,y,y_hat\nm,1,1\nf,0,1\n")
        recs = list(ingest_outcomes(p, catalog, MetricSpec("accuracy")))
        assert (recs[0].alpha, recs[0].beta) == (1, 0)
        assert (recs[1].alpha, recs[1].beta) == (0, 1)

    def test_accuracy_alpha_plus_beta_is_one(self, tmp_path, catalog):
        rows = "\n".join(f"m,{y},{yh}" for y in (0, 1) for yh in (0, 1))
        p = self._write(tmp_path, "g,y,y_hat\n" + rows + "\n")
        for rec in ingest_outcomes(p, catalog, MetricSpec("accuracy")):
            assert rec.alpha + rec.beta == 1

    def test_false_positive_rate_spec(self, tmp_path, catalog):
        p = self._write(tmp_path, "g,y,y_hat\nm,0,1\nm,0,0\nm,1,1\n")
        recs = list(ingest_outcomes(p, catalog, MetricSpec("false_positive_rate")))
        assert (recs[0].alpha, recs[0].beta) == (1, 0)  # false positive
        assert (recs[1].alpha, recs[1].beta) == (0, 1)  # true negative
        assert (recs[2].alpha, recs[2].beta) == (0, 0)  # y=1 rows count as neither

    def test_explicit_spec(self, tmp_path, catalog):
        p = self._write(tmp_path, "g,alpha,beta\nm,1,0\nf,0,0\n")
        recs = list(ingest_outcomes(p, catalog, MetricSpec("explicit")))
        assert (recs[0].alpha, recs[0].beta) == (1, 0)
        assert (recs[1].alpha, recs[1].beta) == (0, 0)

    def test_missing_column_error(self, tmp_path, catalog):
        p = self._write(tmp_path, "g,y\nm,1\n")
        with pytest.raises(DataError, match="y_hat"):
            list(ingest_outcomes(p, catalog))

    def test_malformed_row_reports_row_number(self, tmp_path, catalog):
        p = self._write(tmp_path, "g,y,y_hat\nm,1,1\nm,oops,1\n")
        with pytest.raises(DataError, match="row 2"):
            list(ingest_outcomes(p, catalog))

    def test_jsonl_input_and_skip_stats(self, tmp_path, catalog):
        lines = [
            json.dumps({"g": "m", "y": 1, "y_hat": 1}),
            json.dumps({"g": "novel", "y": 0, "y_hat": 1}),
        ]
        p = self._write(tmp_path, "\n".join(lines) + "\n", name="data.jsonl")
        stats = IngestStats()
        recs = list(ingest_outcomes(p, catalog, stats=stats))
        assert stats.rows == 2
        assert stats.skipped_values == 1
        assert recs[1].item_ids == ()
