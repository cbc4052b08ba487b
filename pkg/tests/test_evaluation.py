import math

import numpy as np
import pytest

from driftscope.catalog import build_catalog
from driftscope.evaluation import (
    ColumnData,
    ExperimentResult,
    correlations,
    detection_scores,
    ndcg_at_k,
    outcome_from_reports,
    run_concept_experiment,
    run_injection_experiment,
    timing_bench,
    youden_sweep,
)
from driftscope.mining import MiningConfig, mine_frequent
from driftscope.sgmetrics import EncodedBatch, build_point_matrix
from driftscope.streams import DriftSchedule, inject_label_flip
from driftscope.datasets import census_sample


def exp(kind, detected, max_ts=()):
    return ExperimentResult(kind=kind, detected=detected, batch_max_t=list(max_ts), seed=0)


class TestDetectionScores:
    def test_perfect(self):
        results = [exp("positive", True)] * 5 + [exp("negative", False)] * 5
        s = detection_scores(results)
        assert s == {"accuracy": 1.0, "f1": 1.0, "fpr": 0.0, "fnr": 0.0}

    def test_nothing_flagged_balanced(self):
        results = [exp("positive", False)] * 5 + [exp("negative", False)] * 5
        s = detection_scores(results)
        assert s["accuracy"] == 0.5
        assert s["f1"] == 0.0
        assert s["fnr"] == 1.0
        assert s["fpr"] == 0.0

    def test_one_sided_suites_report_absent_rates(self):
        s = detection_scores([exp("positive", True)] * 3)
        assert s["fpr"] is None
        assert s["fnr"] == 0.0
        s = detection_scores([exp("negative", False)] * 3)
        assert s["fnr"] is None

    def test_baseline_outcome_override(self):
        r = exp("positive", False)
        r.baseline_detected["ddm"] = True
        s = detection_scores([r, exp("negative", False)], outcome=lambda e: e.baseline_detected.get("ddm", False))
        assert s["fnr"] == 0.0


class TestNdcg:
    def test_perfect_ordering(self):
        assert ndcg_at_k([1.0, 0.5, 0.25], 3) == pytest.approx(1.0)

    def test_reversed_ordering_hand_computed(self):
        rel = [0.25, 0.5, 1.0]
        dcg = sum(r / math.log2(i + 2) for i, r in enumerate(rel))
        idcg = sum(r / math.log2(i + 2) for i, r in enumerate(sorted(rel, reverse=True)))
        assert dcg == pytest.approx(1.0655, abs=1e-4)
        assert idcg == pytest.approx(1.4405, abs=1e-4)
        assert ndcg_at_k(rel, 3) == pytest.approx(dcg / idcg)
        assert ndcg_at_k(rel, 3) == pytest.approx(0.7397, abs=2e-4)

    def test_all_zero_relevance_is_one(self):
        assert ndcg_at_k([0.0, 0.0, 0.0], 10) == 1.0

    def test_k_truncation(self):
        assert ndcg_at_k([0.0, 1.0], 1) == 0.0
        assert ndcg_at_k([1.0, 0.0], 1) == 1.0

    def test_permutation_bounded_by_one(self):
        rng = np.random.default_rng(0)
        rel = rng.random(30)
        best = np.sort(rel)[::-1]
        for _ in range(50):
            perm = rng.permutation(rel)
            assert ndcg_at_k(perm, 10) <= 1.0 + 1e-12
        assert ndcg_at_k(best, 10) == pytest.approx(1.0)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            ndcg_at_k([1.0], 0)


class TestCorrelations:
    def test_identical_and_negated(self):
        rel = [0.1, 0.5, 0.9, 0.3]
        c = correlations(rel, rel)
        assert c["pearson"] == pytest.approx(1.0)
        assert c["spearman"] == pytest.approx(1.0)
        c = correlations(rel, [-x for x in rel])
        assert c["pearson"] == pytest.approx(-1.0)
        assert c["spearman"] == pytest.approx(-1.0)

    def test_random_pairing_small(self):
        rng = np.random.default_rng(1)
        c = correlations(rng.random(1000), rng.random(1000))
        assert abs(c["pearson"]) < 0.1
        assert abs(c["spearman"]) < 0.1

    def test_constant_vector_undefined(self):
        c = correlations([1.0, 1.0, 1.0], [0.1, 0.2, 0.3])
        assert c == {"pearson": None, "spearman": None}

    def test_spearman_average_ranks_on_ties(self):
        # hand-computed: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3)
        x = [5.0, 5.0, 9.0]
        y = [1.0, 2.0, 3.0]
        rx, ry = np.array([1.5, 1.5, 3.0]), np.array([1.0, 2.0, 3.0])
        want = np.corrcoef(rx, ry)[0, 1]
        assert correlations(x, y)["spearman"] == pytest.approx(want)


class TestYouden:
    def test_perfect_threshold_selected(self):
        results = [exp("positive", True, [9.0]), exp("negative", False, [2.0])]
        tau = youden_sweep(results, [1.0, 5.0, 20.0])
        assert tau == 5.0  # separates 9 from 2; 1.0 has FPR 1, 20 has TPR 0

    def test_ties_take_larger_tau(self):
        results = [exp("positive", True, [50.0]), exp("negative", False, [0.1])]
        tau = youden_sweep(results, [1.0, 2.0, 5.0])
        assert tau == 5.0

    def test_invariant_to_duplicated_balanced_experiments(self):
        base = [exp("positive", True, [9.0]), exp("negative", False, [2.0])]
        more = base + [exp("positive", True, [9.0]), exp("negative", False, [2.0])]
        grid = [0.5, 3.0, 8.0]
        assert youden_sweep(base, grid) == youden_sweep(more, grid)


def test_outcome_from_reports_round_trip():
    dicts = [{"global_drift": False}, {"global_drift": True}]
    assert outcome_from_reports(dicts) is True
    assert outcome_from_reports(dicts[:1]) is False


@pytest.fixture(scope="module")
def rows():
    rng = np.random.default_rng(21)
    out = []
    for _ in range(400):
        out.append(
            {
                "num": float(rng.normal(10, 3)) if rng.random() > 0.05 else "?",
                "cat": str(rng.choice(["x", "y", "z", "w"])),
                "low": int(rng.integers(0, 2)),
                "y": int(rng.integers(0, 2)),
            }
        )
    return out


@pytest.fixture(scope="module")
def small_rows():
    return census_sample(n=3000, seed=5)


class TestColumnFastPath:

    def test_point_matrix_matches_record_encoding(self, rows):
        cols = ColumnData(rows)
        train_idx = np.arange(0, 200)
        test_idx = np.arange(200, 400)
        catalog = cols.build_catalog(train_idx, bins=4)
        P = cols.point_matrix(test_idx, catalog).toarray()
        for r, i in enumerate(test_idx):
            ids = catalog.encode(rows[i])
            row = np.zeros(catalog.n_items)
            row[list(ids)] = 1
            assert np.array_equal(P[r], row), f"row {i}"

    def test_catalog_equivalent_to_record_builder(self, rows):
        cols = ColumnData(rows)
        idx = np.arange(0, 250)
        via_cols = cols.build_catalog(idx, bins=4)
        records = [{k: v for k, v in rows[i].items() if k != "y"} for i in idx]
        via_records = build_catalog(records, default_bins=4)
        assert [it.label for it in via_cols.items] == [it.label for it in via_records.items]

    def test_array_flips_match_record_injection(self, rows):
        cols = ColumnData(rows)
        idx = np.arange(cols.n)
        catalog = cols.build_catalog(idx, bins=4)
        target = (catalog.id_of("cat", "x"),)
        schedule = DriftSchedule(target_subgroup=target, p_max=0.7,
                                 normal_batches=2, transition_batches=2, drift_batches=2)
        bounds = [(0, 80), (80, 160), (160, 240), (240, 320), (320, 360), (360, 400)]
        batches = [[rows[i] for i in range(lo, hi)] for lo, hi in bounds]
        _, rec_masks = inject_label_flip(batches, catalog, schedule, seed=77)

        from driftscope.evaluation import _inject_flips_columns

        P = cols.point_matrix(idx, catalog)
        cover = np.asarray(P[:, list(target)].sum(axis=1)).ravel() == 1
        _, arr_mask = _inject_flips_columns(cols.y.copy(), cover, bounds, schedule, seed=77)
        assert np.array_equal(arr_mask, np.concatenate(rec_masks))


class TestExperimentSmoke:
    def test_injection_positive_and_negative(self, small_rows):
        cols = ColumnData(small_rows)
        pos, extras = run_injection_experiment(
            cols,
            "positive",
            seed=3,
            support_band=(0.05, 0.25),
            mining=MiningConfig(0.05, max_len=2),
            n_batches=15,
            tree_depth=5,
            baseline_kinds=("ddm",),
            baseline_params={"ddm": {"min_samples": 500}},
            n_random_rankings=20,
            keep_state=True,
        )
        assert pos.kind == "positive"
        assert pos.target_support is not None
        assert 0.0 <= (pos.ndcg_at_10 or 0) <= 1.0
        assert len(pos.random_ndcg_samples) == 20
        assert extras is not None
        assert extras.final_report.n_subgroups == len(extras.sgcat)
        assert "ddm" in pos.baseline_detected

        neg, _ = run_injection_experiment(
            cols,
            "negative",
            seed=4,
            mining=MiningConfig(0.05, max_len=2),
            n_batches=15,
            tree_depth=5,
            baseline_kinds=(),
        )
        assert neg.target_support is None
        assert neg.ndcg_at_10 is None

    def test_injection_deterministic(self, small_rows):
        cols = ColumnData(small_rows)
        kw = dict(
            support_band=(0.05, 0.25),
            mining=MiningConfig(0.05, max_len=2),
            n_batches=15,
            tree_depth=4,
            baseline_kinds=(),
            n_random_rankings=5,
        )
        r1, _ = run_injection_experiment(cols, "positive", seed=9, **kw)
        r2, _ = run_injection_experiment(cols, "positive", seed=9, **kw)
        assert r1.batch_max_t == r2.batch_max_t
        assert r1.target_items == r2.target_items
        assert r1.ndcg_at_10 == r2.ndcg_at_10

    def test_concept_experiment_smoke(self):
        res = run_concept_experiment(
            "sea",
            "positive",
            seed=1,
            mining=MiningConfig(0.1, max_len=2),
            train_size=1200,
            n_batches=16,
            batch_size=100,
            drift_center=800,
            drift_width=200,
            keep_reports=True,
        )
        assert res.kind == "positive"
        assert len(res.batch_max_t) == 16 - 5
        assert res.report_jsonl
        neg = run_concept_experiment(
            "sea",
            "negative",
            seed=1,
            mining=MiningConfig(0.1, max_len=2),
            train_size=1200,
            n_batches=16,
            batch_size=100,
        )
        assert neg.kind == "negative"


def test_timing_bench_shape():
    rng = np.random.default_rng(2)
    tx = [tuple(np.flatnonzero(rng.random(8) < 0.5).tolist()) for _ in range(300)]
    P = build_point_matrix(tx, 8)
    sgcat = mine_frequent(P, MiningConfig(0.1, max_len=2))
    batches = []
    for b in range(4):
        alpha = rng.integers(0, 2, 75).astype(np.int64)
        batches.append(EncodedBatch(P[b * 75 : (b + 1) * 75], alpha, 1 - alpha, batch_id=b))
    out = timing_bench(sgcat, batches, detector_kinds=("ddm",), reps=2)
    assert set(out) == {"driftscope", "ddm"}
    for v in out.values():
        assert v["seconds_per_batch"] >= 0.0
        assert v["seconds_per_sample"] >= 0.0
