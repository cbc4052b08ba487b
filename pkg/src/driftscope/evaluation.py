"""Experiment suites, detection scoring, ranking quality, and timing.

Two experiment families mirror the monitoring protocol end to end:

  - Injection experiments: shuffle a tabular dataset, split 50/50, mine
    subgroups and fit a tree on the reference half, stream the other half in
    30 batches, and (for positive experiments) flip labels inside a randomly
    chosen target subgroup on the normal/transition/drift schedule.
  - Concept experiments: synthetic generator streams (50 batches of 200 by
    default) where positives mix two concepts through a sigmoid and negatives
    stay on one concept.

An experiment counts as detected when the monitor reports drift in at least
one batch; suites always pair equal numbers of positive and negative runs so
accuracy is meaningful. Ranking quality uses the true altered fraction per
subgroup (from the injection ground-truth mask) as relevance.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .baselines import DRIFT, make_detector
from .catalog import MISSING_VALUES, RESERVED_COLUMNS, ItemCatalog, build_catalog
from .detector import DriftReport, MonitorState, WindowConfig, step
from .mining import MiningConfig, SubgroupCatalog, mine_frequent
from .sgmetrics import EncodedBatch, SubgroupStats, aggregate, membership
from .streams import (
    ConceptStreamConfig,
    DriftSchedule,
    concept_disagreement,
    fit_tree,
    flip_probability,
    gen_concept_stream,
)

__all__ = [
    "ExperimentResult",
    "InjectionExtras",
    "detection_scores",
    "ndcg_at_k",
    "correlations",
    "youden_sweep",
    "run_monitor",
    "run_injection_experiment",
    "run_injection_suite",
    "run_concept_experiment",
    "run_concept_suite",
    "timing_bench",
    "summarize_suite",
    "outcome_from_reports",
]

_INJECT_SALT = 0x494E4A45
_CONCEPT_SALT = 0x434F4E43


@dataclass
class ExperimentResult:
    """Outcome of one positive or negative experiment."""

    kind: str  # "positive" | "negative"
    detected: bool
    batch_max_t: list[float]
    seed: int
    target_support: float | None = None
    target_items: tuple[int, ...] | None = None
    ndcg_at_10: float | None = None
    random_ndcg_samples: list[float] = field(default_factory=list)
    pearson: float | None = None
    spearman: float | None = None
    baseline_detected: dict[str, bool] = field(default_factory=dict)
    report_jsonl: str | None = None

    def detected_at(self, tau: float) -> bool:
        return any(t > tau for t in self.batch_max_t)


# ---------------------------------------------------------------------------
# Scores
# ---------------------------------------------------------------------------


def detection_scores(
    results: Sequence[ExperimentResult],
    outcome: Callable[[ExperimentResult], bool] | None = None,
) -> dict[str, float | None]:
    """Confusion-matrix scores over experiment outcomes.

    ``outcome`` overrides what counts as a detection (used to score baseline
    detectors saved on the same experiments). Rates whose denominator is
    empty are None rather than 0.
    """
    if not results:
        raise ValueError("no experiments to score")
    outcome = outcome or (lambda r: r.detected)
    tp = sum(1 for r in results if r.kind == "positive" and outcome(r))
    fn = sum(1 for r in results if r.kind == "positive" and not outcome(r))
    fp = sum(1 for r in results if r.kind == "negative" and outcome(r))
    tn = sum(1 for r in results if r.kind == "negative" and not outcome(r))
    n_pos, n_neg = tp + fn, fp + tn
    return {
        "accuracy": (tp + tn) / len(results),
        "f1": 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else None,
        "fpr": fp / n_neg if n_neg else None,
        "fnr": fn / n_pos if n_pos else None,
    }


def ndcg_at_k(relevance_in_ranked_order: Sequence[float], k: int) -> float:
    """Normalized discounted cumulative gain with linear gain.

    ``relevance_in_ranked_order`` lists true relevances in the order the
    scorer ranked them. Gain is the relevance itself (relevances are
    fractions), discount 1/log2(rank + 1). An all-zero relevance vector
    scores 1.0 by convention: there is nothing to rank.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rel = np.asarray(relevance_in_ranked_order, dtype=np.float64)
    if rel.size == 0 or rel.max() <= 0:
        return 1.0
    discounts = 1.0 / np.log2(np.arange(2, min(k, rel.size) + 2))
    dcg = float((rel[:k] * discounts).sum())
    ideal = np.sort(rel)[::-1]
    idcg = float((ideal[:k] * discounts).sum())
    return dcg / idcg


def correlations(relevance: Sequence[float], scores: Sequence[float]) -> dict[str, float | None]:
    """Pearson and Spearman correlation; None for constant inputs."""
    x = np.asarray(relevance, dtype=np.float64)
    y = np.asarray(scores, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two equal-length vectors with >= 2 entries")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return {"pearson": None, "spearman": None}
    pearson = float(np.corrcoef(x, y)[0, 1])
    rx, ry = rankdata(x), rankdata(y)  # average ranks on ties
    spearman = float(np.corrcoef(rx, ry)[0, 1])
    return {"pearson": pearson, "spearman": spearman}


def youden_sweep(results: Sequence[ExperimentResult], tau_grid: Sequence[float]) -> float:
    """Threshold maximizing J = TPR + TNR - 1; ties go to the larger tau."""
    if not tau_grid:
        raise ValueError("empty tau grid")
    best_tau, best_j = None, -np.inf
    for tau in sorted(tau_grid):
        scores = detection_scores(results, outcome=lambda r: r.detected_at(tau))
        tpr = 1.0 - (scores["fnr"] if scores["fnr"] is not None else 0.0)
        tnr = 1.0 - (scores["fpr"] if scores["fpr"] is not None else 0.0)
        j = tpr + tnr - 1.0
        if j >= best_j:
            best_j, best_tau = j, tau
    return float(best_tau)


def outcome_from_reports(report_dicts: Sequence[Mapping]) -> bool:
    """Re-derive an experiment outcome from saved per-batch reports."""
    return any(bool(d["global_drift"]) for d in report_dicts)


# ---------------------------------------------------------------------------
# Column-based fast path (equivalent to per-record encoding; tested as such)
# ---------------------------------------------------------------------------


class ColumnData:
    """Columnar view of a tabular dataset for the experiment harness.

    Attribute types are fixed from the full dataset: a column is numeric when
    every non-missing value parses as a float. Numeric columns are float
    arrays with NaN for missing; the rest are stripped-string object arrays
    pre-factorized for fast per-split encoding.
    """

    def __init__(self, rows: Sequence[Mapping[str, object]], categorical: frozenset[str] = frozenset()):
        if not rows:
            raise ValueError("no rows")
        self.n = len(rows)
        self.attrs = [a for a in rows[0] if a not in RESERVED_COLUMNS]
        self.y = np.array([int(r["y"]) for r in rows], dtype=np.int64)
        self.numeric: dict[str, np.ndarray] = {}
        self.codes: dict[str, np.ndarray] = {}
        self.uniques: dict[str, np.ndarray] = {}
        for a in self.attrs:
            vals = [r.get(a) for r in rows]
            as_float = np.full(self.n, np.nan)
            ok = a not in categorical
            if ok:
                for i, v in enumerate(vals):
                    if v in MISSING_VALUES or (isinstance(v, str) and v.strip() in MISSING_VALUES):
                        continue
                    try:
                        as_float[i] = float(str(v))
                    except (TypeError, ValueError):
                        ok = False
                        break
            if ok:
                self.numeric[a] = as_float
            else:
                strings = np.array(
                    ["" if v in MISSING_VALUES else str(v).strip() for v in vals],
                    dtype=object,
                )
                strings[np.array([s in MISSING_VALUES for s in strings])] = ""
                self.uniques[a], self.codes[a] = np.unique(strings, return_inverse=True)

    def feature_matrix(self) -> np.ndarray:
        """Numeric design matrix for the tree: raw numbers, ordinal codes."""
        X = np.zeros((self.n, len(self.attrs)))
        for j, a in enumerate(self.attrs):
            if a in self.numeric:
                col = self.numeric[a]
                X[:, j] = np.where(np.isnan(col), -1.0, col)
            else:
                X[:, j] = self.codes[a]
        return X

    def records(self, idx: np.ndarray) -> list[dict]:
        out = []
        for i in idx:
            rec: dict = {}
            for a in self.attrs:
                if a in self.numeric:
                    v = self.numeric[a][i]
                    rec[a] = None if np.isnan(v) else float(v)
                else:
                    s = str(self.uniques[a][self.codes[a][i]])
                    rec[a] = None if s == "" else s
            rec["y"] = int(self.y[i])
            out.append(rec)
        return out

    def build_catalog(self, train_idx: np.ndarray, bins: int = 4) -> ItemCatalog:
        """Catalog from the training slice; same output as build_catalog on
        the equivalent records (covered by an equivalence test)."""
        return build_catalog(self.records(train_idx), default_bins=bins)

    def point_matrix(self, idx: np.ndarray, catalog: ItemCatalog) -> sp.csr_matrix:
        """Sparse point matrix of the selected rows, vectorized."""
        n = len(idx)
        id_cols = []
        for attr in catalog.attributes:
            disc = catalog.discretizers[attr]
            first_ids = [it.id for it in catalog.items if it.attribute == attr]
            base = min(first_ids)
            if disc.kind == "quantile":
                x = self.numeric[attr][idx]
                edges = np.asarray(disc.edges)
                binned = base + np.searchsorted(edges, x, side="left")
                valid = ~np.isnan(x) & (x >= disc.lo) & (x <= disc.hi)
                id_cols.append(np.where(valid, binned, -1).astype(np.int64))
            else:
                lookup = {
                    it.value: it.id for it in catalog.items if it.attribute == attr
                }
                trans = np.array(
                    [lookup.get(str(u), -1) for u in self.uniques[attr]], dtype=np.int64
                )
                id_cols.append(trans[self.codes[attr][idx]])
        ids = np.column_stack(id_cols) if id_cols else np.empty((n, 0), dtype=np.int64)
        valid = ids >= 0
        counts = valid.sum(axis=1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = ids[valid]  # row-major: ascending ids within each row
        return sp.csr_matrix(
            (np.ones(len(indices)), indices, indptr), shape=(n, catalog.n_items)
        )


# ---------------------------------------------------------------------------
# Monitor loop
# ---------------------------------------------------------------------------


def run_monitor(
    sgcat: SubgroupCatalog,
    batches: Sequence[EncodedBatch],
    window: int = 5,
    tau_t: float = 5.0,
    min_count: int = 0,
) -> tuple[list[DriftReport], MonitorState, list[SubgroupStats]]:
    """Feed encoded batches through membership, aggregation, and detection."""
    monitor = MonitorState(n_subgroups=len(sgcat), config=WindowConfig(window))
    reports = []
    batch_stats = []
    for batch in batches:
        M = membership(batch, sgcat)
        stats = aggregate(batch, M)
        batch_stats.append(stats)
        reports.append(step(monitor, stats, tau_t=tau_t, min_count=min_count))
    return reports, monitor, batch_stats


@dataclass
class InjectionExtras:
    """Final-state artifacts of one injection run, for explanation checks."""

    catalog: ItemCatalog
    sgcat: SubgroupCatalog
    final_report: DriftReport
    ref_stats: SubgroupStats
    cur_stats: SubgroupStats
    relevance: np.ndarray


def _inject_flips_columns(
    y: np.ndarray,
    cover: np.ndarray,
    batch_bounds: Sequence[tuple[int, int]],
    schedule: DriftSchedule,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Array-based label flipping; consumes randomness exactly like
    streams.inject_label_flip so both paths give identical masks."""
    rng = np.random.default_rng(np.random.SeedSequence([0x464C4950, seed]))
    mask = np.zeros(len(y), dtype=bool)
    for b, (lo, hi) in enumerate(batch_bounds):
        p = flip_probability(schedule, b)
        draws = rng.random(hi - lo)
        mask[lo:hi] = cover[lo:hi] & (draws < p)
    return np.where(mask, 1 - y, y), mask


def _even_bounds(n: int, n_batches: int) -> list[tuple[int, int]]:
    cuts = np.linspace(0, n, n_batches + 1).astype(int)
    return [(int(cuts[i]), int(cuts[i + 1])) for i in range(n_batches)]


def run_injection_experiment(
    cols: ColumnData,
    kind: str,
    seed: int,
    support_band: tuple[float, float] = (0.01, 0.05),
    p_max: float = 0.8,
    mining: MiningConfig = MiningConfig(0.01, max_len=3),
    bins: int = 4,
    window: int = 5,
    tau_t: float = 5.0,
    tree_depth: int = 8,
    n_batches: int = 30,
    baseline_kinds: Sequence[str] = ("ddm",),
    baseline_params: Mapping[str, Mapping] | None = None,
    n_random_rankings: int = 100,
    keep_state: bool = False,
    feature_matrix: np.ndarray | None = None,
) -> tuple[ExperimentResult, InjectionExtras | None]:
    """One shuffled train/test split with optional targeted label flips."""
    if kind not in ("positive", "negative"):
        raise ValueError("kind must be 'positive' or 'negative'")
    baseline_params = dict(baseline_params or {})
    ss = np.random.SeedSequence([_INJECT_SALT, seed])
    rng = np.random.default_rng(ss)

    perm = rng.permutation(cols.n)
    half = cols.n // 2
    train_idx, test_idx = perm[:half], perm[half:]

    catalog = cols.build_catalog(train_idx, bins=bins)
    P_train = cols.point_matrix(train_idx, catalog)
    sgcat = mine_frequent(P_train, mining, item_attrs=catalog.item_attributes())

    X = cols.feature_matrix() if feature_matrix is None else feature_matrix
    model = fit_tree(X[train_idx], cols.y[train_idx], max_depth=tree_depth)
    y_hat = model.predict(X[test_idx])

    P_test = cols.point_matrix(test_idx, catalog)
    bounds = _even_bounds(len(test_idx), n_batches)
    y_test = cols.y[test_idx].copy()

    target_support = None
    target_items: tuple[int, ...] | None = None
    mask = np.zeros(len(test_idx), dtype=bool)
    if kind == "positive":
        lo, hi = support_band
        band = [sg for sg in sgcat.subgroups if sg.item_ids and lo <= sg.support <= hi]
        if not band:
            raise ValueError(f"no mined subgroup has support in [{lo}, {hi}]")
        target = band[int(rng.integers(len(band)))]
        target_support = target.support
        target_items = target.item_ids
        schedule = DriftSchedule(target_subgroup=target.item_ids, p_max=p_max)
        cover = np.asarray(
            P_test[:, list(target.item_ids)].sum(axis=1)
        ).ravel() == len(target.item_ids)
        if not cover.any():
            raise ValueError("target subgroup covers no test instance")
        y_test, mask = _inject_flips_columns(y_test, cover, bounds, schedule, seed)

    alpha = (y_test == y_hat).astype(np.int64)
    beta = 1 - alpha
    errors = beta

    monitor = MonitorState(n_subgroups=len(sgcat), config=WindowConfig(window))
    ring: list[tuple[np.ndarray, np.ndarray]] = []  # per-batch member/altered sums
    batch_max_t: list[float] = []
    detected = False
    final_report = None
    for b, (blo, bhi) in enumerate(bounds):
        batch = EncodedBatch(
            point_matrix=P_test[blo:bhi],
            alpha_vec=alpha[blo:bhi],
            beta_vec=beta[blo:bhi],
            batch_id=b + 1,
        )
        M = membership(batch, sgcat)
        stats = aggregate(batch, M)
        report = step(monitor, stats, tau_t=tau_t)
        if not report.warming_up:
            batch_max_t.append(report.max_t())
            detected = detected or report.global_drift
            final_report = report
        ring.append(
            (
                np.asarray(M.sum(axis=0)).ravel(),
                np.asarray(M.T @ mask[blo:bhi].astype(np.int64)).ravel(),
            )
        )
        if len(ring) > window:
            ring.pop(0)

    result = ExperimentResult(
        kind=kind,
        detected=detected,
        batch_max_t=batch_max_t,
        seed=seed,
        target_support=target_support,
        target_items=target_items,
    )

    for bkind in baseline_kinds:
        det = make_detector(bkind, **baseline_params.get(bkind, {}))
        fired = False
        for decision in det.run(errors):
            if decision == DRIFT:
                fired = True
                break
        result.baseline_detected[bkind] = fired

    extras = None
    relevance = None
    if kind == "positive" and final_report is not None:
        member = np.sum([m for m, _ in ring], axis=0)
        altered = np.sum([a for _, a in ring], axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            relevance = np.where(member > 0, altered / np.maximum(member, 1), 0.0)
        t = final_report.t_values
        order = np.lexsort((np.arange(len(t)), -t))
        result.ndcg_at_10 = ndcg_at_k(relevance[order], 10)
        result.random_ndcg_samples = [
            ndcg_at_k(rng.permutation(relevance), 10) for _ in range(n_random_rankings)
        ]
        cors = correlations(relevance, t)
        result.pearson = cors["pearson"]
        result.spearman = cors["spearman"]

    if keep_state and final_report is not None:
        extras = InjectionExtras(
            catalog=catalog,
            sgcat=sgcat,
            final_report=final_report,
            ref_stats=monitor.reference_stats,
            cur_stats=monitor.current_stats(),
            relevance=relevance if relevance is not None else np.zeros(len(sgcat)),
        )
    return result, extras


def run_injection_suite(
    rows: Sequence[Mapping[str, object]],
    n_positive: int = 20,
    n_negative: int = 20,
    seed: int = 0,
    threads: int = 1,
    **kwargs,
) -> tuple[list[ExperimentResult], InjectionExtras | None]:
    """Run a balanced injection suite; extras come from the first positive."""
    cols = ColumnData(rows)
    X = cols.feature_matrix()
    jobs = [("positive", seed * 10007 + i) for i in range(n_positive)]
    jobs += [("negative", seed * 10007 + n_positive + i) for i in range(n_negative)]

    extras = None
    results = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futs = [
                pool.submit(
                    run_injection_experiment,
                    cols,
                    kind,
                    s,
                    keep_state=(i == 0),
                    feature_matrix=X,
                    **kwargs,
                )
                for i, (kind, s) in enumerate(jobs)
            ]
            for i, fut in enumerate(futs):
                r, ex = fut.result()
                results.append(r)
                if i == 0:
                    extras = ex
    else:
        for i, (kind, s) in enumerate(jobs):
            r, ex = run_injection_experiment(
                cols, kind, s, keep_state=(i == 0), feature_matrix=X, **kwargs
            )
            results.append(r)
            if i == 0:
                extras = ex
    return results, extras


# ---------------------------------------------------------------------------
# Concept-drift experiments on synthetic streams
# ---------------------------------------------------------------------------

_CONCEPT_POOL = {"agrawal": 10, "sea": 4, "led": 8, "hyperplane": 8}


def run_concept_experiment(
    generator: str,
    kind: str,
    seed: int,
    mining: MiningConfig = MiningConfig(0.05, max_len=3),
    bins: int = 4,
    window: int = 5,
    tau_t: float = 5.0,
    tree_depth: int = 5,
    train_size: int = 5000,
    n_batches: int = 50,
    batch_size: int = 200,
    label_noise: float = 0.10,
    drift_center: int = 5000,
    drift_width: int = 1000,
    baseline_kinds: Sequence[str] = (),
    baseline_params: Mapping[str, Mapping] | None = None,
    keep_reports: bool = False,
    min_disagreement: float = 0.10,
) -> ExperimentResult:
    """One synthetic stream experiment: drift (positive) or stationary."""
    if kind not in ("positive", "negative"):
        raise ValueError("kind must be 'positive' or 'negative'")
    baseline_params = dict(baseline_params or {})
    rng = np.random.default_rng(np.random.SeedSequence([_CONCEPT_SALT, seed]))
    pool = _CONCEPT_POOL[generator]
    concept_a = int(rng.integers(pool))
    if kind == "positive":
        # a positive experiment must contain a material drift: resample pairs
        # until the concepts disagree on at least min_disagreement of labels
        for _ in range(200):
            concept_b = int(rng.integers(pool - 1))
            concept_b += concept_b >= concept_a
            if concept_disagreement(generator, concept_a, concept_b, seed=seed) >= min_disagreement:
                break
            concept_a = int(rng.integers(pool))
        else:
            raise ValueError(
                f"no {generator} concept pair reaches disagreement {min_disagreement}"
            )
    else:
        concept_b = concept_a

    config = ConceptStreamConfig(
        generator=generator,
        concept_a=concept_a,
        concept_b=concept_b,
        drift_center=drift_center,
        drift_width=drift_width,
        label_noise=label_noise,
        train_size=train_size,
        n_batches=n_batches,
        batch_size=batch_size,
        seed=seed,
    )
    train, batches = gen_concept_stream(config)

    binning = {
        name: "categorical"
        for name, kind_ in zip(train.feature_names, train.feature_kinds)
        if kind_ == "categorical"
    }
    cat_attrs = frozenset(binning)
    train_records = train.records()
    catalog = build_catalog(train_records, binning_config=binning, default_bins=bins)
    train_cols = ColumnData(train_records, categorical=cat_attrs)
    P_train = train_cols.point_matrix(np.arange(train_cols.n), catalog)
    sgcat = mine_frequent(P_train, mining, item_attrs=catalog.item_attributes())

    model = fit_tree(train.X, train.y, max_depth=tree_depth)

    monitor = MonitorState(n_subgroups=len(sgcat), config=WindowConfig(window))
    batch_max_t: list[float] = []
    detected = False
    report_lines: list[str] = []
    all_errors: list[np.ndarray] = []
    for b, sb in enumerate(batches):
        y_hat = model.predict(sb.X)
        alpha = (sb.y == y_hat).astype(np.int64)
        beta = 1 - alpha
        all_errors.append(beta)
        bc = ColumnData(sb.records(), categorical=cat_attrs)
        P = bc.point_matrix(np.arange(bc.n), catalog)
        batch = EncodedBatch(point_matrix=P, alpha_vec=alpha, beta_vec=beta, batch_id=b + 1)
        M = membership(batch, sgcat)
        stats = aggregate(batch, M)
        report = step(monitor, stats, tau_t=tau_t)
        if not report.warming_up:
            batch_max_t.append(report.max_t())
            detected = detected or report.global_drift
        if keep_reports:
            report_lines.append(json.dumps(report.to_dict(sgcat), sort_keys=True))

    result = ExperimentResult(
        kind=kind,
        detected=detected,
        batch_max_t=batch_max_t,
        seed=seed,
        report_jsonl="\n".join(report_lines) if keep_reports else None,
    )
    if baseline_kinds:
        errors = np.concatenate(all_errors)
        for bkind in baseline_kinds:
            det = make_detector(bkind, **baseline_params.get(bkind, {}))
            result.baseline_detected[bkind] = any(d == DRIFT for d in det.run(errors))
    return result


def run_concept_suite(
    generator: str,
    n_positive: int = 20,
    n_negative: int = 20,
    seed: int = 0,
    threads: int = 1,
    **kwargs,
) -> list[ExperimentResult]:
    jobs = [("positive", seed * 20011 + i) for i in range(n_positive)]
    jobs += [("negative", seed * 20011 + n_positive + i) for i in range(n_negative)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futs = [
                pool.submit(run_concept_experiment, generator, kind, s, **kwargs)
                for kind, s in jobs
            ]
            return [f.result() for f in futs]
    return [run_concept_experiment(generator, kind, s, **kwargs) for kind, s in jobs]


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------


def timing_bench(
    sgcat: SubgroupCatalog,
    batches: Sequence[EncodedBatch],
    detector_kinds: Sequence[str] = ("ddm",),
    detector_params: Mapping[str, Mapping] | None = None,
    reps: int = 5,
    window: int = 5,
    tau_t: float = 5.0,
) -> dict[str, dict[str, float]]:
    """Median per-batch wall time: sparse pipeline vs one detector/subgroup.

    Both sides start from the same encoded batches. The sparse pipeline is
    timed over membership product + count aggregation + detection. Each
    per-subgroup baseline is timed over its own full pipeline: selecting the
    subgroup's member instances (direct subset checks, the way per-subgroup
    detectors are run without the membership product) and updating that
    subgroup's detector per member error. Medians over ``reps`` repetitions,
    plus the same figure normalized by sample count.
    """
    detector_params = dict(detector_params or {})
    n_samples = sum(b.n_instances for b in batches)

    sparse_times = []
    for _ in range(max(reps, 1)):
        monitor = MonitorState(n_subgroups=len(sgcat), config=WindowConfig(window))
        t0 = time.perf_counter()
        for batch in batches:
            M = membership(batch, sgcat)
            stats = aggregate(batch, M)
            step(monitor, stats, tau_t=tau_t)
        sparse_times.append((time.perf_counter() - t0) / len(batches))

    out = {
        "driftscope": {
            "seconds_per_batch": float(np.median(sparse_times)),
            "seconds_per_sample": float(np.median(sparse_times)) * len(batches) / n_samples,
        }
    }

    # shared, untimed representation prep for the baselines (mirrors the
    # untimed EncodedBatch construction on the sparse side)
    prepared = []
    for batch in batches:
        P = batch.point_matrix.tocsr()
        instance_items = [
            frozenset(P.indices[P.indptr[i] : P.indptr[i + 1]].tolist())
            for i in range(P.shape[0])
        ]
        prepared.append((instance_items, [int(e) for e in batch.beta_vec]))
    subgroup_sets = [frozenset(sg.item_ids) for sg in sgcat.subgroups]

    for kind in detector_kinds:
        params = detector_params.get(kind, {})
        times = []
        for _ in range(max(reps, 1)):
            detectors = [make_detector(kind, **params) for _ in range(len(sgcat))]
            t0 = time.perf_counter()
            for instance_items, errs in prepared:
                for j, items in enumerate(subgroup_sets):
                    update = detectors[j].update
                    if not items:
                        for e in errs:
                            update(e)
                        continue
                    for iset, e in zip(instance_items, errs):
                        if items <= iset:
                            update(e)
            times.append((time.perf_counter() - t0) / len(batches))
        out[kind] = {
            "seconds_per_batch": float(np.median(times)),
            "seconds_per_sample": float(np.median(times)) * len(batches) / n_samples,
        }
    return out


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def summarize_suite(results: Sequence[ExperimentResult], method: str = "driftscope") -> dict:
    """Detection scores plus ranking-metric means and stds for one suite."""
    if method == "driftscope":
        scores = detection_scores(results)
    else:
        scores = detection_scores(results, outcome=lambda r: r.baseline_detected.get(method, False))
    summary: dict = {"method": method, **scores}
    if method == "driftscope":
        ndcgs = [r.ndcg_at_10 for r in results if r.ndcg_at_10 is not None]
        rand = [v for r in results for v in r.random_ndcg_samples]
        pearsons = [r.pearson for r in results if r.pearson is not None]
        spearmans = [r.spearman for r in results if r.spearman is not None]
        if ndcgs:
            summary["ndcg10_mean"] = float(np.mean(ndcgs))
            summary["ndcg10_std"] = float(np.std(ndcgs))
        if rand:
            summary["random_ndcg10_mean"] = float(np.mean(rand))
            summary["random_ndcg10_std"] = float(np.std(rand))
        if pearsons:
            summary["pearson_mean"] = float(np.mean(pearsons))
        if spearmans:
            summary["spearman_mean"] = float(np.mean(spearmans))
    return summary
