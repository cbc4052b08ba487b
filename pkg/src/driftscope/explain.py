"""Ranking, summarization, and attribution of drifting subgroups.

Subgroups are ranked by the significance statistic t. Redundancy pruning
collapses chains of near-duplicate refinements onto their most general
surviving ancestors. Shapley values attribute a subgroup's performance
divergence to its constituent items, exactly, by enumerating all item
coalitions (itemsets are short, so exact enumeration is cheap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .detector import DriftReport
from .mining import Subgroup, SubgroupCatalog
from .sgmetrics import EncodedBatch, SubgroupStats

__all__ = [
    "RankedEntry",
    "RankedReport",
    "ItemAttribution",
    "rank",
    "redundancy_prune",
    "shapley_local",
    "shapley_global",
    "make_drift_value_fn",
]

MAX_EXACT_ITEMS = 12


@dataclass(frozen=True)
class RankedEntry:
    subgroup: Subgroup
    t: float
    delta_h: float | None


@dataclass(frozen=True)
class RankedReport:
    """Subgroups in a stable total order: t desc, |delta_h| desc, items asc."""

    entries: tuple[RankedEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _sort_key(e: RankedEntry):
    mag = abs(e.delta_h) if e.delta_h is not None else -1.0
    return (-e.t, -mag, e.subgroup.item_ids)


def rank(report: DriftReport, catalog: SubgroupCatalog, top_k: int | None = None) -> RankedReport:
    """Order all subgroups by drift significance; ``top_k`` truncates."""
    if report.warming_up or report.n_subgroups != len(catalog):
        raise ValueError("ranking requires a scored (non-warming) report for this catalog")
    entries = []
    for sg in catalog.subgroups:
        d = report.delta_h[sg.index]
        entries.append(
            RankedEntry(
                subgroup=sg,
                t=float(report.t_values[sg.index]),
                delta_h=None if np.isnan(d) else float(d),
            )
        )
    entries.sort(key=_sort_key)
    if top_k is not None:
        entries = entries[:top_k]
    return RankedReport(entries=tuple(entries))


def redundancy_prune(ranked: RankedReport, t_threshold: float) -> RankedReport:
    """Drop refinements whose t is explained by a more general subgroup.

    Entries are visited from the most general (shortest itemset) down. An
    entry is pruned when some *surviving* strict subset of it has a t-value
    within ``t_threshold`` of its own; the more general subgroup already
    carries the signal, and comparing against survivors collapses transitive
    chains while guaranteeing every pruned itemset has a surviving ancestor
    within the threshold. A threshold of 0 prunes nothing. The result is
    re-sorted by the ranking order.
    """
    order = sorted(ranked.entries, key=lambda e: (len(e.subgroup.item_ids),) + _sort_key(e))
    survivors: list[tuple[frozenset[int], float, RankedEntry]] = []
    for e in order:
        items = frozenset(e.subgroup.item_ids)
        pruned = any(
            s_items < items and abs(s_t - e.t) < t_threshold
            for s_items, s_t, _ in survivors
        )
        if not pruned:
            survivors.append((items, e.t, e))
    kept = sorted((e for _, _, e in survivors), key=_sort_key)
    return RankedReport(entries=tuple(kept))


@dataclass(frozen=True)
class ItemAttribution:
    """Signed per-item contribution values, in the units of delta_h."""

    values: Mapping[int, float]

    def top(self, k: int | None = None) -> list[tuple[int, float]]:
        pairs = sorted(self.values.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
        return pairs if k is None else pairs[:k]


def shapley_local(
    subgroup: Subgroup | Sequence[int],
    value_fn: Callable[[frozenset[int]], float],
) -> ItemAttribution:
    """Exact Shapley attribution of a subgroup's value to its items.

    For each item a of S, phi(a) is the coalition-weighted average of the
    marginal change v(T + {a}) - v(T) over all T inside S without a. Computed
    by full enumeration of the 2^|S| coalitions, so |S| must not exceed
    MAX_EXACT_ITEMS. Satisfies efficiency: sum(phi) = v(S) - v(empty).
    """
    items = tuple(subgroup.item_ids) if isinstance(subgroup, Subgroup) else tuple(subgroup)
    n = len(items)
    if n > MAX_EXACT_ITEMS:
        raise ValueError(
            f"exact Shapley enumeration supports at most {MAX_EXACT_ITEMS} items, "
            f"got {n}; use a sampling estimator for longer subgroups"
        )
    v = [0.0] * (1 << n)
    for mask in range(1 << n):
        v[mask] = float(value_fn(frozenset(items[i] for i in range(n) if mask >> i & 1)))

    fact = [math.factorial(k) for k in range(n + 1)]
    weights = [fact[k] * fact[n - k - 1] / fact[n] for k in range(n)]
    phi = {}
    for i in range(n):
        bit = 1 << i
        total = 0.0
        for mask in range(1 << n):
            if mask & bit:
                continue
            total += weights[bin(mask).count("1")] * (v[mask | bit] - v[mask])
        phi[items[i]] = total
    return ItemAttribution(values=phi)


def shapley_global(report: DriftReport, catalog: SubgroupCatalog) -> ItemAttribution:
    """Average per-item drift contribution across all subgroups containing it.

    Each frequent subgroup's divergence is attributed to its items with
    :func:`shapley_local`; an item's global value is the mean of its local
    values over the subgroups it appears in. Coalition values come from the
    report directly: every subset of a frequent itemset is frequent, so no
    membership passes are needed. Items appearing in no subgroup are absent
    from the result.
    """
    value_fn = _report_value_fn(report, catalog)
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for sg in catalog.subgroups:
        if not sg.item_ids or len(sg.item_ids) > MAX_EXACT_ITEMS:
            continue
        local = shapley_local(sg, value_fn)
        for item, phi in local.values.items():
            sums[item] = sums.get(item, 0.0) + phi
            counts[item] = counts.get(item, 0) + 1
    return ItemAttribution(
        values={item: sums[item] / counts[item] for item in sorted(sums)}
    )


def _report_value_fn(
    report: DriftReport, catalog: SubgroupCatalog
) -> Callable[[frozenset[int]], float]:
    """Coalition value from a report: delta_h, or the posterior-mean gap when
    h is undefined on either side."""
    delta = report.delta_h
    mu_gap = report.mu_ref - report.mu_cur
    cache: dict[frozenset[int], float] = {}

    def v(itemset: frozenset[int]) -> float:
        got = cache.get(itemset)
        if got is not None:
            return got
        j = catalog.index_of(itemset)
        if j is None:
            raise KeyError(f"itemset {sorted(itemset)} is not a mined subgroup")
        d = float(delta[j])
        out = d if not math.isnan(d) else float(mu_gap[j])
        cache[itemset] = out
        return out

    return v


def make_drift_value_fn(
    catalog: SubgroupCatalog,
    ref_stats: SubgroupStats,
    cur_stats: SubgroupStats,
    ref_batches: Sequence[EncodedBatch] | None = None,
    cur_batches: Sequence[EncodedBatch] | None = None,
) -> Callable[[frozenset[int]], float]:
    """Coalition value function over (reference, current) window counts.

    Frequent itemsets read their cached window counts from the catalog index;
    other itemsets are counted on demand from the retained window batches
    (required only when evaluating coalitions outside the mined catalog).
    Value is h_ref - h_cur, or the posterior-mean gap when h is undefined.
    """
    cache: dict[frozenset[int], float] = {}

    def counts_from_batches(itemset: frozenset[int]) -> tuple[int, int, int, int]:
        if ref_batches is None or cur_batches is None:
            raise KeyError(
                f"itemset {sorted(itemset)} is not mined and no window batches "
                "were provided for on-demand counting"
            )
        out = []
        cols = sorted(itemset)
        for batches in (ref_batches, cur_batches):
            a_tot = b_tot = 0
            for b in batches:
                P = b.point_matrix
                member = np.ones(P.shape[0], dtype=bool)
                for c in cols:
                    col = np.zeros(P.shape[0], dtype=bool)
                    csc = P.tocsc()
                    col[csc.indices[csc.indptr[c] : csc.indptr[c + 1]]] = True
                    member &= col
                a_tot += int(b.alpha_vec[member].sum())
                b_tot += int(b.beta_vec[member].sum())
            out.extend([a_tot, b_tot])
        return out[0], out[1], out[2], out[3]

    def value(a_r: int, b_r: int, a_c: int, b_c: int) -> float:
        if a_r + b_r > 0 and a_c + b_c > 0:
            return a_r / (a_r + b_r) - a_c / (a_c + b_c)
        mu_r = (a_r + 1) / (a_r + b_r + 2)
        mu_c = (a_c + 1) / (a_c + b_c + 2)
        return mu_r - mu_c

    def v(itemset: frozenset[int]) -> float:
        got = cache.get(itemset)
        if got is not None:
            return got
        j = catalog.index_of(itemset)
        if j is not None:
            out = value(
                int(ref_stats.alpha_counts[j]),
                int(ref_stats.beta_counts[j]),
                int(cur_stats.alpha_counts[j]),
                int(cur_stats.beta_counts[j]),
            )
        else:
            out = value(*counts_from_batches(itemset))
        cache[itemset] = out
        return out

    return v
