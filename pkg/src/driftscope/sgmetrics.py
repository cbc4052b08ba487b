"""Batch encoding, membership extraction, and per-subgroup outcome counts.

The hot path of the monitor: a batch of instances becomes a sparse 0/1 point
matrix, membership of every instance in every subgroup is one sparse product
with a tolerant floor, and the per-subgroup positive/negative outcome counts
are two sparse vector-matrix products. The membership matrix is materialized
per batch and discarded; only the integer count vectors persist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .catalog import OutcomeRecord
from .mining import SubgroupCatalog

__all__ = [
    "EncodedBatch",
    "SubgroupStats",
    "FLOOR_TOLERANCE",
    "build_point_matrix",
    "encode_batch",
    "membership",
    "aggregate",
    "performance_vector",
    "performance",
    "merge",
]

# A point-row dotted with a normalized subgroup row is exactly 1 for members,
# up to float rounding in entries like 1/3; values this close to 1 count as 1.
FLOOR_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EncodedBatch:
    """A batch as a sparse N x n_items point matrix plus outcome vectors."""

    point_matrix: sp.csr_matrix
    alpha_vec: np.ndarray
    beta_vec: np.ndarray
    batch_id: int = 0

    def __post_init__(self) -> None:
        n = self.point_matrix.shape[0]
        if len(self.alpha_vec) != n or len(self.beta_vec) != n:
            raise ValueError("outcome vector length must match the batch size")
        if np.any(self.alpha_vec + self.beta_vec > 1):
            raise ValueError("alpha + beta must be <= 1 for every instance")

    @property
    def n_instances(self) -> int:
        return self.point_matrix.shape[0]


@dataclass(frozen=True)
class SubgroupStats:
    """Exact per-subgroup (alpha, beta) counts aggregated over a window."""

    alpha_counts: np.ndarray
    beta_counts: np.ndarray
    n_instances: int

    def __post_init__(self) -> None:
        if self.alpha_counts.shape != self.beta_counts.shape:
            raise ValueError("alpha and beta count vectors must have equal length")

    @property
    def n_subgroups(self) -> int:
        return len(self.alpha_counts)

    @classmethod
    def zeros(cls, n_subgroups: int) -> "SubgroupStats":
        return cls(
            alpha_counts=np.zeros(n_subgroups, dtype=np.int64),
            beta_counts=np.zeros(n_subgroups, dtype=np.int64),
            n_instances=0,
        )

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha_counts.tolist(),
            "beta": self.beta_counts.tolist(),
            "n": self.n_instances,
        }

    @classmethod
    def from_dict(cls, d) -> "SubgroupStats":
        return cls(
            alpha_counts=np.asarray(d["alpha"], dtype=np.int64),
            beta_counts=np.asarray(d["beta"], dtype=np.int64),
            n_instances=int(d["n"]),
        )


def build_point_matrix(item_id_sets: Sequence[Sequence[int]], n_items: int) -> sp.csr_matrix:
    """CSR 0/1 matrix with one row per instance, one column per item."""
    indptr = np.zeros(len(item_id_sets) + 1, dtype=np.int64)
    indices: list[int] = []
    for i, ids in enumerate(item_id_sets):
        for j in ids:
            if not 0 <= j < n_items:
                raise ValueError(f"row {i}: item id {j} out of range [0, {n_items})")
        indices.extend(ids)
        indptr[i + 1] = len(indices)
    data = np.ones(len(indices), dtype=np.float64)
    return sp.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), indptr),
        shape=(len(item_id_sets), n_items),
    )


def encode_batch(
    records: Iterable[OutcomeRecord],
    n_items: int,
    batch_id: int = 0,
) -> EncodedBatch:
    """Assemble an :class:`EncodedBatch` from a stream of outcome records."""
    recs = list(records)
    P = build_point_matrix([r.item_ids for r in recs], n_items)
    return EncodedBatch(
        point_matrix=P,
        alpha_vec=np.array([r.alpha for r in recs], dtype=np.int64),
        beta_vec=np.array([r.beta for r in recs], dtype=np.int64),
        batch_id=batch_id,
    )


try:  # fused row-wise product kernel; scipy path below is the fallback
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _njit = None


if _njit is not None:

    @_njit(cache=True, nogil=True)
    def _floored_product(p_indptr, p_indices, g_indptr, g_indices, g_data, n_groups, threshold):
        """Row-wise sparse accumulator over the product P @ G^T.

        Emits exactly the entries whose accumulated dot reaches ``threshold``
        (the tolerant floor), skipping the dense intermediate of partial
        overlaps a general sparse matmul would materialize.
        """
        n_rows = len(p_indptr) - 1
        acc = np.zeros(n_groups, dtype=np.float64)
        marker = np.full(n_groups, -1, dtype=np.int64)
        touched = np.empty(n_groups, dtype=np.int64)
        out_indptr = np.zeros(n_rows + 1, dtype=np.int64)
        bound = 0
        for p in range(len(p_indices)):
            k = p_indices[p]
            bound += g_indptr[k + 1] - g_indptr[k]
        out_indices = np.empty(bound, dtype=np.int64)
        nnz = 0
        for i in range(n_rows):
            n_touched = 0
            for p in range(p_indptr[i], p_indptr[i + 1]):
                k = p_indices[p]
                for q in range(g_indptr[k], g_indptr[k + 1]):
                    j = g_indices[q]
                    if marker[j] != i:
                        marker[j] = i
                        acc[j] = g_data[q]
                        touched[n_touched] = j
                        n_touched += 1
                    else:
                        acc[j] += g_data[q]
            for t in range(n_touched):
                j = touched[t]
                if acc[j] >= threshold:
                    out_indices[nnz] = j
                    nnz += 1
            out_indptr[i + 1] = nnz
        return out_indptr, out_indices[:nnz]


def _member_entries(P: sp.csr_matrix, catalog: SubgroupCatalog) -> tuple[np.ndarray, np.ndarray]:
    """(indptr, column indices) of the entries of floor(P @ G^T) that are 1.

    Column indices refer to the non-global subgroups (0 .. |G|-2), in the
    accumulation order of the product.
    """
    GT = catalog.groups_matrix_t  # n_items x (|G|-1), row-major per item
    if _njit is not None:
        return _floored_product(
            P.indptr.astype(np.int64),
            P.indices.astype(np.int64),
            GT.indptr.astype(np.int64),
            GT.indices.astype(np.int64),
            GT.data,
            GT.shape[1],
            1.0 - FLOOR_TOLERANCE,
        )
    prod = P @ GT
    kept = np.flatnonzero(prod.data >= 1.0 - FLOOR_TOLERANCE)
    row_of_kept = np.searchsorted(prod.indptr, kept, side="right") - 1
    counts = np.bincount(row_of_kept, minlength=P.shape[0])
    indptr = np.zeros(P.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, prod.indices[kept].astype(np.int64)


def membership(batch: EncodedBatch, catalog: SubgroupCatalog) -> sp.csr_matrix:
    """N x |G| 0/1 membership matrix: entry (i, j) = 1 iff S_j is in instance i.

    Computed as the tolerant floor of the sparse product of the point matrix
    with the transposed normalized groups matrix; column 0 (the global
    subgroup) is all ones by definition.
    """
    P = batch.point_matrix
    if P.shape[1] != catalog.n_items:
        raise ValueError(
            f"point matrix has {P.shape[1]} item columns, catalog has {catalog.n_items}"
        )
    n = P.shape[0]
    m_indptr, m_cols = _member_entries(P, catalog)
    # prepend the all-ones global column to every row and shift the rest
    indptr = m_indptr + np.arange(n + 1, dtype=np.int64)
    indices = np.zeros(indptr[-1], dtype=np.int64)
    fill = np.ones(indptr[-1], dtype=bool)
    fill[indptr[:-1]] = False  # slots of the global column
    indices[fill] = m_cols + 1
    data = np.ones(indptr[-1], dtype=np.int8)
    return sp.csr_matrix((data, indices, indptr), shape=(n, len(catalog)))


def aggregate(batch: EncodedBatch, M: sp.spmatrix) -> SubgroupStats:
    """Per-subgroup outcome counts: the products alpha'M and beta'M, exactly."""
    if M.shape[0] != batch.n_instances:
        raise ValueError("membership row count must equal the batch size")
    Mt = M.T  # CSC view of a CSR membership matrix; matvec needs no copy
    return SubgroupStats(
        alpha_counts=np.asarray(Mt @ batch.alpha_vec, dtype=np.int64),
        beta_counts=np.asarray(Mt @ batch.beta_vec, dtype=np.int64),
        n_instances=batch.n_instances,
    )


def performance(stats: SubgroupStats, j: int) -> float | None:
    """The ratio metric h = alpha / (alpha + beta); None when undefined."""
    a = int(stats.alpha_counts[j])
    b = int(stats.beta_counts[j])
    return a / (a + b) if a + b > 0 else None


def performance_vector(stats: SubgroupStats) -> np.ndarray:
    """h per subgroup as a float vector, NaN where undefined."""
    a = stats.alpha_counts.astype(np.float64)
    b = stats.beta_counts.astype(np.float64)
    tot = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(tot > 0, a / np.where(tot > 0, tot, 1.0), np.nan)
    return h


def merge(stats_list: Sequence[SubgroupStats], n_subgroups: int | None = None) -> SubgroupStats:
    """Elementwise sum of count vectors. Associative and commutative.

    ``n_subgroups`` is only required for an empty list; otherwise every entry
    must share the same subgroup count.
    """
    if not stats_list:
        if n_subgroups is None:
            raise ValueError("merging an empty list requires n_subgroups")
        return SubgroupStats.zeros(n_subgroups)
    size = stats_list[0].n_subgroups
    for s in stats_list[1:]:
        if s.n_subgroups != size:
            raise ValueError("cannot merge stats with differing subgroup counts")
    return SubgroupStats(
        alpha_counts=np.sum([s.alpha_counts for s in stats_list], axis=0, dtype=np.int64),
        beta_counts=np.sum([s.beta_counts for s in stats_list], axis=0, dtype=np.int64),
        n_instances=sum(s.n_instances for s in stats_list),
    )
