"""Frequent subgroup mining and the normalized sparse groups matrix.

Subgroups are itemsets mined from a reference point matrix with an exact,
level-wise Apriori over packed bitmaps. The empty itemset (the global
subgroup, covering every instance) is always present at index 0; it cannot
be expressed as a normalized matrix row, so the groups matrix holds one row
per non-global subgroup and membership handling treats the global subgroup
as an implicit all-ones column.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "MiningConfig",
    "Subgroup",
    "SubgroupCatalog",
    "mine_frequent",
    "build_groups_matrix",
]

_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(1).astype(np.int64)


@dataclass(frozen=True)
class MiningConfig:
    """Minimum support fraction and itemset length cap."""

    min_support: float
    max_len: int = 7

    def __post_init__(self) -> None:
        if not 0.0 < self.min_support <= 1.0:
            raise ValueError(f"min_support must be in (0, 1], got {self.min_support}")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}")


@dataclass(frozen=True)
class Subgroup:
    """A frequent itemset: sorted item ids, its support, and its dense index."""

    item_ids: tuple[int, ...]
    support: float
    count: int
    index: int

    def __len__(self) -> int:
        return len(self.item_ids)

    def label(self, catalog=None) -> str:
        if not self.item_ids:
            return "(global)"
        if catalog is None:
            return ",".join(str(i) for i in self.item_ids)
        return ",".join(catalog.label_of(i) for i in self.item_ids)


class SubgroupCatalog:
    """The mined subgroups plus their normalized groups matrix.

    ``subgroups[0]`` is always the global (empty) subgroup. ``groups_matrix``
    is a |G|-1 x n_items CSR matrix whose row j-1 holds 1/|S_j| at each item
    of subgroup j; rows therefore sum to 1. Immutable once built.
    """

    def __init__(
        self,
        subgroups: Sequence[Subgroup],
        n_items: int,
        config: MiningConfig,
    ):
        if not subgroups or subgroups[0].item_ids != ():
            raise ValueError("subgroups[0] must be the global (empty) subgroup")
        self.subgroups: tuple[Subgroup, ...] = tuple(subgroups)
        self.n_items = n_items
        self.config = config
        self.groups_matrix = build_groups_matrix(self.subgroups, n_items)
        # transposed copy in row-major layout so the membership product needs
        # no per-batch format conversion
        self.groups_matrix_t = self.groups_matrix.T.tocsr()
        self._index: dict[frozenset[int], int] = {
            frozenset(sg.item_ids): sg.index for sg in self.subgroups
        }

    def __len__(self) -> int:
        return len(self.subgroups)

    def index_of(self, item_ids) -> int | None:
        """Dense index of an itemset, or None if it was not mined."""
        return self._index.get(frozenset(item_ids))

    def supports(self) -> np.ndarray:
        return np.array([sg.support for sg in self.subgroups])

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "n_items": self.n_items,
            "min_support": self.config.min_support,
            "max_len": self.config.max_len,
            "subgroups": [
                {"items": list(sg.item_ids), "support": sg.support, "count": sg.count}
                for sg in self.subgroups
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SubgroupCatalog":
        config = MiningConfig(min_support=float(d["min_support"]), max_len=int(d["max_len"]))
        subgroups = [
            Subgroup(
                item_ids=tuple(int(i) for i in e["items"]),
                support=float(e["support"]),
                count=int(e["count"]),
                index=idx,
            )
            for idx, e in enumerate(d["subgroups"])
        ]
        return cls(subgroups, int(d["n_items"]), config)


def build_groups_matrix(subgroups: Sequence[Subgroup], n_items: int) -> sp.csr_matrix:
    """Row-normalized sparse matrix over the non-global subgroups.

    Row i (for subgroup ``subgroups[i + 1]``) holds 1/|S| at each member item
    and is structurally zero elsewhere, so a point-matrix row dotted with it
    reaches 1 exactly when the instance contains every item of S.
    """
    rows = [sg for sg in subgroups if sg.item_ids]
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indices = []
    data = []
    for i, sg in enumerate(rows):
        k = len(sg.item_ids)
        indices.extend(sg.item_ids)
        data.extend([1.0 / k] * k)
        indptr[i + 1] = indptr[i] + k
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), indptr),
        shape=(len(rows), n_items),
    )


def _packed_columns(points: sp.spmatrix) -> list[np.ndarray]:
    """Per-item transaction bitmaps, packed 8 rows per byte."""
    csc = points.tocsc()
    n_rows, n_items = csc.shape
    out = []
    for j in range(n_items):
        mask = np.zeros(n_rows, dtype=bool)
        mask[csc.indices[csc.indptr[j] : csc.indptr[j + 1]]] = True
        out.append(np.packbits(mask))
    return out


def _popcount(packed: np.ndarray) -> int:
    return int(_POPCOUNT[packed].sum())


def mine_frequent(
    points: sp.spmatrix,
    config: MiningConfig,
    item_attrs: Sequence[object] | None = None,
) -> SubgroupCatalog:
    """Mine all itemsets with support >= ``config.min_support`` exactly.

    Level-wise Apriori: candidates of length k are joins of length-(k-1)
    frequent itemsets sharing a prefix, pruned by the anti-monotonicity of
    support, and counted by intersecting packed transaction bitmaps. When
    ``item_attrs`` gives the attribute of each item, candidates combining two
    values of one attribute are excluded structurally (their support is zero
    by construction). Output ordering is lexicographic by item ids, with the
    global subgroup first, regardless of any internal parallelism.
    """
    points = points.tocsr()
    n_rows, n_items = points.shape
    if n_rows == 0:
        raise ValueError("cannot mine an empty point matrix")
    if item_attrs is not None and len(item_attrs) != n_items:
        raise ValueError("item_attrs length must equal the item count")

    def frequent(count: int) -> bool:
        return count / n_rows >= config.min_support

    item_bits = _packed_columns(points)
    frequent_sets: dict[tuple[int, ...], int] = {}

    level: dict[tuple[int, ...], np.ndarray] = {}
    for j in range(n_items):
        c = _popcount(item_bits[j])
        if frequent(c):
            frequent_sets[(j,)] = c
            level[(j,)] = item_bits[j]

    k = 2
    while level and k <= config.max_len:
        prev_keys = sorted(level)
        prev_set = set(prev_keys)
        next_level: dict[tuple[int, ...], np.ndarray] = {}
        # join step: two (k-1)-itemsets sharing their first k-2 items
        for i, a in enumerate(prev_keys):
            for b in prev_keys[i + 1 :]:
                if a[:-1] != b[:-1]:
                    break
                if item_attrs is not None and item_attrs[a[-1]] == item_attrs[b[-1]]:
                    continue
                cand = a + (b[-1],)
                if k > 2 and any(
                    cand[:m] + cand[m + 1 :] not in prev_set for m in range(k - 2)
                ):
                    continue
                bits = level[a] & item_bits[cand[-1]]
                c = _popcount(bits)
                if frequent(c):
                    frequent_sets[cand] = c
                    next_level[cand] = bits
        level = next_level
        k += 1

    ordered = sorted(frequent_sets)
    subgroups = [Subgroup(item_ids=(), support=1.0, count=n_rows, index=0)]
    for idx, key in enumerate(ordered, start=1):
        c = frequent_sets[key]
        subgroups.append(Subgroup(item_ids=key, support=c / n_rows, count=c, index=idx))
    return SubgroupCatalog(subgroups, n_items, config)


def brute_force_frequent(
    transactions: Sequence[Sequence[int]],
    min_support: float,
    max_len: int,
) -> dict[tuple[int, ...], int]:
    """Exhaustive reference miner for small instances (oracle for tests).

    Enumerates every itemset up to ``max_len`` over the observed items and
    counts support by direct subset checks. Exponential; keep universes small.
    """
    tx = [frozenset(t) for t in transactions]
    universe = sorted(set().union(*tx)) if tx else []
    n = len(tx)
    out: dict[tuple[int, ...], int] = {}
    for k in range(1, min(max_len, len(universe)) + 1):
        for combo in combinations(universe, k):
            s = frozenset(combo)
            c = sum(1 for t in tx if s <= t)
            if c / n >= min_support:
                out[tuple(combo)] = c
    return out
