"""Item catalogs: mapping raw tabular records to interpretable attribute=value items.

A catalog fixes, once, how every attribute of a record is turned into items:
categorical attributes pass their values through, continuous attributes are
discretized into equal-frequency bins whose edges are computed from the
reference data and frozen. Encoding is deterministic for the lifetime of the
catalog, which makes item ids stable across the whole monitoring run.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "DataError",
    "Item",
    "ItemCatalog",
    "OutcomeRecord",
    "MetricSpec",
    "IngestStats",
    "build_catalog",
    "read_rows",
    "ingest_outcomes",
]

# Values treated as missing in raw records. "?" is the common tabular-census
# convention; None covers JSONL nulls.
MISSING_VALUES = frozenset({"", "?", "NA", "N/A", None})

# Column names reserved for outcomes; never turned into metadata items.
OUTCOME_COLUMNS = frozenset({"y", "y_hat", "alpha", "beta"})

# Structural columns of stream files (batch numbering), also never items.
RESERVED_COLUMNS = OUTCOME_COLUMNS | {"batch"}


class DataError(ValueError):
    """Raised for malformed or inconsistent input data files."""


@dataclass(frozen=True)
class Item:
    """One attribute=value pair with its dense integer id."""

    attribute: str
    value: str
    id: int

    @property
    def label(self) -> str:
        return f"{self.attribute}={self.value}"


@dataclass(frozen=True)
class OutcomeRecord:
    """An encoded instance: its item ids plus the 0/1 outcome indicators.

    ``alpha + beta <= 1``: an instance counts as positive, negative, or
    neither for the monitored metric.
    """

    item_ids: tuple[int, ...]
    alpha: int
    beta: int

    def __post_init__(self) -> None:
        if self.alpha + self.beta > 1:
            raise ValueError(
                f"alpha + beta must be <= 1, got alpha={self.alpha}, beta={self.beta}"
            )


def _fmt_number(x: float) -> str:
    """Compact, deterministic numeric formatting for bin labels (25.0 -> '25')."""
    if math.isfinite(x) and float(x).is_integer():
        return str(int(x))
    return format(x, ".12g")


@dataclass(frozen=True)
class _Discretizer:
    """Binning rule for one attribute.

    kind "categorical": values pass through verbatim.
    kind "quantile": ``edges`` are the interior cut points; values fall into
    ``[lo, e1], (e1, e2], ..., (ek, hi]``. Values outside ``[lo, hi]`` produce
    no item (same policy as unseen categorical values).
    """

    kind: str
    bins: int = 0
    edges: tuple[float, ...] = ()
    lo: float = 0.0
    hi: float = 0.0

    def bin_label(self, x: float) -> str | None:
        if x < self.lo or x > self.hi:
            return None
        bounds = (self.lo, *self.edges, self.hi)
        # first bin is closed on both ends, the rest are (left, right]
        for i in range(len(bounds) - 1):
            left, right = bounds[i], bounds[i + 1]
            if (x >= left if i == 0 else x > left) and x <= right:
                open_l = "[" if i == 0 else "("
                return f"{open_l}{_fmt_number(left)},{_fmt_number(right)}]"
        return None  # pragma: no cover - bounds always span [lo, hi]

    def labels(self) -> list[str]:
        bounds = (self.lo, *self.edges, self.hi)
        out = []
        for i in range(len(bounds) - 1):
            open_l = "[" if i == 0 else "("
            out.append(f"{open_l}{_fmt_number(bounds[i])},{_fmt_number(bounds[i + 1])}]")
        return out

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "quantile":
            # decimal strings keep edges bit-stable across platforms
            d.update(
                bins=self.bins,
                edges=[repr(e) for e in self.edges],
                lo=repr(self.lo),
                hi=repr(self.hi),
            )
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "_Discretizer":
        if d["kind"] == "categorical":
            return cls(kind="categorical")
        return cls(
            kind="quantile",
            bins=int(d["bins"]),
            edges=tuple(float(e) for e in d["edges"]),
            lo=float(d["lo"]),
            hi=float(d["hi"]),
        )


def _quantile_edges(values: Sequence[float], bins: int) -> tuple[float, ...]:
    """Interior equal-frequency cut points, by direct sort.

    Edge k (k = 1..bins-1) is the sorted value at index floor((n-1) * k / bins).
    Duplicate edges collapse, so low-cardinality numeric attributes degrade
    gracefully to one bin per distinct value.
    """
    srt = sorted(values)
    n = len(srt)
    edges: list[float] = []
    for k in range(1, bins):
        e = float(srt[(n - 1) * k // bins])
        # an edge at the maximum would create an empty (hi, hi] bin; an edge
        # at the minimum is fine (singleton first bin [lo, lo])
        if (not edges or e > edges[-1]) and e < srt[-1]:
            edges.append(e)
    return tuple(edges)


class ItemCatalog:
    """Immutable bidirectional map between attribute=value items and dense ids.

    Build with :func:`build_catalog`; after that the catalog never changes, so
    any number of workers may encode concurrently.
    """

    def __init__(self, items: Sequence[Item], discretizers: Mapping[str, _Discretizer]):
        self.items: tuple[Item, ...] = tuple(items)
        self.discretizers: dict[str, _Discretizer] = dict(discretizers)
        self._by_key: dict[tuple[str, str], int] = {
            (it.attribute, it.value): it.id for it in self.items
        }
        if len(self._by_key) != len(self.items):
            raise ValueError("duplicate (attribute, value) pair in catalog")
        if sorted(it.id for it in self.items) != list(range(len(self.items))):
            raise ValueError("item ids must be a bijection onto 0..n_items-1")

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(self.discretizers)

    def item_attributes(self) -> list[str]:
        """Attribute name of each item, indexed by item id."""
        out = [""] * self.n_items
        for it in self.items:
            out[it.id] = it.attribute
        return out

    def id_of(self, attribute: str, value: str) -> int | None:
        return self._by_key.get((attribute, value))

    def label_of(self, item_id: int) -> str:
        return self.items[item_id].label

    def encode(self, record: Mapping[str, object]) -> tuple[int, ...]:
        """Encode a raw record into its sorted item-id set.

        Missing values, unseen categorical values, and out-of-range continuous
        values produce no item for that attribute; they never raise. Attributes
        absent from the catalog are ignored.
        """
        ids, _ = self.encode_with_stats(record)
        return ids

    def encode_with_stats(self, record: Mapping[str, object]) -> tuple[tuple[int, ...], int]:
        """Like :meth:`encode`, also returning the number of skipped values.

        A value is skipped when it is present and non-missing but maps to no
        item (unseen categorical value, out-of-range continuous value, or an
        attribute unknown to the catalog).
        """
        ids: list[int] = []
        skipped = 0
        for attr, raw in record.items():
            if attr in RESERVED_COLUMNS:
                continue
            if raw in MISSING_VALUES or (isinstance(raw, str) and raw.strip() in MISSING_VALUES):
                continue
            disc = self.discretizers.get(attr)
            if disc is None:
                skipped += 1
                continue
            if disc.kind == "quantile":
                try:
                    x = float(raw)  # type: ignore[arg-type]
                except (TypeError, ValueError):
                    skipped += 1
                    continue
                value = disc.bin_label(x)
            else:
                value = str(raw).strip()
            item_id = self._by_key.get((attr, value)) if value is not None else None
            if item_id is None:
                skipped += 1
            else:
                ids.append(item_id)
        return tuple(sorted(ids)), skipped

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "items": [
                {"attribute": it.attribute, "value": it.value, "id": it.id}
                for it in self.items
            ],
            "discretizers": {a: d.to_dict() for a, d in self.discretizers.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ItemCatalog":
        items = [Item(e["attribute"], e["value"], int(e["id"])) for e in d["items"]]
        discs = {a: _Discretizer.from_dict(dd) for a, dd in d["discretizers"].items()}
        return cls(items, discs)


def _is_numeric(values: Iterable[object]) -> bool:
    for v in values:
        if isinstance(v, (int, float)):
            continue
        try:
            float(str(v))
        except (TypeError, ValueError):
            return False
    return True


def build_catalog(
    records: Sequence[Mapping[str, object]],
    binning_config: Mapping[str, object] | None = None,
    default_bins: int = 4,
) -> ItemCatalog:
    """Build an :class:`ItemCatalog` from reference records.

    ``binning_config`` maps attribute names to either ``"categorical"`` or
    ``("quantile", n_bins)``. Unlisted attributes are auto-detected: numeric
    values get ``default_bins`` equal-frequency bins, everything else is
    categorical. Quantile edges are computed from ``records`` only and are
    fixed for the lifetime of the catalog. Outcome and stream-structure
    columns (y, y_hat, alpha, beta, batch) are never turned into items.
    """
    if not records:
        raise ValueError("cannot build a catalog from zero records")
    binning_config = dict(binning_config or {})

    attrs: list[str] = []
    seen = set()
    for rec in records:
        for a in rec:
            if a not in seen and a not in RESERVED_COLUMNS:
                seen.add(a)
                attrs.append(a)

    def present(rec: Mapping[str, object], a: str) -> bool:
        v = rec.get(a)
        if v in MISSING_VALUES:
            return False
        return not (isinstance(v, str) and v.strip() in MISSING_VALUES)

    discretizers: dict[str, _Discretizer] = {}
    observed: dict[str, list[object]] = {}
    for a in attrs:
        vals = [rec[a] for rec in records if present(rec, a)]
        if not vals:
            raise DataError(f"attribute {a!r} has no non-missing values")
        observed[a] = vals
        cfg = binning_config.get(a)
        if cfg is None:
            cfg = "quantile" if _is_numeric(vals) else "categorical"
        if cfg == "categorical":
            discretizers[a] = _Discretizer(kind="categorical")
            continue
        if cfg == "quantile":
            bins = default_bins
        elif isinstance(cfg, (tuple, list)) and len(cfg) == 2 and cfg[0] == "quantile":
            bins = int(cfg[1])
        else:
            raise ValueError(f"unknown binning rule {cfg!r} for attribute {a!r}")
        if bins < 1:
            raise ValueError(f"bin count must be >= 1 for attribute {a!r}")
        nums = [float(str(v)) for v in observed[a]]
        if len(set(nums)) < 1:
            raise DataError(f"attribute {a!r} has no distinct values")
        discretizers[a] = _Discretizer(
            kind="quantile",
            bins=bins,
            edges=_quantile_edges(nums, bins),
            lo=float(min(nums)),
            hi=float(max(nums)),
        )

    items: list[Item] = []
    for a in attrs:
        disc = discretizers[a]
        if disc.kind == "quantile":
            values = disc.labels()
        else:
            values = sorted({str(v).strip() for v in observed[a]})
        for v in values:
            items.append(Item(a, v, len(items)))
    return ItemCatalog(items, discretizers)


# ---------------------------------------------------------------------------
# Outcome ingestion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricSpec:
    """How outcome indicators are derived from file columns.

    kind "accuracy": alpha = 1 iff y == y_hat, beta = 1 iff y != y_hat.
    kind "false_positive_rate": alpha = 1 for false positives (y_hat=1, y=0),
    beta = 1 for true negatives (y_hat=0, y=0); rows with y=1 contribute
    neither.
    kind "explicit": the file carries alpha and beta columns directly.
    """

    kind: str = "accuracy"

    def required_columns(self) -> tuple[str, ...]:
        return ("alpha", "beta") if self.kind == "explicit" else ("y", "y_hat")

    def outcome(self, row: Mapping[str, object], row_num: int) -> tuple[int, int]:
        def bit(col: str) -> int:
            try:
                v = int(float(str(row[col])))
            except (TypeError, ValueError, KeyError):
                raise DataError(f"row {row_num}: column {col!r} is not a 0/1 value")
            if v not in (0, 1):
                raise DataError(f"row {row_num}: column {col!r} must be 0 or 1, got {v}")
            return v

        if self.kind == "explicit":
            a, b = bit("alpha"), bit("beta")
            if a + b > 1:
                raise DataError(f"row {row_num}: alpha + beta > 1")
            return a, b
        y, y_hat = bit("y"), bit("y_hat")
        if self.kind == "accuracy":
            return (1, 0) if y == y_hat else (0, 1)
        if self.kind == "false_positive_rate":
            if y == 0:
                return (1, 0) if y_hat == 1 else (0, 1)
            return (0, 0)
        raise ValueError(f"unknown metric spec kind {self.kind!r}")


@dataclass
class IngestStats:
    """Counters accumulated while streaming a file through a catalog."""

    rows: int = 0
    skipped_values: int = 0


def read_rows(path: str | Path) -> Iterator[dict[str, object]]:
    """Stream rows from a CSV (RFC 4180, header row) or JSONL file."""
    path = Path(path)
    if path.suffix.lower() in {".jsonl", ".ndjson"}:
        with open(path, encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"row {i}: invalid JSON ({exc.msg})") from exc
                if not isinstance(row, dict):
                    raise DataError(f"row {i}: expected a JSON object")
                yield row
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DataError(f"{path}: empty file, expected a header row")
            for i, row in enumerate(reader, start=1):
                if None in row:
                    raise DataError(f"row {i}: more fields than header columns")
                yield row


def ingest_outcomes(
    path: str | Path,
    catalog: ItemCatalog,
    metric_spec: MetricSpec | None = None,
    stats: IngestStats | None = None,
) -> Iterator[OutcomeRecord]:
    """Stream :class:`OutcomeRecord` objects from a CSV/JSONL file.

    The file must carry the metadata columns plus either (y, y_hat) or
    (alpha, beta) depending on ``metric_spec``. Pass an :class:`IngestStats`
    to collect row and skipped-value counts.
    """
    metric_spec = metric_spec or MetricSpec()
    stats = stats if stats is not None else IngestStats()
    required = metric_spec.required_columns()
    for i, row in enumerate(read_rows(path), start=1):
        if i == 1:
            missing = [c for c in required if c not in row]
            if missing:
                raise DataError(f"missing required column(s): {', '.join(missing)}")
        a, b = metric_spec.outcome(row, i)
        ids, skipped = catalog.encode_with_stats(row)
        stats.rows += 1
        stats.skipped_values += skipped
        yield OutcomeRecord(item_ids=ids, alpha=a, beta=b)
