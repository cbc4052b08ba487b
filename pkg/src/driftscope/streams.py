"""Synthetic labeled streams, targeted drift injection, and a small CART tree.

The stream generators (Agrawal, SEA, LED, Hyperplane) follow their original
published definitions:

  - Agrawal et al., "Database Mining: A Performance Perspective" (1993):
    ten loan-approval classification functions over demographic attributes.
  - Street & Kim, "A Streaming Ensemble Algorithm for Large-Scale
    Classification" (2001): three uniform features, class by f1 + f2 <= theta,
    thresholds 8 / 9 / 7 / 9.5 per concept.
  - Breiman et al., CART (1984): the 24-attribute LED display data, 7 relevant
    segments plus 17 irrelevant attributes; concepts swap attribute positions.
  - Hulten et al., "Mining Time-Changing Data Streams" (2001): rotating
    hyperplane sum(w_i x_i) >= theta with theta = sum(w_i) / 2.

Concept drift mixes two concepts with the conventional sigmoid schedule
sigma(i) = 1 / (1 + exp(-4 (i - p) / w)) over the instance index i. Label
flips for targeted subgroup drift ramp linearly (or by sigmoid) across the
transition batches and saturate at p_max in the drift batches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .catalog import ItemCatalog

__all__ = [
    "DriftSchedule",
    "ConceptStreamConfig",
    "StreamBatch",
    "TreeModel",
    "GENERATORS",
    "SEA_THRESHOLDS",
    "LED_PATTERNS",
    "N_CONCEPTS",
    "gen_concept_stream",
    "concept_labels",
    "concept_disagreement",
    "sigmoid_mix",
    "inject_label_flip",
    "flip_probability",
    "fit_tree",
    "encode_features",
]

GENERATORS = ("agrawal", "sea", "led", "hyperplane")

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)

# 7-segment patterns for digits 0-9 (top, top-left, top-right, middle,
# bottom-left, bottom-right, bottom), per the CART book / UCI LED data.
LED_PATTERNS = np.array(
    [
        [1, 1, 1, 0, 1, 1, 1],
        [0, 0, 1, 0, 0, 1, 0],
        [1, 0, 1, 1, 1, 0, 1],
        [1, 0, 1, 1, 0, 1, 1],
        [0, 1, 1, 1, 0, 1, 0],
        [1, 1, 0, 1, 0, 1, 1],
        [1, 1, 0, 1, 1, 1, 1],
        [1, 0, 1, 0, 0, 1, 0],
        [1, 1, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 0, 1, 1],
    ],
    dtype=np.int64,
)

N_CONCEPTS = {"agrawal": 10, "sea": 4, "led": 8, "hyperplane": 2**31}


@dataclass(frozen=True)
class StreamBatch:
    """One batch of labeled instances with named features."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]  # "continuous" | "categorical" per feature

    def records(self) -> list[dict]:
        """Rows as attribute dicts (plus 'y') for catalog encoding."""
        out = []
        for i in range(len(self.y)):
            rec: dict = {}
            for j, name in enumerate(self.feature_names):
                v = self.X[i, j]
                rec[name] = int(v) if self.feature_kinds[j] == "categorical" else float(v)
            rec["y"] = int(self.y[i])
            out.append(rec)
        return out


@dataclass(frozen=True)
class ConceptStreamConfig:
    """Configuration of one synthetic concept-drift stream."""

    generator: str
    concept_a: int = 0
    concept_b: int = 1
    drift_center: int = 5000
    drift_width: int = 1000
    label_noise: float = 0.10
    train_size: int = 5000
    n_batches: int = 50
    batch_size: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}, expected one of {GENERATORS}")
        for name, c in (("concept_a", self.concept_a), ("concept_b", self.concept_b)):
            if not 0 <= c < N_CONCEPTS[self.generator]:
                raise ValueError(f"{name}={c} is not a valid {self.generator} concept index")
        if not 0.0 <= self.label_noise < 1.0:
            raise ValueError("label_noise must be in [0, 1)")
        if self.batch_size < 1 or self.n_batches < 1 or self.train_size < 1:
            raise ValueError("sizes must be positive")


def sigmoid_mix(i, center: float, width: float):
    """Probability of drawing from the second concept at instance index i."""
    i = np.asarray(i, dtype=np.float64)
    if width <= 0:
        return (i >= center).astype(np.float64)
    return 1.0 / (1.0 + np.exp(-4.0 * (i - center) / width))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _agrawal_features(n: int, rng: np.random.Generator) -> np.ndarray:
    salary = 20000 + 130000 * rng.random(n)
    commission = np.where(salary >= 75000, 0.0, 10000 + 65000 * rng.random(n))
    age = rng.integers(20, 81, n).astype(np.float64)
    elevel = rng.integers(0, 5, n).astype(np.float64)
    car = rng.integers(1, 21, n).astype(np.float64)
    zipcode = rng.integers(0, 9, n).astype(np.float64)
    hvalue = (9 - zipcode) * 100000 * (0.5 + rng.random(n))
    hyears = rng.integers(1, 31, n).astype(np.float64)
    loan = 500000 * rng.random(n)
    return np.column_stack(
        [salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan]
    )


def _agrawal_group_a(X: np.ndarray, func: int) -> np.ndarray:
    salary, commission, age, elevel = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    hvalue, hyears, loan = X[:, 6], X[:, 7], X[:, 8]
    total = salary + commission
    young, mid, old = age < 40, (age >= 40) & (age < 60), age >= 60

    def between(v, lo, hi):
        return (v >= lo) & (v <= hi)

    if func == 0:
        return young | old
    if func == 1:
        return (
            (young & between(salary, 50000, 100000))
            | (mid & between(salary, 75000, 125000))
            | (old & between(salary, 25000, 75000))
        )
    if func == 2:
        return (
            (young & np.isin(elevel, (0, 1)))
            | (mid & np.isin(elevel, (1, 2, 3)))
            | (old & np.isin(elevel, (2, 3, 4)))
        )
    if func == 3:
        return (
            young
            & np.where(np.isin(elevel, (0, 1)), between(salary, 25000, 75000), between(salary, 50000, 100000))
            | mid
            & np.where(np.isin(elevel, (1, 2, 3)), between(salary, 50000, 100000), between(salary, 75000, 125000))
            | old
            & np.where(np.isin(elevel, (2, 3, 4)), between(salary, 50000, 100000), between(salary, 25000, 75000))
        )
    if func == 4:
        return (
            young
            & np.where(between(salary, 50000, 100000), between(loan, 100000, 300000), between(loan, 200000, 400000))
            | mid
            & np.where(between(salary, 75000, 125000), between(loan, 200000, 400000), between(loan, 300000, 500000))
            | old
            & np.where(between(salary, 25000, 75000), between(loan, 300000, 500000), between(loan, 100000, 300000))
        )
    if func == 5:
        return (
            (young & between(total, 50000, 100000))
            | (mid & between(total, 75000, 125000))
            | (old & between(total, 25000, 75000))
        )
    if func == 6:
        return (2 * total / 3 - loan / 5 - 20000) > 0
    if func == 7:
        return (2 * total / 3 - 5000 * elevel - 20000) > 0
    if func == 8:
        return (2 * total / 3 - 5000 * elevel - loan / 5 - 10000) > 0
    if func == 9:
        equity = np.where(hyears >= 20, hvalue * (hyears - 20), 0.0)
        return (2 * total / 3 - 5000 * elevel + equity / 5 - 10000) > 0
    raise ValueError(f"agrawal function index {func} out of range 0..9")


_GENERATOR_SCHEMAS = {
    "agrawal": (
        ("salary", "commission", "age", "elevel", "car", "zipcode", "hvalue", "hyears", "loan"),
        ("continuous", "continuous", "continuous", "categorical", "categorical",
         "categorical", "continuous", "continuous", "continuous"),
    ),
    "sea": (("att1", "att2", "att3"), ("continuous",) * 3),
    "led": (
        tuple(f"seg{i}" for i in range(7)) + tuple(f"irr{i}" for i in range(17)),
        ("categorical",) * 24,
    ),
    "hyperplane": (tuple(f"x{i}" for i in range(10)), ("continuous",) * 10),
}


def _hyperplane_weights(concept: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([0x48504C4E, concept]))
    return rng.random(10)


def concept_labels(generator: str, X: np.ndarray, concept: int) -> np.ndarray:
    """Labels of feature rows under one concept (feature-sharing generators).

    LED concepts permute features rather than relabel them, so it has no
    shared-feature label function.
    """
    if generator == "agrawal":
        return np.where(_agrawal_group_a(X, concept), 0, 1).astype(np.int64)
    if generator == "sea":
        return (X[:, 0] + X[:, 1] <= SEA_THRESHOLDS[concept]).astype(np.int64)
    if generator == "hyperplane":
        w = _hyperplane_weights(concept)
        return (X @ w >= w.sum() / 2).astype(np.int64)
    raise ValueError(f"{generator!r} has no shared-feature label function")


def concept_disagreement(generator: str, a: int, b: int, n: int = 4000, seed: int = 0) -> float:
    """Fraction of instances whose label differs between two concepts.

    Estimated on a seeded feature probe. LED concepts move features instead
    of labels; any differing swap depth scrambles model inputs, so their
    disagreement is reported as 1.0 when the depths differ.
    """
    if a == b:
        return 0.0
    if generator == "led":
        return 1.0
    rng = np.random.default_rng(np.random.SeedSequence([0x50524F42, seed]))
    X, _ = _draw(generator, np.full(n, a), rng)
    return float(np.mean(concept_labels(generator, X, a) != concept_labels(generator, X, b)))


def _draw(generator: str, concepts: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Sample features and concept-dependent labels for a vector of concepts."""
    n = len(concepts)
    if generator == "agrawal":
        X = _agrawal_features(n, rng)
        y = np.ones(n, dtype=np.int64)
        for func in np.unique(concepts):
            m = concepts == func
            y[m] = concept_labels(generator, X[m], int(func))
        return X, y
    if generator == "sea":
        X = 10.0 * rng.random((n, 3))
        theta = np.array(SEA_THRESHOLDS)[concepts]
        y = (X[:, 0] + X[:, 1] <= theta).astype(np.int64)
        return X, y
    if generator == "led":
        digits = rng.integers(0, 10, n)
        segs = LED_PATTERNS[digits]
        irr = rng.integers(0, 2, (n, 17))
        X = np.column_stack([segs, irr]).astype(np.float64)
        # concept k swaps segment i with irrelevant attribute i for i < k
        for k in np.unique(concepts):
            m = concepts == k
            for i in range(int(k)):
                X[np.ix_(m, [i, 7 + i])] = X[np.ix_(m, [7 + i, i])]
        return X, digits.astype(np.int64)
    if generator == "hyperplane":
        X = rng.random((n, 10))
        y = np.zeros(n, dtype=np.int64)
        for c in np.unique(concepts):
            m = concepts == c
            y[m] = concept_labels(generator, X[m], int(c))
        return X, y
    raise ValueError(f"unknown generator {generator!r}")


def _apply_label_noise(y: np.ndarray, noise: float, n_classes: int, rng: np.random.Generator) -> np.ndarray:
    if noise <= 0:
        return y
    hit = rng.random(len(y)) < noise
    y = y.copy()
    if n_classes == 2:
        y[hit] = 1 - y[hit]
    else:
        shift = rng.integers(1, n_classes, hit.sum())
        y[hit] = (y[hit] + shift) % n_classes
    return y


def gen_concept_stream(config: ConceptStreamConfig) -> tuple[StreamBatch, list[StreamBatch]]:
    """Generate (train set, batched stream) for a sigmoid concept drift.

    The train set is drawn purely from concept A. Each stream instance i is
    drawn from concept B with probability sigma(i); labels are then flipped
    independently with probability ``label_noise``. Byte-identical for a
    given config.
    """
    names, kinds = _GENERATOR_SCHEMAS[config.generator]
    n_classes = 10 if config.generator == "led" else 2
    ss = np.random.SeedSequence([0x5354524D, config.seed])
    train_rng, stream_rng, mix_rng, noise_rng = (
        np.random.default_rng(s) for s in ss.spawn(4)
    )

    tX, ty = _draw(
        config.generator,
        np.full(config.train_size, config.concept_a),
        train_rng,
    )
    ty = _apply_label_noise(ty, config.label_noise, n_classes, noise_rng)
    train = StreamBatch(X=tX, y=ty, feature_names=names, feature_kinds=kinds)

    n = config.n_batches * config.batch_size
    mix = sigmoid_mix(np.arange(n), config.drift_center, config.drift_width)
    concepts = np.where(
        mix_rng.random(n) < mix, config.concept_b, config.concept_a
    ).astype(np.int64)
    sX, sy = _draw(config.generator, concepts, stream_rng)
    sy = _apply_label_noise(sy, config.label_noise, n_classes, noise_rng)

    batches = []
    for b in range(config.n_batches):
        lo, hi = b * config.batch_size, (b + 1) * config.batch_size
        batches.append(StreamBatch(X=sX[lo:hi], y=sy[lo:hi], feature_names=names, feature_kinds=kinds))
    return train, batches


# ---------------------------------------------------------------------------
# Targeted label-flip injection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftSchedule:
    """Batch schedule of a targeted label-flip drift.

    No flips in the normal batches; the flip probability ramps up across the
    transition batches (linearly by default) and holds at ``p_max`` from the
    first drift batch on. Flips only apply inside the target subgroup.
    """

    target_subgroup: tuple[int, ...]
    p_max: float
    normal_batches: int = 10
    transition_batches: int = 10
    drift_batches: int = 10
    ramp: str = "linear"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_max <= 1.0:
            raise ValueError("p_max must be in [0, 1]")
        if min(self.normal_batches, self.transition_batches, self.drift_batches) < 0:
            raise ValueError("batch counts must be >= 0")
        if self.ramp not in ("linear", "sigmoid"):
            raise ValueError("ramp must be 'linear' or 'sigmoid'")


def flip_probability(schedule: DriftSchedule, batch_index: int) -> float:
    """Flip probability for covered instances in the given 0-based batch."""
    b = batch_index
    if b < schedule.normal_batches:
        return 0.0
    k = b - schedule.normal_batches + 1
    K = schedule.transition_batches
    if k <= K:
        if schedule.ramp == "linear":
            return schedule.p_max * k / K
        return schedule.p_max / (1.0 + float(np.exp(-8.0 * (k / (K + 1.0) - 0.5))))
    return schedule.p_max


def inject_label_flip(
    batches: Sequence[Sequence[Mapping]],
    catalog: ItemCatalog,
    schedule: DriftSchedule,
    seed: int = 0,
) -> tuple[list[list[dict]], list[np.ndarray]]:
    """Flip binary labels inside the target subgroup per the drift schedule.

    Returns the perturbed batches (records copied, only 'y' changes) and one
    boolean altered-mask per batch marking exactly the flipped instances.
    Raises when the target subgroup covers no instance of the stream.
    """
    target = frozenset(schedule.target_subgroup)
    rng = np.random.default_rng(np.random.SeedSequence([0x464C4950, seed]))
    out_batches: list[list[dict]] = []
    masks: list[np.ndarray] = []
    covered_total = 0
    for b, batch in enumerate(batches):
        p = flip_probability(schedule, b)
        mask = np.zeros(len(batch), dtype=bool)
        new_batch = []
        draws = rng.random(len(batch))
        for i, rec in enumerate(batch):
            rec = dict(rec)
            y = int(rec["y"])
            if y not in (0, 1):
                raise ValueError(f"label flipping requires binary labels, got y={y}")
            covered = target <= set(catalog.encode(rec))
            covered_total += covered
            if covered and draws[i] < p:
                rec["y"] = 1 - y
                mask[i] = True
            new_batch.append(rec)
        out_batches.append(new_batch)
        masks.append(mask)
    if covered_total == 0:
        raise ValueError("target subgroup covers no instance of the stream")
    return out_batches, masks


# ---------------------------------------------------------------------------
# Decision tree
# ---------------------------------------------------------------------------


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    prediction: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class TreeModel:
    """Binary CART with axis-aligned splits and Gini impurity.

    Deterministic: split ties go to the lowest feature index, then the lowest
    threshold; leaf ties to the lowest class label. Splits with zero Gini gain
    are still taken while the node is impure (required to separate parity-like
    concepts within the depth budget).
    """

    root: _Node
    classes: np.ndarray
    max_depth: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        stack = [(self.root, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = node.prediction
                continue
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out


def _grow(X: np.ndarray, onehot: np.ndarray, classes: np.ndarray, depth: int, max_depth: int) -> _Node:
    n = len(X)
    counts = onehot.sum(0)
    majority = int(classes[int(np.argmax(counts))])
    node = _Node(prediction=majority)
    if depth >= max_depth or counts.max() == n:
        return node

    best_score = -np.inf
    best: tuple[int, float] | None = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xv = X[order, f]
        cuts = np.flatnonzero(xv[1:] > xv[:-1]) + 1
        if cuts.size == 0:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        left = cum[cuts - 1].astype(np.float64)
        nl = cuts.astype(np.float64)
        right = counts.astype(np.float64) - left
        nr = n - nl
        # maximizing sum(c^2)/n over both sides minimizes weighted Gini
        score = (left**2).sum(1) / nl + (right**2).sum(1) / nr
        k = int(np.argmax(score))  # first max: lowest threshold wins ties
        if score[k] > best_score:
            best_score = float(score[k])
            best = (f, float((xv[cuts[k] - 1] + xv[cuts[k]]) / 2.0))
    if best is None:
        return node

    f, thr = best
    go_left = X[:, f] <= thr
    node.feature = f
    node.threshold = thr
    node.left = _grow(X[go_left], onehot[go_left], classes, depth + 1, max_depth)
    node.right = _grow(X[~go_left], onehot[~go_left], classes, depth + 1, max_depth)
    return node


def fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int = 5) -> TreeModel:
    """Fit a depth-bounded Gini tree. Single-class data yields a constant
    predictor (with a warning)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) < 2:
        warnings.warn("training data contains a single class; model is constant")
        return TreeModel(root=_Node(prediction=int(classes[0])), classes=classes, max_depth=0)
    onehot = (y[:, None] == classes[None, :]).astype(np.int64)
    root = _grow(X, onehot, classes, 0, max_depth)
    return TreeModel(root=root, classes=classes, max_depth=max_depth)


def encode_features(
    records: Sequence[Mapping[str, object]],
    attributes: Sequence[str],
    codebooks: dict[str, dict[str, int]] | None = None,
) -> tuple[np.ndarray, dict[str, dict[str, int]]]:
    """Turn raw records into a numeric matrix for the tree.

    Numeric values pass through; non-numeric values get ordinal codes from
    ``codebooks`` (built from these records when not given; unseen values map
    to -1). Returns the matrix and the codebooks for reuse on later splits.
    """
    build = codebooks is None
    codebooks = {} if build else codebooks
    X = np.zeros((len(records), len(attributes)), dtype=np.float64)
    for j, attr in enumerate(attributes):
        raw = [rec.get(attr) for rec in records]
        numeric = True
        vals = np.zeros(len(raw), dtype=np.float64)
        for i, v in enumerate(raw):
            try:
                vals[i] = float(v) if v is not None and str(v).strip() != "" else np.nan
            except (TypeError, ValueError):
                numeric = False
                break
        if numeric:
            vals = np.where(np.isnan(vals), -1.0, vals)
            X[:, j] = vals
            continue
        if build:
            codebooks[attr] = {
                s: k for k, s in enumerate(sorted({str(v).strip() for v in raw}))
            }
        book = codebooks.get(attr, {})
        X[:, j] = [book.get(str(v).strip(), -1) for v in raw]
    return X, codebooks
