"""Multilabel dataset container, CSV I/O, normalization and fold splitting.

Matrices are stored column-per-sample: features are D x N, labels are
L x N with entries in {0, 1}. CSV files on disk are sample-major (one
sample per row) with an optional leading ``#`` header naming the columns.
"""

import numpy as np

__all__ = [
    "DataFormatError",
    "Dataset",
    "NormStats",
    "FoldPlan",
    "load_dataset",
    "load_labels",
    "save_dataset",
    "normalize_features",
    "apply_norm",
    "kfold_split",
    "take_samples",
]

# Significant digits used when writing decimals; 17 round-trips float64 exactly.
_FLOAT_FMT = "%.17g"


class DataFormatError(ValueError):
    """Raised when an input file or matrix violates the data contract."""


class Dataset:
    """Immutable feature/label pair for N samples.

    Parameters
    ----------
    features : (D, N) array of reals, one column per sample.
    labels : (L, N) array with entries exactly 0 or 1.
    feature_names, label_names : optional sequences of D and L strings;
        defaults are ``f1..fD`` and ``y1..yL``.
    """

    __slots__ = ("features", "labels", "feature_names", "label_names")

    def __init__(self, features, labels, feature_names=None, label_names=None):
        features = np.array(features, dtype=np.float64)
        labels = np.array(labels, dtype=np.float64)
        if features.ndim != 2 or labels.ndim != 2:
            raise DataFormatError("features and labels must be 2-D matrices")
        if features.shape[0] < 1 or labels.shape[0] < 1 or features.shape[1] < 1:
            raise DataFormatError("empty dataset")
        if features.shape[1] != labels.shape[1]:
            raise DataFormatError(
                "sample count mismatch: features have %d samples, labels have %d"
                % (features.shape[1], labels.shape[1])
            )
        if not np.all(np.isfinite(features)):
            raise DataFormatError("non-numeric feature cell")
        if not np.all((labels == 0.0) | (labels == 1.0)):
            raise DataFormatError("non-binary label")
        if feature_names is None:
            feature_names = tuple("f%d" % (d + 1) for d in range(features.shape[0]))
        if label_names is None:
            label_names = tuple("y%d" % (l + 1) for l in range(labels.shape[0]))
        feature_names = tuple(str(s) for s in feature_names)
        label_names = tuple(str(s) for s in label_names)
        if len(feature_names) != features.shape[0]:
            raise DataFormatError("feature name count does not match feature rows")
        if len(label_names) != labels.shape[0]:
            raise DataFormatError("label name count does not match label rows")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", feature_names)
        object.__setattr__(self, "label_names", label_names)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    def __repr__(self):
        return "Dataset(D=%d, L=%d, N=%d)" % (
            self.n_features,
            self.n_labels,
            self.n_samples,
        )


class NormStats:
    """Per-feature min/max fitted on training data and reused at test time."""

    __slots__ = ("minimum", "maximum")

    def __init__(self, minimum, maximum):
        minimum = np.asarray(minimum, dtype=np.float64)
        maximum = np.asarray(maximum, dtype=np.float64)
        if minimum.shape != maximum.shape or minimum.ndim != 1:
            raise ValueError("min and max must be 1-D vectors of equal length")
        if np.any(minimum > maximum):
            raise ValueError("per-feature min must not exceed max")
        self.minimum = minimum
        self.maximum = maximum


class FoldPlan:
    """Assignment of N samples to k cross-validation folds."""

    __slots__ = ("k", "assignments")

    def __init__(self, k, assignments):
        assignments = np.asarray(assignments, dtype=np.int64)
        counts = np.bincount(assignments, minlength=k)
        if len(counts) != k or np.any(counts == 0):
            raise ValueError("every fold index in [0, k) must appear")
        if counts.max() - counts.min() > 1:
            raise ValueError("fold sizes may differ by at most 1")
        self.k = int(k)
        self.assignments = assignments

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def _parse_csv(path):
    """Read a sample-major CSV, returning (rows, names or None)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    names = None
    if lines and lines[0].lstrip().startswith("#"):
        header = lines[0].lstrip()[1:].strip()
        names = tuple(s.strip() for s in header.split(",")) if header else None
        lines = lines[1:]
    rows = [line for line in lines if line.strip()]
    if not rows:
        raise DataFormatError("empty file: %s" % path)
    return rows, names


def load_dataset(features_path, labels_path) -> Dataset:
    """Load a dataset from a feature CSV and a label CSV.

    Both files are sample-major (N rows). Files become the transposed
    internal matrices, so row i of each file is sample i.
    """
    feat_rows, feat_names = _parse_csv(features_path)
    lab_rows, lab_names = _parse_csv(labels_path)
    if len(feat_rows) != len(lab_rows):
        raise DataFormatError(
            "sample count mismatch: %d feature rows vs %d label rows"
            % (len(feat_rows), len(lab_rows))
        )

    def parse_row(line, path, lineno):
        cells = line.split(",")
        try:
            return [float(c) for c in cells]
        except ValueError:
            raise DataFormatError(
                "non-numeric feature cell at %s line %d" % (path, lineno)
            ) from None

    features = []
    width = None
    for i, line in enumerate(feat_rows):
        row = parse_row(line, features_path, i + 1)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataFormatError(
                "ragged feature row at %s line %d" % (features_path, i + 1)
            )
        features.append(row)

    labels = _parse_label_rows(lab_rows, labels_path)
    return Dataset(
        np.array(features, dtype=np.float64).T,
        labels,
        feature_names=feat_names,
        label_names=lab_names,
    )


def _parse_label_rows(rows, path) -> np.ndarray:
    matrix = []
    width = None
    for i, line in enumerate(rows):
        cells = line.split(",")
        row = []
        for c in cells:
            try:
                v = float(c)
            except ValueError:
                raise DataFormatError(
                    "non-binary label at %s line %d" % (path, i + 1)
                ) from None
            if v not in (0.0, 1.0):
                raise DataFormatError(
                    "non-binary label %r at %s line %d" % (c.strip(), path, i + 1)
                )
            row.append(v)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataFormatError("ragged label row at %s line %d" % (path, i + 1))
        matrix.append(row)
    return np.array(matrix, dtype=np.float64).T


def load_labels(labels_path):
    """Load just a binary label CSV, returning the L x N matrix and names."""
    rows, names = _parse_csv(labels_path)
    return _parse_label_rows(rows, labels_path), names


def _write_csv(path, matrix, names):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + ",".join(names) + "\n")
        for col in matrix.T:
            fh.write(",".join(_FLOAT_FMT % v for v in col) + "\n")


def save_dataset(data: Dataset, features_path, labels_path) -> None:
    """Write the dataset as two sample-major CSV files with name headers."""
    _write_csv(features_path, data.features, data.feature_names)
    with open(labels_path, "w", encoding="utf-8") as fh:
        fh.write("# " + ",".join(data.label_names) + "\n")
        for col in data.labels.T:
            fh.write(",".join("%d" % int(v) for v in col) + "\n")


def normalize_features(train: Dataset):
    """Min-max scale every feature of the training set into [0, 1].

    Constant features map to 0. Returns the scaled dataset and the
    fitted :class:`NormStats`.
    """
    stats = NormStats(train.features.min(axis=1), train.features.max(axis=1))
    return apply_norm(train, stats), stats


def apply_norm(data: Dataset, stats: NormStats) -> Dataset:
    """Apply training min-max stats; out-of-range values clip to [0, 1]."""
    if stats.minimum.shape[0] != data.n_features:
        raise ValueError("normalization stats do not match feature count")
    span = stats.maximum - stats.minimum
    safe = np.where(span > 0.0, span, 1.0)
    scaled = (data.features - stats.minimum[:, None]) / safe[:, None]
    scaled = np.where(span[:, None] > 0.0, scaled, 0.0)
    scaled = np.clip(scaled, 0.0, 1.0)
    return Dataset(scaled, data.labels, data.feature_names, data.label_names)


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Assign n samples to k folds by a seeded uniform shuffle.

    Folds are disjoint, cover all samples and differ in size by at most
    one. Identical (n, k, seed) always produces the same plan.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError("k must not exceed the sample count")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    assignments[rng.permutation(n)] = np.arange(n) % k
    return FoldPlan(k, assignments)


def take_samples(data: Dataset, indices) -> Dataset:
    """Column subset of a dataset, preserving names."""
    idx = np.asarray(indices, dtype=np.int64)
    return Dataset(
        data.features[:, idx],
        data.labels[:, idx],
        data.feature_names,
        data.label_names,
    )
