"""Deterministic synthetic classification datasets and CSV ingestion.

Labels are 0-based everywhere (memory and files). Generation is a pure
function of the spec: same spec, bit-identical arrays.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import CsvParseError

GENERATORS = ("blobs", "spirals")
TEST_FRACTION = 0.2  # fixed 80/20 split


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (N, D) plus integer labels in [0, K)."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError(f"features must be a non-empty (N, D) matrix, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain NaN or Inf")
        if y.shape != (x.shape[0],):
            raise ValueError("labels must be one per sample")
        if y.min() < 0 or y.max() >= self.num_classes:
            raise ValueError(f"labels must lie in [0, {self.num_classes})")

    @property
    def num_samples(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class DataSpec:
    generator: str = "blobs"
    num_classes: int = 10
    dim: int = 10
    num_samples: int = 2000
    class_separation: float = 3.0
    noise_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}, got {self.generator!r}")
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.num_samples < self.num_classes:
            raise ValueError("need at least one sample per class")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.class_separation <= 0:
            raise ValueError("class_separation must be > 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.generator == "spirals" and self.dim != 2:
            raise ValueError("spirals are defined for dim == 2 only")


def blob_means(spec):
    """Class-mean layout for the blobs generator.

    dim >= num_classes: mean_k = class_separation * e_k (scaled simplex,
    pairwise distance sqrt(2) * class_separation). Otherwise the means sit on
    a circle of radius class_separation in the first two dimensions.
    """
    k, d = spec.num_classes, spec.dim
    means = np.zeros((k, d))
    if d >= k:
        means[np.arange(k), np.arange(k)] = spec.class_separation
    else:
        if d < 2:
            raise ValueError("blobs with dim < num_classes requires dim >= 2")
        angles = 2.0 * np.pi * np.arange(k) / k
        means[:, 0] = spec.class_separation * np.cos(angles)
        means[:, 1] = spec.class_separation * np.sin(angles)
    return means


def _generate_blobs(spec, labels, rng):
    means = blob_means(spec)
    noise = rng.standard_normal((spec.num_samples, spec.dim)) * spec.noise_std
    return means[labels] + noise


def _generate_spirals(spec, labels, rng):
    # K interleaved arms; radius grows with t, arm angle offset by 2*pi*k/K.
    t = rng.uniform(0.15, 1.0, size=spec.num_samples)
    radius = spec.class_separation * t
    angle = 2.0 * np.pi * (1.5 * t + labels / spec.num_classes)
    x = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
    return x + rng.standard_normal((spec.num_samples, 2)) * spec.noise_std


def generate(spec):
    """Build (train, test) datasets from a spec.

    Labels cycle 0..K-1 so every class appears; the split is a stratified
    round-robin: within each class, every fifth sample goes to the test set.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    labels = np.arange(spec.num_samples) % spec.num_classes
    if spec.generator == "blobs":
        features = _generate_blobs(spec, labels, rng)
    else:
        features = _generate_spirals(spec, labels, rng)

    in_test = np.zeros(spec.num_samples, dtype=bool)
    for c in range(spec.num_classes):
        idx = np.flatnonzero(labels == c)
        in_test[idx[4::5]] = True

    train = Dataset(features[~in_test], labels[~in_test], spec.num_classes)
    test = Dataset(features[in_test], labels[in_test], spec.num_classes)
    return train, test


def save_csv(dataset, path):
    """Write rows "f1,...,fD,label" with full-precision features."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row, label in zip(dataset.features, dataset.labels):
            fh.write(",".join(format(v, ".17g") for v in row))
            fh.write(f",{int(label)}\n")


def _is_numeric(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_csv(path):
    """Parse a feature/label table; a non-numeric first row is treated as a header.

    Every row must carry the same number of features followed by a
    non-negative integer label; K is inferred as max(label) + 1.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for line_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if line_no == 1 and not _is_numeric(row[0]):
                continue  # header
            if width is None:
                width = len(row)
                if width < 2:
                    raise CsvParseError(f"row {line_no}: need at least one feature and a label")
            elif len(row) != width:
                raise CsvParseError(
                    f"row {line_no}: expected {width} fields, got {len(row)}"
                )
            try:
                features = [float(tok) for tok in row[:-1]]
            except ValueError:
                raise CsvParseError(f"row {line_no}: non-numeric feature value") from None
            label_tok = row[-1].strip()
            try:
                label = int(label_tok)
            except ValueError:
                raise CsvParseError(f"row {line_no}: label {label_tok!r} is not an integer") from None
            if label < 0:
                raise CsvParseError(f"row {line_no}: negative label {label}")
            if not all(np.isfinite(features)):
                raise CsvParseError(f"row {line_no}: non-finite feature value")
            rows.append((features, label))
    if not rows:
        raise CsvParseError("file contains no data rows")
    features = np.array([r[0] for r in rows], dtype=np.float64)
    labels = np.array([r[1] for r in rows], dtype=np.int64)
    return Dataset(features, labels, num_classes=int(labels.max()) + 1)
