"""CSV ingestion, binary subsetting and feature normalization."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

IRIS_SHA256 = "9cc1c345c71bcc9b486b74cbf6063fa66f4bb5e0f603a4b3c3471ec2e5e8e355"


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RawTable:
    features: np.ndarray
    classes: tuple[str, ...]
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]  # distinct values in order of first appearance

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, str]

    def __post_init__(self) -> None:
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise DataError(f"inconsistent shapes X={self.X.shape} y={self.y.shape}")
        if not set(np.unique(self.y)) <= {0, 1}:
            raise DataError("labels must be binary")

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.X.min(axis=0), self.X.max(axis=0)

    def __len__(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True, eq=False)
class AffineTransform:
    """Per-feature map ``x -> scale * x + offset``."""

    scale: np.ndarray
    offset: np.ndarray

    def apply(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) * self.scale + self.offset

    def inverse(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.offset) / self.scale

    def to_dict(self) -> dict:
        return {"scale": self.scale.tolist(), "offset": self.offset.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineTransform":
        return cls(np.array(d["scale"], dtype=float), np.array(d["offset"], dtype=float))


def iris_path() -> Path:
    return Path(str(resources.files("qlime") / "assets" / "iris.csv"))


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_csv(path, feature_columns=None, class_column: str | None = None) -> RawTable:
    """Read a headed CSV with numeric feature columns and one string class column.

    By default the last column holds the class and every other column is a
    feature.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty table")
    header = [c.strip() for c in rows[0][1]]
    if class_column is None:
        class_column = header[-1]
    if class_column not in header:
        raise DataError(f"{path}: class column {class_column!r} not in header")
    if feature_columns is None:
        feature_columns = [c for c in header if c != class_column]
    missing = [c for c in feature_columns if c not in header]
    if missing:
        raise DataError(f"{path}: unknown feature columns {missing}")
    if len(rows) == 1:
        raise DataError(f"{path}: empty table (header only)")
    fidx = [header.index(c) for c in feature_columns]
    cidx = header.index(class_column)

    features, classes = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            features.append([float(row[i]) for i in fidx])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric feature value ({exc})") from None
        classes.append(row[cidx].strip())
    return RawTable(
        features=np.array(features, dtype=float),
        classes=tuple(classes),
        feature_names=tuple(feature_columns),
        class_names=tuple(dict.fromkeys(classes)),
    )


def subset_binary(table: RawTable, class_a: str, class_b: str, feature_i: str, feature_j: str) -> Dataset:
    """Keep rows of two classes (``class_a`` -> 0, ``class_b`` -> 1) and two features."""
    if class_a == class_b:
        raise DataError("class_a and class_b must differ")
    if feature_i == feature_j:
        raise DataError("feature_i and feature_j must differ")
    for c in (class_a, class_b):
        if c not in table.class_names:
            raise DataError(f"unknown class {c!r}; available: {list(table.class_names)}")
    for f in (feature_i, feature_j):
        if f not in table.feature_names:
            raise DataError(f"unknown feature {f!r}; available: {list(table.feature_names)}")
    classes = np.array(table.classes)
    keep = (classes == class_a) | (classes == class_b)
    cols = [table.feature_names.index(feature_i), table.feature_names.index(feature_j)]
    return Dataset(
        X=table.features[keep][:, cols].copy(),
        y=(classes[keep] == class_b).astype(int),
        feature_names=(feature_i, feature_j),
        class_names=(class_a, class_b),
    )


def normalize(ds: Dataset, lo: float = 0.0, hi: float = np.pi) -> tuple[Dataset, AffineTransform]:
    """Map every feature's observed range onto ``[lo, hi]``."""
    if not lo < hi:
        raise DataError(f"need lo < hi, got [{lo}, {hi}]")
    mn, mx = ds.bounds
    span = mx - mn
    if np.any(span <= 0):
        bad = [ds.feature_names[i] for i in np.flatnonzero(span <= 0)]
        raise DataError(f"constant feature column(s) {bad}: range is degenerate")
    scale = (hi - lo) / span
    transform = AffineTransform(scale=scale, offset=lo - mn * scale)
    X = transform.apply(ds.X)
    # pin extremes exactly, rounding can leave them 1 ulp outside
    X = np.clip(X, lo, hi)
    return replace(ds, X=X), transform


def train_test_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split."""
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must be in (0, 1)")
    order = np.random.default_rng(seed).permutation(len(ds))
    n_test = int(round(test_fraction * len(ds)))
    test, train = order[:n_test], order[n_test:]
    return replace(ds, X=ds.X[train], y=ds.y[train]), replace(ds, X=ds.X[test], y=ds.y[test])


def load_iris_binary(class_a: str | None = None, class_b: str | None = None,
                     feature_i: str | None = None, feature_j: str | None = None) -> Dataset:
    """Bundled Iris subset; defaults to the first two classes and first two features."""
    table = load_csv(iris_path())
    return subset_binary(
        table,
        class_a or table.class_names[0],
        class_b or table.class_names[1],
        feature_i or table.feature_names[0],
        feature_j or table.feature_names[1],
    )
