"""Tabular dataset loading, binarization, and deterministic splitting.

A :class:`Dataset` is the single source of truth for rows, labels, and
column encodings.  CSV ingestion one-hot encodes text columns in
first-appearance order so that reloading the same file always yields the
same matrix, and rejects missing or non-finite numeric cells instead of
imputing them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, DegenerateAttributeError


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric feature matrix with binary labels.

    features: (n_rows, n_cols) float64, no NaN/inf.
    labels: (n_rows,) values in {0, 1}, 1 being the favorable outcome.
    column_names: unique non-empty names, one per feature column.
    """

    features: np.ndarray
    labels: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels)
        names = tuple(self.column_names)
        if features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if features.shape[0] < 1 or features.shape[1] < 1:
            raise DataError("dataset must have at least one row and one column")
        if not np.isfinite(features).all():
            raise DataError("features contain NaN or infinite values")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DataError("labels must be one value per row")
        if not np.isin(labels, (0, 1)).all():
            raise DataError("labels must be exactly 0 or 1")
        if len(names) != features.shape[1]:
            raise DataError("column_names must name every feature column")
        if any(not isinstance(n, str) or not n for n in names):
            raise DataError("column names must be non-empty strings")
        if len(set(names)) != len(names):
            raise DataError("duplicate column names")
        labels = labels.astype(np.int64)
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "column_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_cols(self) -> int:
        return self.features.shape[1]

    def column(self, name: str) -> np.ndarray:
        """Read-only view of one feature column."""
        try:
            idx = self.column_names.index(name)
        except ValueError:
            raise DataError(f"unknown column {name!r}") from None
        return self.features[:, idx]

    def take(self, rows: np.ndarray) -> "Dataset":
        """New Dataset restricted to the given row indices (order preserved)."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.labels[rows], self.column_names)


@dataclass(frozen=True)
class GroupAssignment:
    """Per-sample binary membership for one attribute.

    ``membership`` codes each row 0 or 1.  ``privileged_value`` names the
    code whose group the fairness metrics treat as privileged; it starts
    unset and is assigned via :func:`set_privileged`.
    """

    attribute_name: str
    membership: np.ndarray
    privileged_value: int | None = None

    def __post_init__(self):
        membership = np.asarray(self.membership)
        if membership.ndim != 1:
            raise DataError("membership must be a 1-D vector")
        if not np.isin(membership, (0, 1)).all():
            raise DataError("membership values must be 0 or 1")
        if self.privileged_value not in (None, 0, 1):
            raise DataError("privileged_value must be 0, 1, or None")
        membership = membership.astype(np.int8)
        membership.setflags(write=False)
        object.__setattr__(self, "membership", membership)

    def __len__(self) -> int:
        return self.membership.shape[0]

    def group_mask(self, code: int) -> np.ndarray:
        return self.membership == code

    def _require_privileged(self) -> int:
        if self.privileged_value is None:
            raise DataError(
                f"privileged side not set for attribute {self.attribute_name!r}"
            )
        return self.privileged_value

    @property
    def privileged_mask(self) -> np.ndarray:
        return self.membership == self._require_privileged()

    @property
    def unprivileged_mask(self) -> np.ndarray:
        return self.membership != self._require_privileged()

    def unprivileged_indicator(self) -> np.ndarray:
        """1 for rows on the unprivileged side, 0 otherwise."""
        return self.unprivileged_mask.astype(np.int64)

    def with_privileged(self, value: int) -> "GroupAssignment":
        return replace(self, privileged_value=value)


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test partition parameters."""

    test_fraction: float = 0.2
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise DataError("test_fraction must lie strictly between 0 and 1")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise DataError("seed must be a non-negative integer")


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, label_column: str, positive_label: str) -> Dataset:
    """Load a headered CSV file into a :class:`Dataset`.

    The label column must hold at most two distinct values, one of them
    ``positive_label`` (mapped to 1).  Columns whose non-empty cells all
    parse as numbers become float features; any other column is one-hot
    encoded into ``name=value`` indicator columns, categories ordered by
    first appearance.  Cell whitespace is stripped, so comma-space
    separated files load cleanly.

    Raises DataError for: duplicate or missing header names, row arity
    mismatches, empty or non-finite numeric cells, or a label value
    outside the declared positive/negative pair.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue  # blank line
            if len(raw) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(raw)}"
                )
            rows.append([cell.strip() for cell in raw])

    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header")
    if not rows:
        raise DataError(f"{path}: no data rows")

    label_idx = header.index(label_column)
    label_values = [row[label_idx] for row in rows]
    others = []
    for value in label_values:
        if value != positive_label and value not in others:
            others.append(value)
    if len(others) > 1:
        raise DataError(
            f"{path}: label value outside declared pair: expected {positive_label!r} "
            f"plus one other value, found {sorted(others)}"
        )
    labels = np.array([1 if v == positive_label else 0 for v in label_values])

    columns: list[np.ndarray] = []
    names: list[str] = []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        cells = [row[j] for row in rows]
        parsed = [None if c == "" else _parse_float(c) for c in cells]
        numeric = all(p is not None for c, p in zip(cells, parsed) if c != "")
        if numeric:
            for i, (c, p) in enumerate(zip(cells, parsed)):
                if c == "":
                    raise DataError(
                        f"{path}: missing numeric value in column {name!r}, data row {i + 1}"
                    )
                if not math.isfinite(p):
                    raise DataError(
                        f"{path}: non-finite numeric value {c!r} in column {name!r}"
                    )
            columns.append(np.array([p for p in parsed], dtype=np.float64))
            names.append(name)
        else:
            categories: list[str] = []
            for c in cells:
                if c not in categories:
                    categories.append(c)
            for cat in categories:
                columns.append(
                    np.array([1.0 if c == cat else 0.0 for c in cells], dtype=np.float64)
                )
                names.append(f"{name}={cat}")

    if not columns:
        raise DataError(f"{path}: no feature columns besides the label")
    return Dataset(np.column_stack(columns), labels, tuple(names))


def save_csv(dataset: Dataset, path, label_column: str = "label",
             positive_label: str = "1", negative_label: str = "0") -> None:
    """Write a Dataset back out as a headered CSV (inverse of load_csv for
    all-numeric data)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(dataset.column_names) + [label_column])
        for i in range(dataset.n_rows):
            row = [repr(float(v)) for v in dataset.features[i]]
            row.append(positive_label if dataset.labels[i] == 1 else negative_label)
            writer.writerow(row)


def binarize_by_threshold(dataset: Dataset, column: str, threshold: float) -> GroupAssignment:
    """Group rows by whether ``column`` strictly exceeds ``threshold``."""
    values = dataset.column(column)
    membership = values > threshold
    if membership.all() or not membership.any():
        raise DegenerateAttributeError(
            f"degenerate attribute {column!r}: threshold {threshold!r} leaves one group empty"
        )
    return GroupAssignment(column, membership.astype(np.int8))


def binarize_by_mean(dataset: Dataset, column: str) -> GroupAssignment:
    """Binarize a numeric column against its own mean (strictly greater -> 1).

    Constant columns cannot be split and raise DegenerateAttributeError.
    The privileged side is left unset; see :func:`set_privileged`.
    """
    values = dataset.column(column)
    return binarize_by_threshold(dataset, column, float(values.mean()))


def set_privileged(group: GroupAssignment, dataset: Dataset) -> GroupAssignment:
    """Mark as privileged the group code with the higher favorable-label
    base rate, breaking ties toward code 1."""
    mask1 = group.group_mask(1)
    if not mask1.any() or mask1.all():
        raise DataError(
            f"attribute {group.attribute_name!r}: both groups must be non-empty"
        )
    labels = dataset.labels
    rate1 = float(labels[mask1].mean())
    rate0 = float(labels[~mask1].mean())
    return group.with_privileged(1 if rate1 >= rate0 else 0)


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled (train, test) partition.

    The test side gets floor(n_rows * test_fraction) rows, never fewer
    than one.  The same spec always produces the same partition.
    """
    n = dataset.n_rows
    if n < 2:
        raise DataError("need at least 2 rows to split")
    n_test = max(1, math.floor(n * spec.test_fraction))
    if n_test >= n:
        raise DataError("degenerate fraction: split would empty the training side")
    perm = np.random.default_rng(spec.seed).permutation(n)
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return dataset.take(train_rows), dataset.take(test_rows)
