"""Sample weight computation for pre-processing bias mitigation.

Given a partition of the training rows into groups and binary labels, each
(group, label) cell's weights are rescaled so that group membership and
label become statistically independent under the weighted distribution:

    w'_i = w_i * (mass(label d) * mass(group g)) / (total mass * mass(cell g,d))

for row i in group g with label d, masses being prior-weight sums.  Summed
over cells this conserves total mass exactly, and every group's weighted
favorable rate afterwards equals the global favorable rate.

Three partitions are offered: a single attribute's two groups, a fold of
single-attribute passes (each pass consuming the previous pass's weights),
and the simultaneous multi-attribute partition by sensitivity level, where
a row's level is the sum of per-attribute level weights over the
attributes on whose unprivileged side it falls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import GroupAssignment
from .errors import ConfigError, DataError, UnreachableCellError


@dataclass(frozen=True)
class SampleWeights:
    """Non-negative per-row weights with strictly positive total."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DataError("weights must be a 1-D vector")
        if not np.isfinite(values).all():
            raise DataError("weights contain NaN or infinite values")
        if (values < 0).any():
            raise DataError("weights must be non-negative")
        if values.sum() <= 0.0:
            raise DataError("zero total weight")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def unit(cls, n_rows: int) -> "SampleWeights":
        return cls(np.ones(n_rows, dtype=np.float64))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def total(self) -> float:
        return float(self.values.sum())


@dataclass(frozen=True)
class LevelWeightConfig:
    """Ordered map from attribute name to its positive integer level weight."""

    entries: dict[str, int]

    def __post_init__(self):
        entries = dict(self.entries)
        if not entries:
            raise ConfigError("level weight config needs at least one attribute")
        for name, weight in entries.items():
            if not isinstance(weight, int) or isinstance(weight, bool) or weight < 1:
                raise ConfigError(
                    f"level weight for {name!r} must be a positive integer, got {weight!r}"
                )
        object.__setattr__(self, "entries", entries)

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def items(self):
        return self.entries.items()


@dataclass(frozen=True)
class SensitivityLevels:
    """Per-row integer levels plus the induced row partition."""

    levels: np.ndarray
    groups: dict[int, np.ndarray]

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.int64)
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_levels(cls, levels: np.ndarray) -> "SensitivityLevels":
        levels = np.asarray(levels, dtype=np.int64)
        groups = {int(lv): np.flatnonzero(levels == lv) for lv in np.unique(levels)}
        return cls(levels, groups)


def compute_sensitivity_levels(
    groups: Sequence[GroupAssignment], config: LevelWeightConfig
) -> SensitivityLevels:
    """Sum each configured attribute's level weight over the rows on its
    unprivileged side.

    Every configured attribute must have a row-aligned assignment with the
    privileged side already set.
    """
    by_name = {g.attribute_name: g for g in groups}
    selected = []
    for name in config.attributes:
        if name not in by_name:
            raise ConfigError(f"no group assignment for configured attribute {name!r}")
        selected.append(by_name[name])
    n = len(selected[0])
    if any(len(g) != n for g in selected):
        raise DataError("group assignments are not row-aligned")
    levels = np.zeros(n, dtype=np.int64)
    for assignment, (name, weight) in zip(selected, config.items()):
        levels += weight * assignment.unprivileged_indicator()
    return SensitivityLevels.from_levels(levels)


def reweight(labels, partition, prior: SampleWeights) -> SampleWeights:
    """Rescale weights so labels are independent of the partition groups.

    ``partition`` is a vector of integer group ids.  Raises
    UnreachableCellError when a (group, label) cell that must carry mass is
    empty or has zero prior weight.
    """
    labels = np.asarray(labels, dtype=np.int64)
    partition = np.asarray(partition, dtype=np.int64)
    weights = prior.values
    n = weights.shape[0]
    if labels.shape != (n,) or partition.shape != (n,):
        raise DataError("labels, partition, and weights must be row-aligned")
    if not np.isin(labels, (0, 1)).all():
        raise DataError("labels must be 0 or 1")

    total = weights.sum()
    label_mass = {d: weights[labels == d].sum() for d in (0, 1)}
    out = np.empty_like(weights)
    for g in np.unique(partition):
        group_mask = partition == g
        group_mass = weights[group_mask].sum()
        for d in (0, 1):
            cell = group_mask & (labels == d)
            demand = label_mass[d] * group_mass
            if not cell.any():
                if demand > 0.0:
                    raise UnreachableCellError(
                        f"unreachable cell: group {g} has no rows with label {d}"
                    )
                continue
            cell_mass = weights[cell].sum()
            if cell_mass <= 0.0:
                raise UnreachableCellError(
                    f"unreachable cell: group {g}, label {d} has zero prior weight"
                )
            out[cell] = weights[cell] * (demand / (total * cell_mass))
    return SampleWeights(out)


def reweight_single_attribute(
    labels, group: GroupAssignment, prior: SampleWeights
) -> SampleWeights:
    """Reweight with the attribute's two membership groups as the partition."""
    return reweight(labels, group.membership, prior)


def reweight_sequential(
    labels, groups: Sequence[GroupAssignment], prior: SampleWeights
) -> SampleWeights:
    """Chain single-attribute passes, each feeding the next as its prior."""
    if not groups:
        raise ConfigError("sequential reweighting needs at least one attribute")
    weights = prior
    for group in groups:
        weights = reweight_single_attribute(labels, group, weights)
    return weights


def m3fair(
    labels,
    groups: Sequence[GroupAssignment],
    config: LevelWeightConfig,
    prior: SampleWeights,
) -> SampleWeights:
    """Simultaneous multi-attribute reweighting over sensitivity levels.

    With a single configured attribute this reduces exactly to
    :func:`reweight_single_attribute` (the level partition has the same
    two fibers as the membership partition).
    """
    levels = compute_sensitivity_levels(groups, config)
    return reweight(labels, levels.levels, prior)


def save_weights_csv(weights: SampleWeights, path) -> None:
    """Single-column CSV, one weight per training row (header ``weight``)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("weight\n")
        for value in weights.values:
            handle.write(f"{float(value)!r}\n")


def load_weights_csv(path) -> SampleWeights:
    """Inverse of :func:`save_weights_csv`."""
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
        if header != "weight":
            raise DataError(f"{path}: expected header 'weight', got {header!r}")
        values = [float(line) for line in handle if line.strip()]
    return SampleWeights(np.array(values, dtype=np.float64))
