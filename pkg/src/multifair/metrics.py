"""Performance and group-fairness metrics for binary classifiers.

Group metrics compare the unprivileged side of a :class:`GroupAssignment`
against the privileged side:

    DI  = P(pred=1 | unprivileged) / P(pred=1 | privileged)      ideal 1
    SPD = P(pred=1 | unprivileged) - P(pred=1 | privileged)      ideal 0
    AOD = ((FPR_u - FPR_p) + (TPR_u - TPR_p)) / 2                ideal 0
    EOD = TPR_u - TPR_p                                          ideal 0

A DI whose denominator rate is zero while the numerator is not is returned
as ``inf`` and flagged "di_undefined" in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import GroupAssignment
from .errors import DataError, MetricUndefinedError

DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class PredictionSet:
    """Aligned scores, thresholded predictions, and true labels."""

    scores: np.ndarray
    predictions: np.ndarray
    labels: np.ndarray
    threshold: float = DECISION_THRESHOLD

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        predictions = np.asarray(self.predictions)
        labels = np.asarray(self.labels)
        n = scores.shape[0]
        if scores.ndim != 1 or predictions.shape != (n,) or labels.shape != (n,):
            raise DataError("scores, predictions, and labels must be equal-length vectors")
        if n == 0:
            raise DataError("empty prediction set")
        if not ((scores >= 0.0) & (scores <= 1.0)).all():
            raise DataError("scores must lie in [0, 1]")
        if not np.isin(predictions, (0, 1)).all() or not np.isin(labels, (0, 1)).all():
            raise DataError("predictions and labels must be 0 or 1")
        expected = scores >= self.threshold
        if not np.array_equal(predictions.astype(bool), expected):
            raise DataError("predictions must equal scores thresholded at the decision threshold")
        predictions = predictions.astype(np.int64)
        labels = labels.astype(np.int64)
        for arr in (scores, predictions, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_scores(cls, scores, labels, threshold: float = DECISION_THRESHOLD) -> "PredictionSet":
        scores = np.asarray(scores, dtype=np.float64)
        predictions = (scores >= threshold).astype(np.int64)
        return cls(scores, predictions, labels, threshold)

    def __len__(self) -> int:
        return self.scores.shape[0]


@dataclass(frozen=True)
class FairnessReport:
    """One attribute's row pair of the report table: four group-fairness
    values plus the shared performance triple.  ``flags`` records partial
    support or an undefined DI."""

    attribute_name: str
    di: float
    spd: float
    aod: float
    eod: float
    acc: float
    auroc: float
    auprc: float
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("spd", "aod", "eod", "acc", "auroc", "auprc"):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"{name} must be finite")
        if math.isnan(self.di) or self.di < 0:
            raise DataError("di must be non-negative (inf allowed when flagged undefined)")


def _group_masks(preds: PredictionSet, group: GroupAssignment) -> tuple[np.ndarray, np.ndarray]:
    if len(group) != len(preds):
        raise DataError("group assignment not row-aligned with predictions")
    unpriv = group.unprivileged_mask
    priv = group.privileged_mask
    if not unpriv.any() or not priv.any():
        raise DataError(f"attribute {group.attribute_name!r}: empty group")
    return unpriv, priv


def selection_rate(preds: PredictionSet, mask: np.ndarray) -> float:
    """Fraction of rows in ``mask`` predicted favorable."""
    return float(preds.predictions[mask].mean())


def disparate_impact(preds: PredictionSet, group: GroupAssignment) -> float:
    """Unprivileged over privileged favorable-prediction rate.

    Both rates zero -> 1.0; only the privileged rate zero -> inf (reported
    as undefined).
    """
    unpriv, priv = _group_masks(preds, group)
    rate_u = selection_rate(preds, unpriv)
    rate_p = selection_rate(preds, priv)
    if rate_p == 0.0:
        return 1.0 if rate_u == 0.0 else math.inf
    return rate_u / rate_p


def statistical_parity_difference(preds: PredictionSet, group: GroupAssignment) -> float:
    """Unprivileged minus privileged favorable-prediction rate."""
    unpriv, priv = _group_masks(preds, group)
    return selection_rate(preds, unpriv) - selection_rate(preds, priv)


def _rate(preds: PredictionSet, mask: np.ndarray) -> float:
    # Empty conditioning set contributes rate 0 (flagged as partial support).
    return float(preds.predictions[mask].mean()) if mask.any() else 0.0


def average_odds_difference(preds: PredictionSet, group: GroupAssignment) -> float:
    """Mean of the FPR and TPR gaps, unprivileged minus privileged.

    A group missing positives (or negatives) contributes TPR (FPR) 0; use
    :func:`odds_support_complete` to detect that case.
    """
    unpriv, priv = _group_masks(preds, group)
    pos = preds.labels == 1
    tpr_u = _rate(preds, unpriv & pos)
    tpr_p = _rate(preds, priv & pos)
    fpr_u = _rate(preds, unpriv & ~pos)
    fpr_p = _rate(preds, priv & ~pos)
    return 0.5 * ((fpr_u - fpr_p) + (tpr_u - tpr_p))


def odds_support_complete(preds: PredictionSet, group: GroupAssignment) -> bool:
    """True when both groups contain at least one positive and one negative."""
    unpriv, priv = _group_masks(preds, group)
    pos = preds.labels == 1
    return all(
        (mask & side).any()
        for mask in (pos, ~pos)
        for side in (unpriv, priv)
    )


def equal_opportunity_difference(preds: PredictionSet, group: GroupAssignment) -> float:
    """TPR gap, unprivileged minus privileged."""
    unpriv, priv = _group_masks(preds, group)
    pos = preds.labels == 1
    if not (unpriv & pos).any() or not (priv & pos).any():
        raise MetricUndefinedError(
            f"EOD undefined: attribute {group.attribute_name!r} has a group with no positive labels"
        )
    tpr_u = float(preds.predictions[unpriv & pos].mean())
    tpr_p = float(preds.predictions[priv & pos].mean())
    return tpr_u - tpr_p


def auroc(scores, labels) -> float:
    """Rank-statistic AUROC: probability a random positive outranks a
    random negative, ties counted one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int(labels.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefinedError("AUROC undefined: labels contain a single class")
    ranks = rankdata(scores)  # average ranks over ties
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auprc(scores, labels) -> float:
    """Average precision over the descending-score sweep, grouping tied
    scores into a single threshold step."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise MetricUndefinedError("AUPRC undefined: no positive labels")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # Threshold step boundaries: last index of each tied block.
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0)
    boundaries = np.append(boundaries, sorted_scores.shape[0] - 1)
    tp = np.cumsum(sorted_labels == 1)[boundaries].astype(np.float64)
    predicted = (boundaries + 1).astype(np.float64)
    precision = tp / predicted
    recall = tp / n_pos
    recall_steps = np.diff(recall, prepend=0.0)
    return float(np.sum(recall_steps * precision))


def accuracy(preds: PredictionSet) -> float:
    """Fraction of predictions that match the labels."""
    return float((preds.predictions == preds.labels).mean())


def evaluate_fairness(preds: PredictionSet, group: GroupAssignment) -> FairnessReport:
    """All seven report metrics for one attribute, with support flags."""
    di = disparate_impact(preds, group)
    flags = []
    if math.isinf(di):
        flags.append("di_undefined")
    if not odds_support_complete(preds, group):
        flags.append("aod_partial_support")
    return FairnessReport(
        attribute_name=group.attribute_name,
        di=di,
        spd=statistical_parity_difference(preds, group),
        aod=average_odds_difference(preds, group),
        eod=equal_opportunity_difference(preds, group),
        acc=accuracy(preds),
        auroc=auroc(preds.scores, preds.labels),
        auprc=auprc(preds.scores, preds.labels),
        flags=tuple(flags),
    )
