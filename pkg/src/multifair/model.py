"""Weighted logistic regression trained by deterministic gradient descent.

The fit minimizes

    L(theta, b) = sum_i w_i * CE(sigmoid(z_i theta + b), y_i) + l2 * ||theta||^2

over weight-standardized features z (so zero-weight rows influence
nothing and constant columns keep coefficient exactly 0).  The optimizer
is full-batch gradient descent with a Barzilai-Borwein trial step and
Armijo backtracking: monotone in the loss, free of randomness, and
bit-reproducible on a fixed platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import Dataset
from .errors import DataError
from .reweighting import SampleWeights


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; the defaults suit datasets up to Adult scale.

    ``seed`` is kept for config compatibility: the optimizer starts from
    zero parameters and uses no randomness.
    """

    l2_penalty: float = 1e-4
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.l2_penalty < 0:
            raise DataError("l2_penalty must be non-negative")
        if self.max_iterations < 1:
            raise DataError("max_iterations must be positive")
        if self.gradient_tolerance <= 0:
            raise DataError("gradient_tolerance must be positive")


@dataclass(frozen=True)
class ModelParams:
    """Fitted coefficients plus the standardization applied at fit time."""

    feature_names: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    means: np.ndarray
    scales: np.ndarray
    converged: bool
    n_iter: int

    def __post_init__(self):
        for name in ("coefficients", "means", "scales"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise DataError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cols(self) -> int:
        return self.coefficients.shape[0]


def weighted_loss_and_gradient(coefficients, intercept, features, labels, weights, l2_penalty):
    """Weighted cross-entropy loss with L2 on the coefficients, and its
    analytic gradient (d/dcoefficients, d/dintercept).

    Uses log1p/exp-free softplus via logaddexp for numerical stability.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    z = features @ coefficients + intercept
    # CE_i = y*softplus(-z) + (1-y)*softplus(z)
    ce = labels * np.logaddexp(0.0, -z) + (1.0 - labels) * np.logaddexp(0.0, z)
    loss = float(weights @ ce + l2_penalty * (coefficients @ coefficients))
    residual = weights * (expit(z) - labels)
    grad_coef = features.T @ residual + 2.0 * l2_penalty * coefficients
    grad_intercept = float(residual.sum())
    return loss, grad_coef, grad_intercept


def _descend(loss_grad, x0, max_iterations, gradient_tolerance):
    """Monotone gradient descent with BB trial steps and Armijo backtracking.

    Returns (x, n_iter, converged, losses); losses holds the accepted
    values and is non-increasing by construction.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    loss, grad = loss_grad(x)
    losses = [loss]
    prev_x = prev_grad = None
    step = 1.0
    n_iter = 0
    converged = False
    while n_iter < max_iterations:
        if np.abs(grad).max() < gradient_tolerance:
            converged = True
            break
        if prev_x is not None:
            s = x - prev_x
            y = grad - prev_grad
            sy = float(s @ y)
            if sy > 0.0:
                step = float(s @ s) / sy
        else:
            step = 1.0 / max(1.0, float(np.abs(grad).max()))
        step = min(max(step, 1e-16), 1e16)
        grad_sq = float(grad @ grad)
        accepted = False
        while step >= 1e-20:
            candidate = x - step * grad
            cand_loss, cand_grad = loss_grad(candidate)
            if cand_loss <= loss - 1e-4 * step * grad_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # numerically flat; no step yields sufficient decrease
        prev_x, prev_grad = x, grad
        x, loss, grad = candidate, cand_loss, cand_grad
        losses.append(loss)
        n_iter += 1
    else:
        converged = bool(np.abs(grad).max() < gradient_tolerance)
    return x, n_iter, converged, losses


def _standardization(features: np.ndarray, weights: np.ndarray):
    """Weighted per-column mean and scale.

    Exactly constant columns get mean = the constant and scale 1, so the
    standardized column is identically zero and its coefficient never
    moves off 0.  Columns with no weighted variation likewise get scale 1.
    """
    total = weights.sum()
    means = (weights @ features) / total
    centered = features - means
    variances = (weights @ (centered * centered)) / total
    scales = np.sqrt(variances)
    constant = np.ptp(features, axis=0) == 0.0
    means[constant] = features[0, constant]
    scales[constant] = 1.0
    scales[scales <= 0.0] = 1.0
    return means, scales


def fit(train: Dataset, weights: SampleWeights, config: TrainConfig = TrainConfig()) -> ModelParams:
    """Train weighted logistic regression on ``train``.

    Raises DataError when the weights are misaligned or when either class
    carries zero weight mass (a single-class problem has no finite
    cross-entropy optimum of interest).
    """
    if len(weights) != train.n_rows:
        raise DataError("weights not row-aligned with the training data")
    if train.n_rows < 2:
        raise DataError("need at least 2 training rows")
    w = weights.values
    y = train.labels.astype(np.float64)
    if w[train.labels == 1].sum() <= 0.0 or w[train.labels == 0].sum() <= 0.0:
        raise DataError("single-class training labels (one class has zero weight mass)")

    means, scales = _standardization(train.features, w)
    standardized = (train.features - means) / scales
    d = train.n_cols

    def loss_grad(params):
        loss, grad_coef, grad_b = weighted_loss_and_gradient(
            params[:d], params[d], standardized, y, w, config.l2_penalty
        )
        return loss, np.append(grad_coef, grad_b)

    x0 = np.zeros(d + 1)
    x, n_iter, converged, _ = _descend(
        loss_grad, x0, config.max_iterations, config.gradient_tolerance
    )
    return ModelParams(
        feature_names=train.column_names,
        coefficients=x[:d],
        intercept=float(x[d]),
        means=means,
        scales=scales,
        converged=converged,
        n_iter=n_iter,
    )


def predict_scores(model: ModelParams, data: Dataset) -> np.ndarray:
    """Sigmoid scores in (0, 1) for each row, applying the stored
    standardization."""
    if data.n_cols != model.n_cols:
        raise DataError(
            f"column count mismatch: model fit on {model.n_cols}, data has {data.n_cols}"
        )
    z = ((data.features - model.means) / model.scales) @ model.coefficients + model.intercept
    return np.clip(expit(z), 1e-12, 1.0 - 1e-12)


def save_model(model: ModelParams, path) -> None:
    """Audit-friendly JSON serialization of the fitted parameters."""
    payload = {
        "feature_names": list(model.feature_names),
        "coefficients": model.coefficients.tolist(),
        "intercept": model.intercept,
        "means": model.means.tolist(),
        "scales": model.scales.tolist(),
        "converged": model.converged,
        "n_iter": model.n_iter,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def load_model(path) -> ModelParams:
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    return ModelParams(
        feature_names=tuple(payload["feature_names"]),
        coefficients=np.array(payload["coefficients"], dtype=np.float64),
        intercept=float(payload["intercept"]),
        means=np.array(payload["means"], dtype=np.float64),
        scales=np.array(payload["scales"], dtype=np.float64),
        converged=bool(payload["converged"]),
        n_iter=int(payload["n_iter"]),
    )
