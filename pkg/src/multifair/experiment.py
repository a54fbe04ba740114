"""Experiment orchestration: configs, the detect/reweight/fit/evaluate
pipeline, level-weight grid search, and report emission.

Reports follow the two-rows-per-condition table layout: every evaluated
attribute gets a row, the performance triple (ACC/AUROC/AUPRC) shared
across a condition's rows.  Structured output is JSON; the companion
``.txt`` file holds the aligned-column human table.  Nothing in a report
depends on wall-clock state, so identical configs produce byte-identical
files.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .data import (
    Dataset,
    GroupAssignment,
    SplitSpec,
    binarize_by_threshold,
    load_csv,
    set_privileged,
    split,
)
from .detection import DetectionConfig, DetectionResult, detect
from .errors import (
    ConfigError,
    DataError,
    DegenerateAttributeError,
    MetricUndefinedError,
    PipelineError,
    UnreachableCellError,
)
from .metrics import PredictionSet, auroc, evaluate_fairness
from .model import TrainConfig, fit, predict_scores
from .reweighting import (
    LevelWeightConfig,
    SampleWeights,
    m3fair,
    reweight_sequential,
    reweight_single_attribute,
    save_weights_csv,
)

METHODS = ("none", "rw_single", "rw_sequential", "m3fair")


@dataclass(frozen=True)
class DatasetConfig:
    path: str
    label_column: str
    positive_label: str


@dataclass(frozen=True)
class ExperimentConfig:
    """One experimental condition; mirrors the JSON config file field-for-field."""

    dataset: DatasetConfig
    sensitive_attributes: tuple[str, ...]
    method: str = "none"
    split: SplitSpec = SplitSpec()
    attribute_order: tuple[str, ...] | None = None
    level_weights: dict[str, int] | None = None
    detection: DetectionConfig = DetectionConfig()
    train: TrainConfig = TrainConfig()
    report_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sensitive_attributes", tuple(self.sensitive_attributes))
        if self.attribute_order is not None:
            object.__setattr__(self, "attribute_order", tuple(self.attribute_order))
        attrs = self.sensitive_attributes
        if not attrs:
            raise ConfigError("sensitive_attributes must not be empty")
        if len(set(attrs)) != len(attrs):
            raise ConfigError("duplicate sensitive attribute names")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        # Method-specific fields must be present exactly when required.
        if self.method == "rw_sequential":
            if not self.attribute_order:
                raise ConfigError("rw_sequential requires attribute_order")
            unknown = set(self.attribute_order) - set(attrs)
            if unknown:
                raise ConfigError(f"attribute_order names not in sensitive_attributes: {sorted(unknown)}")
        elif self.attribute_order is not None:
            raise ConfigError(f"attribute_order is only valid for rw_sequential, not {self.method!r}")
        if self.method == "m3fair":
            if not self.level_weights:
                raise ConfigError("m3fair requires level_weights")
            LevelWeightConfig(self.level_weights)  # value validation
            unknown = set(self.level_weights) - set(attrs)
            if unknown:
                raise ConfigError(f"level_weights names not in sensitive_attributes: {sorted(unknown)}")
        elif self.level_weights is not None:
            raise ConfigError(f"level_weights is only valid for m3fair, not {self.method!r}")
        if self.method == "rw_single" and len(attrs) != 1:
            raise ConfigError("rw_single requires exactly one sensitive attribute")

    def to_dict(self) -> dict:
        payload = {
            "dataset": {
                "path": self.dataset.path,
                "label_column": self.dataset.label_column,
                "positive_label": self.dataset.positive_label,
            },
            "split": {"test_fraction": self.split.test_fraction, "seed": self.split.seed},
            "sensitive_attributes": list(self.sensitive_attributes),
            "method": self.method,
            "detection": {
                "top_n": self.detection.top_n,
                "candidate_columns": (
                    None
                    if self.detection.candidate_columns is None
                    else list(self.detection.candidate_columns)
                ),
            },
            "train": {
                "l2_penalty": self.train.l2_penalty,
                "max_iterations": self.train.max_iterations,
                "gradient_tolerance": self.train.gradient_tolerance,
                "seed": self.train.seed,
            },
        }
        if self.attribute_order is not None:
            payload["attribute_order"] = list(self.attribute_order)
        if self.level_weights is not None:
            payload["level_weights"] = dict(self.level_weights)
        if self.report_path is not None:
            payload["report_path"] = self.report_path
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        def section(name, allowed, required=()):
            raw = payload.get(name)
            if raw is None:
                return {}
            if not isinstance(raw, dict):
                raise ConfigError(f"config section {name!r} must be an object")
            unknown = set(raw) - set(allowed)
            if unknown:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
            missing = set(required) - set(raw)
            if missing:
                raise ConfigError(f"missing keys in {name!r}: {sorted(missing)}")
            return raw

        allowed_top = {
            "dataset", "split", "sensitive_attributes", "method",
            "attribute_order", "level_weights", "detection", "train", "report_path",
        }
        unknown = set(payload) - allowed_top
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "dataset" not in payload:
            raise ConfigError("config requires a 'dataset' section")
        if "sensitive_attributes" not in payload:
            raise ConfigError("config requires 'sensitive_attributes'")

        ds = section("dataset", ("path", "label_column", "positive_label"),
                     required=("path", "label_column", "positive_label"))
        sp = section("split", ("test_fraction", "seed"))
        de = section("detection", ("top_n", "candidate_columns"))
        tr = section("train", ("l2_penalty", "max_iterations", "gradient_tolerance", "seed"))
        level_weights = payload.get("level_weights")
        if level_weights is not None:
            level_weights = dict(level_weights)
        return cls(
            dataset=DatasetConfig(ds["path"], ds["label_column"], ds["positive_label"]),
            sensitive_attributes=tuple(payload["sensitive_attributes"]),
            method=payload.get("method", "none"),
            split=SplitSpec(**sp),
            attribute_order=(
                tuple(payload["attribute_order"]) if payload.get("attribute_order") is not None else None
            ),
            level_weights=level_weights,
            detection=DetectionConfig(
                top_n=de.get("top_n", 20),
                candidate_columns=(
                    tuple(de["candidate_columns"]) if de.get("candidate_columns") else None
                ),
            ),
            train=TrainConfig(**tr),
            report_path=payload.get("report_path"),
        )

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def config_hash(self) -> str:
        """Hash of the experimental condition (the output location is not
        part of the experiment's identity)."""
        payload = self.to_dict()
        payload.pop("report_path", None)
        canonical = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ReportRow:
    """One (condition, evaluated attribute) line of the report table."""

    method: str
    sensitive_attributes: tuple[str, ...]
    evaluated_attribute: str
    acc: float
    auroc: float
    auprc: float
    di: float
    spd: float
    aod: float
    eod: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[ReportRow, ...]
    seed: int
    config_hash: str
    converged: bool
    n_iter: int


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc


def _binarize_on_train(train: Dataset, other: Dataset, names) -> tuple[dict, dict]:
    """Binarize each attribute with the training-split mean as threshold and
    the training-split base rates choosing the privileged side; the same
    threshold and side carry over to the other split."""
    train_groups: dict[str, GroupAssignment] = {}
    other_groups: dict[str, GroupAssignment] = {}
    for name in names:
        threshold = float(train.column(name).mean())
        assignment = set_privileged(binarize_by_threshold(train, name, threshold), train)
        train_groups[name] = assignment
        other_groups[name] = binarize_by_threshold(other, name, threshold).with_privileged(
            assignment.privileged_value
        )
    return train_groups, other_groups


def _training_weights(config: ExperimentConfig, train: Dataset, groups: dict) -> SampleWeights:
    unit = SampleWeights.unit(train.n_rows)
    if config.method == "none":
        return unit
    if config.method == "rw_single":
        return reweight_single_attribute(train.labels, groups[config.sensitive_attributes[0]], unit)
    if config.method == "rw_sequential":
        ordered = [groups[name] for name in config.attribute_order]
        return reweight_sequential(train.labels, ordered, unit)
    return m3fair(
        train.labels,
        list(groups.values()),
        LevelWeightConfig(config.level_weights),
        unit,
    )


def _method_attributes(config: ExperimentConfig) -> tuple[str, ...]:
    if config.method == "rw_sequential":
        return config.attribute_order
    if config.method == "m3fair":
        return tuple(config.level_weights)
    return config.sensitive_attributes


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute one condition end to end and return (and optionally emit)
    its report.

    Stage order: load -> split -> binarize -> reweight -> fit -> evaluate
    -> report.  Any stage failure aborts with a diagnostic naming it.
    """
    ds = config.dataset
    dataset = _stage("load", load_csv, ds.path, ds.label_column, ds.positive_label)
    train, test = _stage("split", split, dataset, config.split)
    train_groups, test_groups = _stage(
        "binarize", _binarize_on_train, train, test, config.sensitive_attributes
    )
    weights = _stage("reweight", _training_weights, config, train, train_groups)
    model = _stage("fit", fit, train, weights, config.train)

    def evaluate():
        scores = predict_scores(model, test)
        preds = PredictionSet.from_scores(scores, test.labels)
        rows = []
        for name in config.sensitive_attributes:
            fairness = evaluate_fairness(preds, test_groups[name])
            rows.append(
                ReportRow(
                    method=config.method,
                    sensitive_attributes=_method_attributes(config),
                    evaluated_attribute=name,
                    acc=fairness.acc,
                    auroc=fairness.auroc,
                    auprc=fairness.auprc,
                    di=fairness.di,
                    spd=fairness.spd,
                    aod=fairness.aod,
                    eod=fairness.eod,
                    flags=fairness.flags,
                )
            )
        return ExperimentReport(
            rows=tuple(rows),
            seed=config.split.seed,
            config_hash=config.config_hash(),
            converged=model.converged,
            n_iter=model.n_iter,
        )

    report = _stage("evaluate", evaluate)
    if config.report_path is not None:
        _stage("report", emit_report, report, config.report_path)
    return report


def run_detection(config: ExperimentConfig) -> DetectionResult:
    """Detect biased columns on the training split using predictions from
    an unweighted baseline model fit on that split."""
    ds = config.dataset
    dataset = _stage("load", load_csv, ds.path, ds.label_column, ds.positive_label)
    train, _ = _stage("split", split, dataset, config.split)
    model = _stage("fit", fit, train, SampleWeights.unit(train.n_rows), config.train)

    def run_detect():
        preds = PredictionSet.from_scores(predict_scores(model, train), train.labels)
        return detect(train, preds, config.detection)

    result = _stage("detect", run_detect)
    if config.report_path is not None:
        _stage("report", emit_detection, result, config.report_path)
    return result


def compute_training_weights(config: ExperimentConfig) -> SampleWeights:
    """The training-split weights the configured method would train with."""
    ds = config.dataset
    dataset = _stage("load", load_csv, ds.path, ds.label_column, ds.positive_label)
    train, test = _stage("split", split, dataset, config.split)
    train_groups, _ = _stage(
        "binarize", _binarize_on_train, train, test, config.sensitive_attributes
    )
    return _stage("reweight", _training_weights, config, train, train_groups)


def export_training_weights(config: ExperimentConfig, path) -> SampleWeights:
    weights = compute_training_weights(config)
    _stage("report", save_weights_csv, weights, path)
    return weights


# ---------------------------------------------------------------------------
# Grid search over level weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSearchConfig:
    """Candidate level weights per attribute (default {1, 2} each) and the
    selection rule.

    The only selection metric is the composite unfairness score
    sum_attrs(|1 - DI| + |SPD| + |AOD| + |EOD|), computed on a validation
    split carved from the training data so the test split never guides
    selection.
    """

    candidates: dict[str, tuple[int, ...]] | None = None
    selection_metric: str = "composite_unfairness"
    validation_fraction: float = 0.2

    def __post_init__(self):
        if self.selection_metric != "composite_unfairness":
            raise ConfigError(f"unsupported selection metric {self.selection_metric!r}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie strictly between 0 and 1")
        if self.candidates is not None:
            cleaned = {}
            for name, values in self.candidates.items():
                values = tuple(values)
                if not values:
                    raise ConfigError(f"empty candidate set for attribute {name!r}")
                for v in values:
                    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                        raise ConfigError(f"candidate level weights must be positive integers, got {v!r}")
                cleaned[name] = values
            object.__setattr__(self, "candidates", cleaned)

    @classmethod
    def from_dict(cls, payload: dict) -> "GridSearchConfig":
        allowed = {"candidates", "selection_metric", "validation_fraction"}
        unknown = set(payload) - allowed
        if unknown:
            raise ConfigError(f"unknown grid config keys: {sorted(unknown)}")
        candidates = payload.get("candidates")
        if candidates is not None:
            candidates = {name: tuple(values) for name, values in candidates.items()}
        return cls(
            candidates=candidates,
            selection_metric=payload.get("selection_metric", "composite_unfairness"),
            validation_fraction=payload.get("validation_fraction", 0.2),
        )


@dataclass(frozen=True)
class GridPoint:
    """Outcome of one level-weight combination on the validation split."""

    level_weights: dict[str, int]
    status: str  # "ok" | "failed"
    score: float | None = None
    val_auroc: float | None = None
    reason: str | None = None


@dataclass(frozen=True)
class GridSearchResult:
    winner: LevelWeightConfig
    report: ExperimentReport
    points: tuple[GridPoint, ...]


def select_grid_winner(points) -> GridPoint:
    """Lowest composite score wins; ties break toward higher validation
    AUROC, then the lexicographically smaller level-weight tuple."""
    ok = [p for p in points if p.status == "ok"]
    if not ok:
        raise PipelineError("grid", "all grid points failed")
    return min(ok, key=lambda p: (p.score, -p.val_auroc, tuple(p.level_weights.values())))


def grid_search(
    config: ExperimentConfig, grid: GridSearchConfig = GridSearchConfig()
) -> GridSearchResult:
    """Sweep the Cartesian product of candidate level weights.

    Each point trains on a sub-training split and is scored on the carved
    validation split; points whose level partition has an unreachable
    (level, label) cell are recorded as failed and excluded from
    selection.  The winning level weights are then re-run as a full
    experiment (training on the whole training split, metrics on test).
    """
    if config.method != "m3fair":
        raise ConfigError("grid search requires method 'm3fair'")
    attrs = tuple(config.level_weights)
    candidates = grid.candidates or {name: (1, 2) for name in attrs}
    missing = set(attrs) - set(candidates)
    if missing:
        raise ConfigError(f"no candidate level weights for attributes: {sorted(missing)}")
    extra = set(candidates) - set(attrs)
    if extra:
        raise ConfigError(f"candidate attributes not in level_weights: {sorted(extra)}")

    ds = config.dataset
    dataset = _stage("load", load_csv, ds.path, ds.label_column, ds.positive_label)
    train, _test = _stage("split", split, dataset, config.split)
    subtrain, validation = _stage(
        "split", split, train, SplitSpec(grid.validation_fraction, config.split.seed)
    )
    sub_groups, val_groups = _stage(
        "binarize", _binarize_on_train, subtrain, validation, config.sensitive_attributes
    )

    points: list[GridPoint] = []
    for combo in itertools.product(*(candidates[name] for name in attrs)):
        level_weights = dict(zip(attrs, combo))
        try:
            weights = m3fair(
                subtrain.labels,
                list(sub_groups.values()),
                LevelWeightConfig(level_weights),
                SampleWeights.unit(subtrain.n_rows),
            )
            model = fit(subtrain, weights, config.train)
            preds = PredictionSet.from_scores(
                predict_scores(model, validation), validation.labels
            )
            composite = 0.0
            for name in config.sensitive_attributes:
                fairness = evaluate_fairness(preds, val_groups[name])
                di_term = math.inf if math.isinf(fairness.di) else abs(1.0 - fairness.di)
                composite += di_term + abs(fairness.spd) + abs(fairness.aod) + abs(fairness.eod)
            points.append(
                GridPoint(
                    level_weights=level_weights,
                    status="ok",
                    score=composite,
                    val_auroc=auroc(preds.scores, preds.labels),
                )
            )
        except (UnreachableCellError, MetricUndefinedError, DegenerateAttributeError, DataError) as exc:
            points.append(GridPoint(level_weights=level_weights, status="failed", reason=str(exc)))

    winner = select_grid_winner(points)
    final_config = replace(config, level_weights=winner.level_weights)
    report = run_experiment(final_config)
    return GridSearchResult(
        winner=LevelWeightConfig(winner.level_weights),
        report=report,
        points=tuple(points),
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def _report_paths(path) -> tuple[str, str]:
    base = str(path)
    if base.endswith(".json"):
        base = base[: -len(".json")]
    parent = Path(base).parent
    if parent and not parent.exists():
        parent.mkdir(parents=True, exist_ok=True)
    return base + ".json", base + ".txt"


def _json_float(value: float):
    return value if value is not None and math.isfinite(value) else None


def _format_sa(row: ReportRow) -> str:
    if row.method == "none":
        return "/"
    if row.method == "rw_sequential":
        return "->".join(row.sensitive_attributes)
    if row.method == "m3fair":
        return "[" + ", ".join(row.sensitive_attributes) + "]"
    return row.sensitive_attributes[0]


def format_report_table(report: ExperimentReport) -> str:
    """Aligned-column text table; performance columns are printed once per
    condition and left blank on its continuation rows."""
    headers = ["Method", "SA", "EA", "ACC", "AUROC", "AUPRC", "DI", "SPD", "AOD", "EOD"]
    body: list[list[str]] = []
    previous = None
    for row in report.rows:
        key = (row.method, row.sensitive_attributes)
        first = key != previous
        previous = key
        di_text = "undefined" if "di_undefined" in row.flags else f"{row.di:.4f}"
        body.append(
            [
                row.method if first else "",
                _format_sa(row) if first else "",
                row.evaluated_attribute,
                f"{row.acc:.4f}" if first else "",
                f"{row.auroc:.4f}" if first else "",
                f"{row.auprc:.4f}" if first else "",
                di_text,
                f"{row.spd:.4f}",
                f"{row.aod:.4f}",
                f"{row.eod:.4f}",
            ]
        )
    widths = [
        max(len(headers[i]), *(len(line[i]) for line in body)) if body else len(headers[i])
        for i in range(len(headers))
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for line in body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    return "\n".join(lines) + "\n"


def emit_report(report: ExperimentReport, path) -> None:
    """Write the structured JSON report and its aligned text table."""
    json_path, text_path = _report_paths(path)
    payload = {
        "rows": [
            {
                "method": row.method,
                "sensitive_attributes": list(row.sensitive_attributes),
                "evaluated_attribute": row.evaluated_attribute,
                "acc": row.acc,
                "auroc": row.auroc,
                "auprc": row.auprc,
                "di": _json_float(row.di),
                "spd": row.spd,
                "aod": row.aod,
                "eod": row.eod,
                "flags": list(row.flags),
            }
            for row in report.rows
        ],
        "metadata": {
            "seed": report.seed,
            "config_hash": report.config_hash,
            "converged": report.converged,
            "n_iter": report.n_iter,
        },
    }
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    with open(text_path, "w", encoding="utf-8") as handle:
        handle.write(format_report_table(report))


def load_report(path) -> ExperimentReport:
    """Re-parse an emitted JSON report into an equal ExperimentReport."""
    json_path, _ = _report_paths(path)
    with open(json_path, encoding="utf-8") as handle:
        payload = json.load(handle)
    rows = []
    for raw in payload["rows"]:
        flags = tuple(raw["flags"])
        di = raw["di"]
        if di is None:
            di = math.inf if "di_undefined" in flags else math.nan
        rows.append(
            ReportRow(
                method=raw["method"],
                sensitive_attributes=tuple(raw["sensitive_attributes"]),
                evaluated_attribute=raw["evaluated_attribute"],
                acc=raw["acc"],
                auroc=raw["auroc"],
                auprc=raw["auprc"],
                di=di,
                spd=raw["spd"],
                aod=raw["aod"],
                eod=raw["eod"],
                flags=flags,
            )
        )
    meta = payload["metadata"]
    return ExperimentReport(
        rows=tuple(rows),
        seed=meta["seed"],
        config_hash=meta["config_hash"],
        converged=meta["converged"],
        n_iter=meta["n_iter"],
    )


def emit_detection(result: DetectionResult, path) -> None:
    """Structured JSON for a detection run (rankings, intersection, skips)."""
    json_path, _ = _report_paths(path)
    payload = {
        "intersection": sorted(result.intersection),
        "skipped": [[column, reason] for column, reason in result.skipped],
        "rankings": {
            metric: [[column, _json_float(score)] for column, score in ranking]
            for metric, ranking in result.per_metric_rankings.items()
        },
    }
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def format_grid_table(result: GridSearchResult) -> str:
    headers = ["Levels", "Status", "Score", "ValAUROC", "Reason"]
    body = []
    for point in result.points:
        levels = ", ".join(f"{k}={v}" for k, v in point.level_weights.items())
        body.append(
            [
                levels,
                point.status,
                "" if point.score is None or not math.isfinite(point.score) else f"{point.score:.4f}",
                "" if point.val_auroc is None else f"{point.val_auroc:.4f}",
                point.reason or "",
            ]
        )
    widths = [
        max(len(headers[i]), *(len(line[i]) for line in body)) if body else len(headers[i])
        for i in range(len(headers))
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for line in body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    winner = ", ".join(f"{k}={v}" for k, v in result.winner.entries.items())
    lines.append("")
    lines.append(f"selected level weights: {winner}")
    return "\n".join(lines) + "\n"


def emit_grid(result: GridSearchResult, path) -> None:
    """Write the sweep table (JSON + text); the winner's experiment report
    is emitted separately via the experiment config's report_path."""
    json_path, text_path = _report_paths(path)
    payload = {
        "winner_level_weights": dict(result.winner.entries),
        "points": [
            {
                "level_weights": dict(point.level_weights),
                "status": point.status,
                "score": _json_float(point.score),
                "val_auroc": _json_float(point.val_auroc),
                "reason": point.reason,
            }
            for point in result.points
        ],
    }
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    with open(text_path, "w", encoding="utf-8") as handle:
        handle.write(format_grid_table(result))
