"""Forecast metrics, the multi-horizon evaluation sweep, and table emission.

All metrics are computed on the normalized scale (the store keeps
denormalized forecasts for display). Aggregation across horizons uses the
arithmetic mean and population std — the sweep's horizons are the whole
population, not a sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import BricklineError, EmptyInput, ShapeMismatch
from .dlinear import (
    HORIZONS,
    LOOKBACK_STEPS,
    TrainConfig,
    forward,
    seasonal_naive,
    split_window_starts,
    train,
)
from .preprocess import PreprocessedDataset

METRIC_NAMES = ("mae", "mse", "smape")


def _check_pair(yhat, y):
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if yhat.shape != y.shape:
        raise ShapeMismatch(f"shapes differ: {yhat.shape} vs {y.shape}")
    if yhat.size == 0:
        raise EmptyInput("empty metric input")
    return yhat, y


def mae(yhat, y) -> float:
    yhat, y = _check_pair(yhat, y)
    return float(np.mean(np.abs(yhat - y)))


def mse(yhat, y) -> float:
    yhat, y = _check_pair(yhat, y)
    d = yhat - y
    return float(np.mean(d * d))


def smape(yhat, y) -> float:
    """Symmetric MAPE on the 0-200 scale: (100/n) * sum 2|f-a| / (|f|+|a|).

    A term with |f|+|a| = 0 contributes 0 (both sides agree on zero).
    """
    yhat, y = _check_pair(yhat, y)
    num = 2.0 * np.abs(yhat - y)
    den = np.abs(yhat) + np.abs(y)
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(100.0 * np.mean(terms))


@dataclass(frozen=True)
class MetricReport:
    model_id: str
    horizons: tuple[int, ...]
    per_horizon: tuple[dict, ...]  # one {"mae","mse","smape"} dict per horizon
    aggregate: dict                # {metric}_mean / {metric}_std

    def recompute_aggregate(self) -> dict:
        return aggregate_scores(self.per_horizon)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "horizons": list(self.horizons),
            "per_horizon": [dict(p) for p in self.per_horizon],
            "aggregate": dict(self.aggregate),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MetricReport":
        return cls(
            model_id=payload["model_id"],
            horizons=tuple(payload["horizons"]),
            per_horizon=tuple(dict(p) for p in payload["per_horizon"]),
            aggregate=dict(payload["aggregate"]),
        )


def aggregate_scores(per_horizon) -> dict:
    out = {}
    for name in METRIC_NAMES:
        vals = np.array([p[name] for p in per_horizon], dtype=np.float64)
        out[f"{name}_mean"] = float(np.mean(vals))
        out[f"{name}_std"] = float(np.std(vals))  # population std
    return out


def score_windows(predict, dataset: PreprocessedDataset, horizon: int,
                  lookback: int = LOOKBACK_STEPS) -> dict:
    """Metrics for one horizon over every stride-1 test window.

    `predict` maps a B x S x C batch to B x H x C forecasts.
    """
    _, _, test_starts = split_window_starts(
        dataset.n_steps, dataset.train_end, dataset.val_end, lookback, horizon)
    if test_starts.size == 0:
        raise EmptyInput(f"test split holds no S={lookback}, H={horizon} window")
    matrix = dataset.matrix
    x = matrix[test_starts[:, None] + np.arange(lookback)[None, :]]
    y = matrix[test_starts[:, None] + lookback + np.arange(horizon)[None, :]]
    yhat = predict(x)
    if yhat.shape != y.shape:
        raise ShapeMismatch(f"predictor returned {yhat.shape}, expected {y.shape}")
    return {"mae": mae(yhat, y), "mse": mse(yhat, y), "smape": smape(yhat, y)}


def dlinear_factory(config: TrainConfig = TrainConfig(), on_trained=None):
    """Model factory for evaluate_sweep: trains a fresh model per horizon."""
    def make(dataset: PreprocessedDataset, horizon: int):
        model, log = train(dataset, horizon, config)
        if on_trained is not None:
            on_trained(horizon, model, log)
        return lambda x: forward(model, x)
    return make


def snaive_factory(period: int = 144):
    """Seasonal-naive factory: repeats the last observed period, no training."""
    def make(dataset: PreprocessedDataset, horizon: int):
        return lambda x: seasonal_naive(x, horizon, period)
    return make


def evaluate_sweep(
    dataset: PreprocessedDataset,
    model_factory,
    horizons=HORIZONS,
    model_id: str = "dlinear",
    lookback: int = LOOKBACK_STEPS,
) -> MetricReport:
    """Per-horizon test metrics plus mean±std aggregate across horizons."""
    horizons = tuple(horizons)
    if not horizons:
        raise EmptyInput("no horizons to evaluate")
    per_horizon = []
    for h in horizons:
        predict = model_factory(dataset, h)
        per_horizon.append(score_windows(predict, dataset, h, lookback))
    return MetricReport(
        model_id=model_id,
        horizons=horizons,
        per_horizon=tuple(per_horizon),
        aggregate=aggregate_scores(per_horizon),
    )


# --------------------------------------------------------------------------
# table emission


def format_cell(mean: float, std: float) -> str:
    return f"{mean:.3f}±{std:.3f}"


def _best_flags(reports) -> list[set]:
    """For each report, the set of metric names where it has the best (lowest)
    aggregate mean; ties flag every tied report."""
    flags = [set() for _ in reports]
    for name in METRIC_NAMES:
        means = [r.aggregate[f"{name}_mean"] for r in reports]
        best = min(means)
        for i, m in enumerate(means):
            if m == best:
                flags[i].add(name)
    return flags


def emit_table(reports, fmt: str = "plain") -> str:
    """Render `model | MAE | MSE | SMAPE` rows as plain text, CSV, or LaTeX.

    Cells are mean±std with 3 decimals; the best value per column is flagged
    (plain/CSV: trailing `*`; LaTeX: wrapped in \\textcolor{red}).
    """
    if not reports:
        raise EmptyInput("no reports to render")
    if fmt not in ("plain", "csv", "latex"):
        raise ValueError(f"unknown table format {fmt!r}")
    flags = _best_flags(reports)
    headers = ["model", "MAE", "MSE", "SMAPE"]

    rows = []
    for report, best in zip(reports, flags):
        cells = [report.model_id]
        for name in METRIC_NAMES:
            cell = format_cell(report.aggregate[f"{name}_mean"], report.aggregate[f"{name}_std"])
            if name in best:
                cell = f"\\textcolor{{red}}{{{cell}}}" if fmt == "latex" else cell + "*"
            cells.append(cell)
        rows.append(cells)

    if fmt == "csv":
        return "\n".join(",".join(cells) for cells in [headers] + rows) + "\n"
    if fmt == "latex":
        lines = [
            "\\begin{tabular}{lccc}",
            "\\hline",
            " & ".join(headers) + " \\\\",
            "\\hline",
        ]
        lines += [" & ".join(cells) + " \\\\" for cells in rows]
        lines += ["\\hline", "\\end{tabular}"]
        return "\n".join(lines) + "\n"
    widths = [max(len(r[i]) for r in [headers] + rows) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip() for cells in rows]
    return "\n".join(lines) + "\n"
