"""Tracking-error metrics, analysis windows, and multi-run aggregation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TimeSeries, series_window

METRIC_NAMES = ("mae", "rmse", "e_max", "e_min", "var")


@dataclass(frozen=True, slots=True)
class ErrorMetrics:
    """Summary of a tracking-error series over one analysis window.

    var is the population variance, so rmse**2 == mean(e)**2 + var holds
    exactly (up to rounding).
    """

    mae: float    # deg
    rmse: float   # deg
    e_max: float  # deg
    e_min: float  # deg
    var: float    # deg^2

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.mae, self.rmse, self.e_max, self.e_min, self.var)


def compute_metrics(errors) -> ErrorMetrics:
    """MAE, RMSE, extrema and population variance of an error series."""
    e = np.asarray(errors, dtype=np.float64)
    if e.size == 0:
        raise ValueError("cannot compute metrics of an empty error series")
    return ErrorMetrics(
        mae=float(np.mean(np.abs(e))),
        rmse=float(np.sqrt(np.mean(e * e))),
        e_max=float(np.max(e)),
        e_min=float(np.min(e)),
        var=float(np.var(e)),
    )


def mean_metrics(per_run: list[ErrorMetrics]) -> ErrorMetrics:
    """Average per-run metrics across repeats (runs stay independent)."""
    if not per_run:
        raise ValueError("need at least one run")
    stacked = np.array([m.as_tuple() for m in per_run])
    return ErrorMetrics(*(float(v) for v in stacked.mean(axis=0)))


def analysis_window(series: TimeSeries, protocol: str, period: float) -> TimeSeries:
    """Cut the transient-free portion of a run.

    demo_3cycle: the reference was applied three times back to back; keep
    the middle application, [period, 2*period).
    sweep_7period: seven sinusoid periods; keep the central five,
    [period, 6*period).
    """
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    if protocol == "demo_3cycle":
        needed, t0, t1 = 3.0 * period, period, 2.0 * period
    elif protocol == "sweep_7period":
        needed, t0, t1 = 7.0 * period, period, 6.0 * period
    else:
        raise ValueError(f"unknown analysis protocol {protocol!r}")
    if len(series) == 0 or series.t[-1] < needed - 1.5 * series.dt_nominal:
        raise ValueError(
            f"series covers {series.t[-1] if len(series) else 0.0:.3f} s, "
            f"but {protocol} needs {needed:.3f} s")
    return series_window(series, t0, t1, required=True)


@dataclass(frozen=True, slots=True)
class AggregateSeries:
    """Pointwise mean and min/max envelope of one field across runs."""

    t: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def aggregate_runs(runs: list[TimeSeries], field: str) -> AggregateSeries:
    """Aggregate a Sample field across runs sharing identical timestamps."""
    if not runs:
        raise ValueError("need at least one run")
    t = runs[0].t
    for r in runs[1:]:
        if len(r) != len(runs[0]) or not np.array_equal(r.t, t):
            raise ValueError("runs must share identical timestamps; resample first")
    stack = np.vstack([r.column(field) for r in runs])
    return AggregateSeries(
        t=t.copy(),
        mean=stack.mean(axis=0),
        lower=stack.min(axis=0),
        upper=stack.max(axis=0),
    )


def format_cell(af: float, pid: float, ff: float) -> str:
    """One table cell in the comparison format: AF (PID, FF)."""
    return f"{af:.2g} ({pid:.2g}, {ff:.2g})"
