"""Experiment orchestration: single runs, comparisons, sweeps, output files.

Every run is driven by one RunConfig: reference generation, pseudo-
differentiation, control and plant advance in lockstep at dt_nominal
(optionally with jittered timestamps).  Noise and jitter streams derive
from (noise_seed, repeat), so a run is reproducible bit-exactly and the
same repeat index sees identical noise under every controller kind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adaptforward import AdaptiveParams
from .control import CascadeConfig, CascadeController
from .core import ConfigError, ControllerKind, RunConfig, TimeSeries, validate_config
from .csvlog import aligned_table, fmt, series_to_csv, table_to_csv, write_json, write_text
from .metrics import ErrorMetrics, analysis_window, compute_metrics, format_cell, mean_metrics
from .plant import Plant, PlantParams
from .signals import PseudoDiff2, Sinusoid

# Sweep protocol constants: the sinusoid centroid is always 30 deg; the
# amplitude sweep holds the period at 8 s and the period sweep holds the
# amplitude at 20 deg.
SWEEP_CENTROID = 30.0
AMPLITUDE_SWEEP = (10.0, 15.0, 25.0, 30.0)
PERIOD_SWEEP = (10.0, 8.0, 6.0, 4.0, 2.0)
SWEEP_FIXED_PERIOD = 8.0
SWEEP_FIXED_AMPLITUDE = 20.0
SWEEP_CYCLES = 7

ALL_CONTROLLERS = (ControllerKind.PID, ControllerKind.PID_FF, ControllerKind.PID_AF)


class NumericalAbort(RuntimeError):
    """A run produced a non-finite value; carries step index and state."""

    def __init__(self, step: int, t: float, state: dict):
        self.step = step
        self.t = t
        self.state = state
        super().__init__(f"non-finite value at step {step} (t={t:.6f} s): {state}")


def default_config(kind: ControllerKind = ControllerKind.PID_AF, *,
                   amplitude: float = SWEEP_FIXED_AMPLITUDE,
                   period: float = SWEEP_FIXED_PERIOD,
                   cycles: int = SWEEP_CYCLES,
                   noise: bool = True,
                   noise_seed: int = 1,
                   repeats: int = 5,
                   jitter_fraction: float = 0.0) -> RunConfig:
    """Canonical sinusoid-tracking config with the published gain defaults."""
    plant = PlantParams() if noise else PlantParams(noise_sigma_theta=0.0, noise_sigma_p=0.0)
    return RunConfig(
        reference=Sinusoid(SWEEP_CENTROID, amplitude, period, cycles=cycles),
        controller_kind=kind,
        cascade=CascadeConfig(),
        adaptive=AdaptiveParams(),
        plant=plant,
        duration=cycles * period,
        jitter_fraction=jitter_fraction,
        noise_seed=noise_seed,
        repeats=repeats,
    )


@dataclass(frozen=True, slots=True)
class RunResult:
    """One run's full log plus windowed metrics and reproduction info."""

    series: TimeSeries
    metrics: ErrorMetrics
    config: RunConfig
    seed: int    # noise_seed of the config
    repeat: int  # repeat index the streams were derived from


def _derive_rngs(noise_seed: int, repeat: int):
    ss = np.random.SeedSequence([noise_seed, repeat])
    plant_ss, jitter_ss = ss.spawn(2)
    return np.random.default_rng(plant_ss), np.random.default_rng(jitter_ss)


def run_experiment(config: RunConfig, repeat: int = 0,
                   analysis: tuple[str, float] | None = None) -> RunResult:
    """Simulate one closed-loop run and log every sample.

    analysis selects the metrics window as (protocol, period), e.g.
    ("sweep_7period", 8.0); None scores the whole series.
    """
    validate_config(config)
    dt = config.dt_nominal
    n = max(1, int(round(config.duration / dt)))
    plant_rng, jitter_rng = _derive_rngs(config.noise_seed, repeat)

    if config.jitter_fraction > 0.0:
        incr = dt * (1.0 + config.jitter_fraction * jitter_rng.uniform(-1.0, 1.0, n - 1))
        ts = np.concatenate(([0.0], np.cumsum(incr))).tolist()
    else:
        ts = (np.arange(n) * dt).tolist()

    plant = Plant(config.plant, rng=plant_rng)
    controller = CascadeController(config.cascade, config.adaptive, config.controller_kind)
    diff2 = PseudoDiff2()

    ref_at = config.reference.value
    diff_step = diff2.step
    ctrl_step = controller.step
    plant_step = plant.step
    isfinite = math.isfinite

    theta, pa, pb = plant.measure()
    rows = []
    append = rows.append
    for k in range(n):
        tk = ts[k]
        ref = ref_at(tk)
        d1, d2 = diff_step(ref, tk)
        cs = ctrl_step(ref, d1, d2, theta, pa, pb, tk)
        u_a = cs.u_a
        u_b = cs.u_b
        if not (isfinite(u_a) and isfinite(u_b) and isfinite(theta)):
            raise NumericalAbort(k, tk, {
                "theta_meas": theta, "p_a_meas": pa, "p_b_meas": pb,
                "u_a": u_a, "u_b": u_b, "pd_a": cs.pd_a, "pd_b": cs.pd_b,
                "theta_true": plant.theta_true,
            })
        append((tk, ref, d1, d2, theta, ref - theta, pa, pb,
                cs.pd_a, cs.pd_b, u_a, u_b, cs.kp_a, cs.kp_b))
        if k + 1 < n:
            theta, pa, pb = plant_step(u_a, u_b, ts[k + 1] - tk)

    series = TimeSeries.from_rows(rows, dt)
    scored = series if analysis is None else analysis_window(series, analysis[0], analysis[1])
    return RunResult(series, compute_metrics(scored.column("error")), config,
                     config.noise_seed, repeat)


@dataclass(frozen=True, slots=True)
class ExperimentPlan:
    """What to run: a single config, a controller comparison, or a sweep."""

    kind: str  # single | compare | sweep_amplitude | sweep_frequency | hysteresis
    base: RunConfig
    sweep_values: tuple[float, ...] = ()
    controllers: tuple[ControllerKind, ...] = ALL_CONTROLLERS
    analysis_protocol: str | None = None  # demo_3cycle | sweep_7period
    analysis_period: float | None = None

    def validate(self) -> None:
        kinds = ("single", "compare", "sweep_amplitude", "sweep_frequency", "hysteresis")
        if self.kind not in kinds:
            raise ConfigError(f"unknown plan kind {self.kind!r}")
        if self.kind.startswith("sweep") and not self.sweep_values:
            raise ConfigError(f"{self.kind} plan needs non-empty sweep_values")
        if not self.controllers:
            raise ConfigError("plan needs at least one controller")
        if (self.analysis_protocol is None) != (self.analysis_period is None):
            raise ConfigError("analysis_protocol and analysis_period go together")
        validate_config(self.base)

    def analysis(self) -> tuple[str, float] | None:
        if self.analysis_protocol is None:
            return None
        return (self.analysis_protocol, self.analysis_period)


def compare_plan(base: RunConfig | None = None,
                 controllers: tuple[ControllerKind, ...] = ALL_CONTROLLERS) -> ExperimentPlan:
    """Default comparison: 20 deg / 8 s sinusoid, 7 periods, central-5 window."""
    base = base if base is not None else default_config()
    period = base.reference.period if isinstance(base.reference, Sinusoid) else None
    return ExperimentPlan("compare", base, controllers=controllers,
                          analysis_protocol="sweep_7period" if period else None,
                          analysis_period=period)


def sweep_plan(mode: str, base: RunConfig | None = None,
               values: tuple[float, ...] = ()) -> ExperimentPlan:
    base = base if base is not None else default_config()
    if mode == "amplitude":
        values = values or AMPLITUDE_SWEEP
        return ExperimentPlan("sweep_amplitude", base, sweep_values=values,
                              analysis_protocol="sweep_7period",
                              analysis_period=SWEEP_FIXED_PERIOD)
    if mode == "frequency":
        values = values or PERIOD_SWEEP
        return ExperimentPlan("sweep_frequency", base, sweep_values=values,
                              analysis_protocol="sweep_7period", analysis_period=None)
    raise ConfigError(f"unknown sweep mode {mode!r}")


@dataclass(frozen=True, slots=True)
class ControllerOutcome:
    kind: ControllerKind
    runs: tuple[RunResult, ...]
    mean: ErrorMetrics


@dataclass(frozen=True, slots=True)
class CompareResult:
    plan: ExperimentPlan
    outcomes: dict[ControllerKind, ControllerOutcome]


@dataclass(frozen=True, slots=True)
class SweepResult:
    plan: ExperimentPlan
    rows: tuple[tuple[float, dict[ControllerKind, ControllerOutcome]], ...]


def _run_controllers(config: RunConfig, controllers, analysis):
    """Run every controller over the same repeats (same seeds, same noise)."""
    outcomes = {}
    for kind in controllers:
        cfg = config.replace(controller_kind=kind)
        runs = tuple(run_experiment(cfg, repeat=i, analysis=analysis)
                     for i in range(cfg.repeats))
        outcomes[kind] = ControllerOutcome(kind, runs, mean_metrics([r.metrics for r in runs]))
    return outcomes


def compare_controllers(plan: ExperimentPlan) -> CompareResult:
    """Identical reference, plant and seeds under each controller kind."""
    if plan.kind != "compare":
        raise ConfigError(f"expected a compare plan, got {plan.kind!r}")
    plan.validate()
    return CompareResult(plan, _run_controllers(plan.base, plan.controllers, plan.analysis()))


def _sweep_cell_config(plan: ExperimentPlan, value: float) -> tuple[RunConfig, float]:
    """Config and analysis period for one sweep value."""
    if plan.kind == "sweep_amplitude":
        amplitude, period = value, SWEEP_FIXED_PERIOD
    else:
        amplitude, period = SWEEP_FIXED_AMPLITUDE, value
    ref = Sinusoid(SWEEP_CENTROID, amplitude, period, cycles=SWEEP_CYCLES)
    cfg = plan.base.replace(reference=ref, duration=SWEEP_CYCLES * period)
    return cfg, period


def run_sweep(plan: ExperimentPlan) -> SweepResult:
    """Metrics per sweep value per controller (7 periods, central 5 scored)."""
    if plan.kind not in ("sweep_amplitude", "sweep_frequency"):
        raise ConfigError(f"expected a sweep plan, got {plan.kind!r}")
    plan.validate()
    rows = []
    for value in plan.sweep_values:
        cfg, period = _sweep_cell_config(plan, value)
        outcomes = _run_controllers(cfg, plan.controllers, ("sweep_7period", period))
        rows.append((value, outcomes))
    return SweepResult(plan, tuple(rows))


# ---------------------------------------------------------------------------
# Output files


def _controller_filename(kind: ControllerKind) -> str:
    return kind.value.replace("-", "_")


def _metrics_csv_rows(label_name: str, labelled_outcomes) -> tuple[list[str], list[list]]:
    header = [label_name, "controller", "mae", "rmse", "e_max", "e_min", "var"]
    rows = []
    for label, outcomes in labelled_outcomes:
        for kind, outcome in outcomes.items():
            m = outcome.mean
            rows.append([label, kind.value, m.mae, m.rmse, m.e_max, m.e_min, m.var])
    return header, rows


def _comparison_text(label_name: str, labelled_outcomes) -> str:
    """Aligned table in the `PID+AF (PID, PID+FF)` cell format."""
    header = [label_name, "MAE [deg]", "RMSE [deg]", "e_max [deg]", "e_min [deg]", "Var [deg^2]"]
    rows = []
    for label, outcomes in labelled_outcomes:
        af = outcomes[ControllerKind.PID_AF].mean
        pid = outcomes[ControllerKind.PID].mean
        ff = outcomes[ControllerKind.PID_FF].mean
        rows.append([str(label)] + [
            format_cell(a, p, f) for a, p, f in zip(af.as_tuple(), pid.as_tuple(), ff.as_tuple())
        ])
    note = "cells: PID+AF (PID, PID+FF)\n"
    return note + aligned_table(header, rows)


def emit_run(result: RunResult, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    kp0 = result.config.adaptive.kp0
    files = []
    run_csv = out_dir / "run.csv"
    write_text(run_csv, series_to_csv(result.series, kp0))
    files.append(run_csv)
    m = result.metrics
    header = ["controller", "mae", "rmse", "e_max", "e_min", "var"]
    rows = [[result.config.controller_kind.value, m.mae, m.rmse, m.e_max, m.e_min, m.var]]
    metrics_csv = out_dir / "metrics.csv"
    write_text(metrics_csv, table_to_csv(header, rows))
    files.append(metrics_csv)
    text_rows = [[result.config.controller_kind.value] + [fmt(v) for v in m.as_tuple()]]
    metrics_txt = out_dir / "metrics.txt"
    write_text(metrics_txt, aligned_table(
        ["controller", "MAE [deg]", "RMSE [deg]", "e_max [deg]", "e_min [deg]", "Var [deg^2]"],
        text_rows))
    files.append(metrics_txt)
    return files


def emit_compare(result: CompareResult, out_dir: Path) -> list[Path]:
    """Manifest: one run CSV per controller (repeat 0) + metrics.{csv,txt}."""
    out_dir = Path(out_dir)
    kp0 = result.plan.base.adaptive.kp0
    files = []
    for kind, outcome in result.outcomes.items():
        path = out_dir / f"{_controller_filename(kind)}.csv"
        write_text(path, series_to_csv(outcome.runs[0].series, kp0))
        files.append(path)
    ref = result.plan.base.reference
    label = (f"{ref.amplitude:g}deg/{ref.period:g}s" if isinstance(ref, Sinusoid)
             else type(ref).__name__.lower())
    labelled = [(label, result.outcomes)]
    header, rows = _metrics_csv_rows("reference", labelled)
    metrics_csv = out_dir / "metrics.csv"
    write_text(metrics_csv, table_to_csv(header, rows))
    files.append(metrics_csv)
    metrics_txt = out_dir / "metrics.txt"
    if set(ALL_CONTROLLERS) <= set(result.outcomes):
        write_text(metrics_txt, _comparison_text("reference", labelled))
    else:
        write_text(metrics_txt, aligned_table(
            ["controller", "MAE [deg]", "RMSE [deg]", "e_max [deg]", "e_min [deg]", "Var [deg^2]"],
            [[k.value] + [fmt(v) for v in o.mean.as_tuple()] for k, o in result.outcomes.items()]))
    files.append(metrics_txt)
    return files


def emit_sweep(result: SweepResult, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    label_name = "amplitude_deg" if result.plan.kind == "sweep_amplitude" else "period_s"
    labelled = [(fmt(float(v)), outcomes) for v, outcomes in result.rows]
    header, rows = _metrics_csv_rows(label_name, labelled)
    files = []
    metrics_csv = out_dir / "metrics.csv"
    write_text(metrics_csv, table_to_csv(header, rows))
    files.append(metrics_csv)
    metrics_txt = out_dir / "metrics.txt"
    if all(set(ALL_CONTROLLERS) <= set(o) for _, o in result.rows):
        write_text(metrics_txt, _comparison_text(label_name, labelled))
    else:
        flat = [[lbl, k.value] + [fmt(v) for v in o.mean.as_tuple()]
                for lbl, outcomes in labelled for k, o in outcomes.items()]
        write_text(metrics_txt, aligned_table(
            [label_name, "controller", "MAE", "RMSE", "e_max", "e_min", "Var"], flat))
    files.append(metrics_txt)
    return files


def emit_outputs(result, out_dir: Path) -> list[Path]:
    """Write the result's file manifest; dispatches on result type."""
    if isinstance(result, RunResult):
        return emit_run(result, out_dir)
    if isinstance(result, CompareResult):
        return emit_compare(result, out_dir)
    if isinstance(result, SweepResult):
        return emit_sweep(result, out_dir)
    from .hysteresis import HysteresisResult, emit_hysteresis

    if isinstance(result, HysteresisResult):
        return emit_hysteresis(result, out_dir)
    raise TypeError(f"cannot emit outputs for {type(result).__name__}")
