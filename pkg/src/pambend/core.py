"""Shared domain types for the dual-PAM actuator simulation.

Unit conventions, used everywhere and never converted:
    angles    degrees
    pressures kilopascal, gauge (0 kPa = atmospheric)
    time      seconds of simulated time (no wall clock anywhere)
    valves    volts

All value types here are plain immutable containers; run state lives in
the controller/plant objects that consume them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterator

import numpy as np

if TYPE_CHECKING:  # only for annotations; core has no runtime deps on siblings
    from .adaptforward import AdaptiveParams
    from .control import CascadeConfig
    from .plant import PlantParams
    from .signals import ReferenceSpec


class ConfigError(ValueError):
    """A run configuration violates one of its invariants."""


class ControllerKind(str, Enum):
    """Which parts of the hysteresis compensator are active."""

    PID = "pid"          # plain cascaded PID, compensator off
    PID_FF = "pid-ff"    # PID + feedforward differential term
    PID_AF = "pid-af"    # PID + feedforward + adaptive proportional gain


# Fixed column order for logs; also the CSV layout (kp columns stored as
# ratios kp/kp0 on disk, see csvlog).
SAMPLE_FIELDS = (
    "t",
    "theta_ref",
    "theta_ref_d1",
    "theta_ref_d2",
    "theta",
    "error",
    "p_a",
    "p_b",
    "pd_a",
    "pd_b",
    "u_a",
    "u_b",
    "kp_a",
    "kp_b",
)


@dataclass(frozen=True, slots=True)
class Sample:
    """One logged instant of a closed-loop run."""

    t: float             # s
    theta_ref: float     # deg
    theta_ref_d1: float  # deg/s, filtered pseudo-differential of the reference
    theta_ref_d2: float  # deg/s^2
    theta: float         # deg, measured bending angle
    error: float         # deg, theta_ref - theta
    p_a: float           # kPa, measured chamber pressure
    p_b: float           # kPa
    pd_a: float          # kPa, inner-loop pressure reference
    pd_b: float          # kPa
    u_a: float           # V, valve command
    u_b: float           # V
    kp_a: float          # kPa/deg, live outer proportional gain, subsystem A
    kp_b: float          # kPa/deg, subsystem B (magnitude; applied negated)


class TimeSeries:
    """Columnar record of a run: one float64 array per Sample field.

    Timestamps must be strictly increasing.  Iteration and indexing yield
    Sample views for convenience; bulk analysis should use the arrays.
    """

    __slots__ = ("columns", "dt_nominal")

    def __init__(self, columns: dict[str, np.ndarray], dt_nominal: float):
        if set(columns) != set(SAMPLE_FIELDS):
            missing = set(SAMPLE_FIELDS) ^ set(columns)
            raise ValueError(f"bad column set, mismatched fields: {sorted(missing)}")
        n = len(columns["t"])
        cols = {}
        for name in SAMPLE_FIELDS:
            arr = np.asarray(columns[name], dtype=np.float64)
            if arr.shape != (n,):
                raise ValueError(f"column {name} has shape {arr.shape}, expected ({n},)")
            cols[name] = arr
        t = cols["t"]
        if n > 1 and not np.all(np.diff(t) > 0.0):
            raise ValueError("timestamps must be strictly increasing")
        self.columns = cols
        self.dt_nominal = float(dt_nominal)

    @classmethod
    def from_rows(cls, rows: list[tuple], dt_nominal: float) -> "TimeSeries":
        """Build from row tuples ordered as SAMPLE_FIELDS."""
        data = np.asarray(rows, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != len(SAMPLE_FIELDS):
            raise ValueError("rows must be tuples matching SAMPLE_FIELDS")
        return cls({name: data[:, j] for j, name in enumerate(SAMPLE_FIELDS)}, dt_nominal)

    def __len__(self) -> int:
        return len(self.columns["t"])

    def __getitem__(self, i: int) -> Sample:
        return Sample(*(self.columns[name][i] for name in SAMPLE_FIELDS))

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]


def series_window(series: TimeSeries, t0: float, t1: float, *, required: bool = False) -> TimeSeries:
    """Samples with t0 <= t < t1, order preserved.

    With required=True an empty result raises (for mandatory analysis
    windows); otherwise an empty series is returned as-is.
    """
    if not t0 < t1:
        raise ValueError(f"window bounds must satisfy t0 < t1, got [{t0}, {t1})")
    t = series.t
    mask = (t >= t0) & (t < t1)
    if required and not mask.any():
        raise ValueError(f"analysis window [{t0}, {t1}) selected no samples")
    cols = {name: arr[mask] for name, arr in series.columns.items()}
    return TimeSeries(cols, series.dt_nominal)


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Everything needed to reproduce one experiment bit-exactly."""

    reference: "ReferenceSpec"
    controller_kind: ControllerKind
    cascade: "CascadeConfig"
    adaptive: "AdaptiveParams"
    plant: "PlantParams"
    duration: float            # s
    dt_nominal: float = 0.002  # s (500 Hz)
    jitter_fraction: float = 0.0   # per-step timestamp jitter, fraction of dt
    noise_seed: int = 1
    repeats: int = 1

    def replace(self, **kw) -> "RunConfig":
        import dataclasses

        return dataclasses.replace(self, **kw)


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def validate_config(config: RunConfig) -> RunConfig:
    """Return the config unchanged if every invariant holds.

    Raises ConfigError naming the first violated field and its value.
    Component parameter sets validate themselves (cascade, adaptive,
    plant, reference).
    """
    _check(math.isfinite(config.duration) and config.duration > 0,
           f"duration must be positive, got {config.duration}")
    _check(math.isfinite(config.dt_nominal) and config.dt_nominal > 0,
           f"dt_nominal must be positive, got {config.dt_nominal}")
    _check(0.0 <= config.jitter_fraction < 0.5,
           f"jitter_fraction must be in [0, 0.5), got {config.jitter_fraction}")
    _check(config.repeats >= 1, f"repeats must be >= 1, got {config.repeats}")
    if not isinstance(config.controller_kind, ControllerKind):
        raise ConfigError(f"controller_kind must be a ControllerKind, got {config.controller_kind!r}")
    config.reference.validate()
    config.cascade.validate()
    config.adaptive.validate()
    config.plant.validate()
    return config
