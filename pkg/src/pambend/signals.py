"""Reference trajectory generators and real-time pseudo-differentiators.

Generators are pure functions of (spec, t).  The pseudo-differentiator is
a causal backward difference followed by a first-order low pass; the
filter exists to keep discrete differentials usable when sample intervals
jitter, which otherwise makes the second differential oscillate hard
enough to destabilise anything consuming it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ConfigError

TAU_FILTER_DEFAULT = 0.02  # s, first-order low-pass for both differentiators


@dataclass(frozen=True, slots=True)
class Sinusoid:
    """centroid + amplitude*sin(2*pi*t/period + phase), held after `cycles` periods."""

    centroid: float        # deg
    amplitude: float       # deg
    period: float          # s
    cycles: float = math.inf
    phase: float = 0.0     # rad

    def validate(self) -> None:
        if not self.period > 0:
            raise ConfigError(f"period must be positive, got {self.period}")
        if self.amplitude < 0:
            raise ConfigError(f"amplitude must be nonnegative, got {self.amplitude}")
        if self.centroid - self.amplitude < 0:
            raise ConfigError(
                f"centroid - amplitude must be >= 0, got {self.centroid - self.amplitude}")
        if not self.cycles > 0:
            raise ConfigError(f"cycles must be positive, got {self.cycles}")

    def total_duration(self) -> float:
        return self.cycles * self.period

    def bounds(self) -> tuple[float, float]:
        return (self.centroid - self.amplitude, self.centroid + self.amplitude)

    def value(self, t: float) -> float:
        end = self.cycles * self.period
        if t > end:
            t = end
        return self.centroid + self.amplitude * math.sin(
            2.0 * math.pi * t / self.period + self.phase)


@dataclass(frozen=True, slots=True)
class Ramp:
    """Linear segment from start to end over duration (Compound piece)."""

    start: float     # deg
    end: float       # deg
    duration: float  # s

    def validate(self) -> None:
        if not self.duration > 0:
            raise ConfigError(f"ramp duration must be positive, got {self.duration}")

    def total_duration(self) -> float:
        return self.duration

    def bounds(self) -> tuple[float, float]:
        return (min(self.start, self.end), max(self.start, self.end))

    def value(self, t: float) -> float:
        if t >= self.duration:
            return self.end
        return self.start + (self.end - self.start) * t / self.duration


@dataclass(frozen=True, slots=True)
class Hold:
    """Constant segment (Compound piece)."""

    level: float     # deg
    duration: float  # s

    def validate(self) -> None:
        if not self.duration > 0:
            raise ConfigError(f"hold duration must be positive, got {self.duration}")

    def total_duration(self) -> float:
        return self.duration

    def bounds(self) -> tuple[float, float]:
        return (self.level, self.level)

    def value(self, t: float) -> float:
        return self.level


@dataclass(frozen=True, slots=True)
class Constant:
    """Fixed reference angle."""

    level: float  # deg

    def validate(self) -> None:
        pass

    def total_duration(self) -> float:
        return math.inf

    def bounds(self) -> tuple[float, float]:
        return (self.level, self.level)

    def value(self, t: float) -> float:
        return self.level


@dataclass(frozen=True, slots=True)
class Compound:
    """Ordered Sinusoid/Ramp/Hold pieces played back to back.

    Each piece is evaluated on its local time; past the final piece the
    reference holds the last value.  Sinusoid pieces need finite cycles.
    """

    segments: tuple = ()

    def validate(self) -> None:
        if not self.segments:
            raise ConfigError("compound reference needs at least one segment")
        for seg in self.segments:
            seg.validate()
            if not math.isfinite(seg.total_duration()):
                raise ConfigError("compound segments must have finite duration")

    def total_duration(self) -> float:
        return sum(seg.total_duration() for seg in self.segments)

    def bounds(self) -> tuple[float, float]:
        lo = min(seg.bounds()[0] for seg in self.segments)
        hi = max(seg.bounds()[1] for seg in self.segments)
        return (lo, hi)

    def value(self, t: float) -> float:
        offset = 0.0
        for seg in self.segments:
            d = seg.total_duration()
            if t < offset + d:
                return seg.value(t - offset)
            offset += d
        return self.segments[-1].value(self.segments[-1].total_duration())


@dataclass(frozen=True, slots=True)
class TriangularPressure:
    """Piecewise-linear pressure command visiting vertex_list at fixed |slope|.

    Used by the hysteresis measurement protocols.  An optional dwell holds
    the command at each vertex so an inner pressure loop can actually
    settle onto the vertex before the sweep reverses.
    """

    start: float                 # kPa
    vertex_list: tuple = ()      # kPa, consecutive vertices alternate direction
    slope: float = 60.0          # kPa/s, magnitude of every ramp
    dwell: float = 0.0           # s, hold at each vertex (including start)

    def validate(self) -> None:
        if not self.slope > 0:
            raise ConfigError(f"slope must be positive, got {self.slope}")
        if self.dwell < 0:
            raise ConfigError(f"dwell must be nonnegative, got {self.dwell}")
        if not self.vertex_list:
            raise ConfigError("vertex_list must be non-empty")
        prev = self.start
        direction = 0.0
        for v in self.vertex_list:
            step = v - prev
            if step == 0.0:
                raise ConfigError(f"repeated vertex {v} (zero excursion)")
            if direction != 0.0 and math.copysign(1.0, step) == direction:
                raise ConfigError(
                    f"consecutive vertices must alternate direction (at vertex {v})")
            direction = math.copysign(1.0, step)
            prev = v

    def _knots(self) -> list[tuple[float, float]]:
        """(time, level) pairs at the start/end of every ramp and dwell."""
        knots = [(0.0, self.start)]
        t = self.dwell
        if self.dwell > 0.0:
            knots.append((t, self.start))
        level = self.start
        for v in self.vertex_list:
            t += abs(v - level) / self.slope
            level = v
            knots.append((t, level))
            if self.dwell > 0.0:
                t += self.dwell
                knots.append((t, level))
        return knots

    def vertex_times(self) -> list[float]:
        """Arrival time at the start level and at each vertex."""
        times = [0.0]
        t = self.dwell
        level = self.start
        for v in self.vertex_list:
            t += abs(v - level) / self.slope
            times.append(t)
            t += self.dwell
            level = v
        return times

    def total_duration(self) -> float:
        return self._knots()[-1][0]

    def bounds(self) -> None:
        return None  # pressure units; not an angle reference

    def value(self, t: float) -> float:
        knots = self._knots()
        if t <= 0.0:
            return knots[0][1]
        for (t0, v0), (t1, v1) in zip(knots, knots[1:]):
            if t < t1:
                if t1 == t0:
                    return v1
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        return knots[-1][1]


ReferenceSpec = Sinusoid | Compound | Constant | TriangularPressure


def gen_reference(spec, t: float) -> float:
    """Evaluate a reference spec at time t >= 0 (pure, deterministic)."""
    if t < 0:
        raise ValueError(f"reference time must be nonnegative, got {t}")
    return spec.value(t)


class PseudoDiff:
    """Causal rate estimator: backward difference + first-order low pass.

    The first call seeds the state and reports 0.  With tau_filter = 0 the
    filter degenerates to the raw backward difference.
    """

    __slots__ = ("tau_filter", "prev_value", "prev_time", "filtered_rate", "primed")

    def __init__(self, tau_filter: float = TAU_FILTER_DEFAULT):
        if tau_filter < 0:
            raise ValueError(f"tau_filter must be nonnegative, got {tau_filter}")
        self.tau_filter = tau_filter
        self.reset()

    def reset(self) -> None:
        self.prev_value = 0.0
        self.prev_time = 0.0
        self.filtered_rate = 0.0
        self.primed = False

    def step(self, value: float, t: float) -> float:
        if not self.primed:
            self.prev_value = value
            self.prev_time = t
            self.primed = True
            return 0.0
        dt = t - self.prev_time
        if dt <= 0.0:
            raise ValueError(f"timestamps must increase, got dt={dt}")
        alpha = dt / (self.tau_filter + dt)
        rate = self.filtered_rate + alpha * ((value - self.prev_value) / dt - self.filtered_rate)
        self.prev_value = value
        self.prev_time = t
        self.filtered_rate = rate
        return rate


class PseudoDiff2:
    """First and second pseudo-differentials of one signal.

    The second stage differentiates the filtered first-derivative stream,
    so it carries a short warm-up transient (two samples) before its
    output means anything.
    """

    __slots__ = ("d1", "d2")

    def __init__(self, tau_filter: float = TAU_FILTER_DEFAULT):
        self.d1 = PseudoDiff(tau_filter)
        self.d2 = PseudoDiff(tau_filter)

    def reset(self) -> None:
        self.d1.reset()
        self.d2.reset()

    def step(self, value: float, t: float) -> tuple[float, float]:
        rate = self.d1.step(value, t)
        rate2 = self.d2.step(rate, t)
        return rate, rate2
