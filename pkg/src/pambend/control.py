"""Discrete-time PID primitives and the two-subsystem cascaded controller.

Each subsystem owns a cascade: an outer position loop whose PID output is
an *increment* to the inner loop's pressure reference,

    pd(k) = clamp(pd(k-1) + dp_fb(k) + dp_ff(k), pd_limits),

and a positional inner pressure loop whose PID output is a valve voltage
around u_neutral.  Subsystem B never stores its own outer gains: they are
derived as the exact negation of subsystem A's (mirror_gains), so with the
shared angle error both subsystems' pressure adjustments mirror exactly.
Inner loops share one gain set.

Anti-windup is integral clamping: whenever output limits are set, the
integral is clamped so ki * integral stays inside them.  The inner loops
use it against valve saturation; the outer accumulator needs none of its
own because pd itself is clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .adaptforward import AdaptiveParams, Compensator, feedforward_delta
from .core import ConfigError, ControllerKind


@dataclass(frozen=True, slots=True)
class PidGains:
    """One loop's gain set, tagged with the loop it belongs to.

    Units depend on the role: outer loops map degrees to kilopascal
    (kp in kPa/deg, ki in kPa/(deg*s), kd in kPa*s/deg), inner loops map
    kilopascal to volts (kp in V/kPa, ki in V/(kPa*s), kd in V*s/kPa).
    The tag exists so a config mixing the two is rejected outright.
    """

    kp: float
    ki: float
    kd: float
    loop: str = "outer"  # "outer" or "inner"


def mirror_gains(outer_a: PidGains, k_ff: float) -> tuple[PidGains, float]:
    """Subsystem B's outer gains and feedforward gain: exact negations."""
    mirrored = PidGains(-outer_a.kp, -outer_a.ki, -outer_a.kd, outer_a.loop)
    return mirrored, -k_ff


def update_pressure_ref(pd_prev: float, dp_fb: float, dp_ff: float,
                        limits: tuple[float, float]) -> float:
    """Incremental pressure-reference update, clamped to limits."""
    lo, hi = limits
    if not lo < hi:
        raise ValueError(f"limits must satisfy low < high, got {limits}")
    pd = pd_prev + dp_fb + dp_ff
    if pd < lo:
        return lo
    if pd > hi:
        return hi
    return pd


@dataclass(frozen=True, slots=True)
class CascadeConfig:
    """Gains and ranges for both subsystems (B's outer side is derived)."""

    outer_a: PidGains = PidGains(kp=8.0e-2, ki=2.0e-5, kd=0.0, loop="outer")
    inner: PidGains = PidGains(kp=4.0e-2, ki=2.0e-6, kd=0.0, loop="inner")
    k_ff: float = 1.0e-2                       # kPa*s/deg, subsystem A sign
    pd_limits: tuple[float, float] = (0.0, 500.0)  # kPa
    u_limits: tuple[float, float] = (0.0, 10.0)    # V
    u_neutral: float = 5.0                     # V, valve closed

    def validate(self) -> None:
        if self.outer_a.loop != "outer":
            raise ConfigError(f"outer_a gains tagged {self.outer_a.loop!r}, expected 'outer'")
        if self.inner.loop != "inner":
            raise ConfigError(f"inner gains tagged {self.inner.loop!r}, expected 'inner'")
        if not self.pd_limits[0] < self.pd_limits[1]:
            raise ConfigError(f"pd_limits must satisfy low < high, got {self.pd_limits}")
        if not self.u_limits[0] < self.u_limits[1]:
            raise ConfigError(f"u_limits must satisfy low < high, got {self.u_limits}")
        if not self.u_limits[0] <= self.u_neutral <= self.u_limits[1]:
            raise ConfigError(
                f"u_neutral must lie within u_limits, got {self.u_neutral} vs {self.u_limits}")


class Pid:
    """Positional PID: kp*e + ki*trapz(e) + kd*de/dt, clamped to limits.

    The first step seeds the state (no integral contribution, derivative
    0).  Time must be strictly monotone across steps.  The proportional
    gain is a plain attribute so a supervisor may retune it between steps.
    """

    __slots__ = ("kp", "ki", "kd", "out_lo", "out_hi",
                 "integral", "prev_error", "prev_time", "primed")

    def __init__(self, gains: PidGains, output_limits: tuple[float, float] | None = None):
        self.kp = gains.kp
        self.ki = gains.ki
        self.kd = gains.kd
        if output_limits is None:
            self.out_lo, self.out_hi = -math.inf, math.inf
        else:
            self.out_lo, self.out_hi = output_limits
        self.reset()

    def reset(self) -> None:
        self.integral = 0.0
        self.prev_error = 0.0
        self.prev_time = 0.0
        self.primed = False

    def step(self, error: float, t: float) -> float:
        if self.primed:
            dt = t - self.prev_time
            if dt <= 0.0:
                raise ValueError(f"timestamps must increase, got dt={dt}")
            integral = self.integral + 0.5 * dt * (error + self.prev_error)
            ki = self.ki
            if ki != 0.0:
                # Anti-windup: keep ki*integral inside the output range.
                lo = self.out_lo / ki
                hi = self.out_hi / ki
                if lo > hi:
                    lo, hi = hi, lo
                if integral < lo:
                    integral = lo
                elif integral > hi:
                    integral = hi
            self.integral = integral
            derivative = (error - self.prev_error) / dt
        else:
            self.primed = True
            derivative = 0.0
        self.prev_error = error
        self.prev_time = t
        out = self.kp * error + self.ki * self.integral + self.kd * derivative
        if out < self.out_lo:
            return self.out_lo
        if out > self.out_hi:
            return self.out_hi
        return out


@dataclass(slots=True)
class ControlStep:
    """Per-step diagnostics surfaced into the run log."""

    u_a: float
    u_b: float
    pd_a: float
    pd_b: float
    kp_a: float      # live outer P gain magnitude, subsystem A
    kp_b: float      # subsystem B (applied with opposite sign)
    dp_fb_a: float
    dp_fb_b: float
    dp_ff_a: float
    dp_ff_b: float


class CascadeController:
    """Both subsystems of the cascaded controller plus their compensators.

    One instance per simulated actuator run; call step() once per sample
    with the current reference, its pseudo-differentials, and the latest
    measurements.
    """

    __slots__ = ("kind", "outer_a", "outer_b", "inner_a", "inner_b",
                 "comp_a", "comp_b", "k_ff", "kp0",
                 "pd_limits", "u_neutral", "pd_a", "pd_b")

    def __init__(self, cascade: CascadeConfig, adaptive: AdaptiveParams,
                 kind: ControllerKind):
        outer_b_gains, _ = mirror_gains(cascade.outer_a, cascade.k_ff)
        self.outer_a = Pid(cascade.outer_a)
        self.outer_b = Pid(outer_b_gains)
        u_lo, u_hi = cascade.u_limits
        span = (u_lo - cascade.u_neutral, u_hi - cascade.u_neutral)
        self.inner_a = Pid(cascade.inner, output_limits=span)
        self.inner_b = Pid(cascade.inner, output_limits=span)
        self.comp_a = Compensator(adaptive)
        self.comp_b = Compensator(adaptive)
        self.k_ff = cascade.k_ff
        self.kp0 = adaptive.kp0
        self.pd_limits = cascade.pd_limits
        self.u_neutral = cascade.u_neutral
        self.kind = kind
        self.pd_a = 0.0
        self.pd_b = 0.0

    def reset(self) -> None:
        for loop in (self.outer_a, self.outer_b, self.inner_a, self.inner_b):
            loop.reset()
        self.comp_a.reset()
        self.comp_b.reset()
        self.pd_a = 0.0
        self.pd_b = 0.0

    def step(self, theta_ref: float, theta_ref_d1: float, theta_ref_d2: float,
             theta_meas: float, p_a_meas: float, p_b_meas: float,
             t: float) -> ControlStep:
        kind = self.kind
        if kind is ControllerKind.PID_AF:
            dp_ff_a, kp_a = self.comp_a.step(theta_ref, theta_ref_d1, theta_ref_d2)
            _, kp_b = self.comp_b.step(theta_ref, theta_ref_d1, theta_ref_d2)
        elif kind is ControllerKind.PID_FF:
            dp_ff_a = feedforward_delta(theta_ref_d1, self.k_ff)
            kp_a = kp_b = self.kp0
        else:
            dp_ff_a = 0.0
            kp_a = kp_b = self.kp0
        dp_ff_b = -dp_ff_a

        error = theta_ref - theta_meas
        self.outer_a.kp = kp_a
        self.outer_b.kp = -kp_b
        dp_fb_a = self.outer_a.step(error, t)
        dp_fb_b = self.outer_b.step(error, t)

        self.pd_a = update_pressure_ref(self.pd_a, dp_fb_a, dp_ff_a, self.pd_limits)
        self.pd_b = update_pressure_ref(self.pd_b, dp_fb_b, dp_ff_b, self.pd_limits)

        u_a = self.u_neutral + self.inner_a.step(self.pd_a - p_a_meas, t)
        u_b = self.u_neutral + self.inner_b.step(self.pd_b - p_b_meas, t)

        return ControlStep(u_a, u_b, self.pd_a, self.pd_b, kp_a, kp_b,
                           dp_fb_a, dp_fb_b, dp_ff_a, dp_ff_b)
