"""Adaptive hysteresis compensator: feedforward-D plus a dynamic P gain.

Two pieces, composed per subsystem:

* a feedforward differential term, dp_ff = k_ff * rate, that pre-loads the
  pressure reference while the target is moving fast;
* an accumulative adaptive law that pumps the outer proportional gain up
  while the reference decelerates toward a turning point (where hysteresis
  dead-zones stall the actuator) and sheds it, 1+mu times faster, once the
  reference accelerates away again.  A cutoff keeps the live gain at or
  above its baseline kp0 at all times.

The law is driven purely by the reference and its pseudo-differentials,
never by measurements, so a given reference yields one deterministic gain
trace regardless of plant noise.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import ConfigError


@dataclass(frozen=True, slots=True)
class AdaptiveParams:
    """Coefficients of the adaptive gain law and feedforward term.

    Only the starred magnitudes are stored; the dimensional bookkeeping
    factors they absorb never appear separately.  The two parameter sets
    (1: decelerating / gain-raising branch at negative reference
    acceleration, 2: positive-acceleration branch) allow asymmetric
    hysteresis to be compensated asymmetrically.
    """

    m1_star: float = 6.0e-2   # kPa/(deg*s), negative-acceleration branch
    m2_star: float = 9.6e-2   # kPa/(deg*s), positive-acceleration branch
    b1: float = 6.0           # deg/s, velocity smoothing
    b2: float = 6.0           # deg/s
    c1: float = 3.2e4         # deg/s^2, acceleration scaling
    c2: float = 5.0e4         # deg/s^2
    theta_cap: float = 60.0   # deg, declared reference variation range
    mu: float = 0.6           # forced decrease factor on the shedding side
    k_ff: float = 1.0e-2      # kPa*s/deg, feedforward differential gain
    kp0: float = 8.0e-2       # kPa/deg, baseline outer proportional gain
    velocity_deadband: float = 0.5  # deg/s, |rate| below this counts as 0

    def validate(self) -> None:
        if self.m1_star < 0 or self.m2_star < 0:
            raise ConfigError(
                f"m1_star/m2_star must be nonnegative, got {self.m1_star}, {self.m2_star}")
        if self.b1 <= 0 or self.b2 <= 0:
            raise ConfigError(f"b1/b2 must be positive, got {self.b1}, {self.b2}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ConfigError(f"c1/c2 must be positive, got {self.c1}, {self.c2}")
        if self.theta_cap <= 0:
            raise ConfigError(f"theta_cap must be positive, got {self.theta_cap}")
        if self.mu < 0:
            raise ConfigError(f"mu must be nonnegative, got {self.mu}")
        if self.velocity_deadband < 0:
            raise ConfigError(
                f"velocity_deadband must be nonnegative, got {self.velocity_deadband}")


def feedforward_delta(rate: float, k_ff: float) -> float:
    """Pressure-reference increment from the reference rate: k_ff * rate."""
    return k_ff * rate


def direction_changer(rate: float, accel: float, mu: float, deadband: float = 0.0) -> float:
    """Sign-and-magnitude steering factor D for the gain increment.

    h = sgn(rate * accel), with |rate| <= deadband treated as rate = 0.
    D = -(1 + (1+h)/2 * mu) * h, so D = +1 while decelerating
    (rate and accel of opposite sign), -(1+mu) while accelerating,
    and 0 when either differential vanishes.
    """
    if -deadband <= rate <= deadband:
        return 0.0
    prod = rate * accel
    if prod > 0.0:
        h = 1.0
    elif prod < 0.0:
        h = -1.0
    else:
        return 0.0
    return -(1.0 + 0.5 * (1.0 + h) * mu) * h


def gain_increment(theta_ref: float, rate: float, accel: float, params: AdaptiveParams) -> float:
    """Per-sample increment to the dynamic proportional gain.

    Branch on the sign of the reference acceleration; each branch damps
    to zero at the boundary of the working range it pushes toward
    (theta_ref -> 0, resp. theta_ref -> theta_cap).
    """
    if not 0.0 <= theta_ref <= params.theta_cap:
        raise ValueError(
            f"theta_ref must lie in [0, {params.theta_cap}], got {theta_ref}")
    if accel == 0.0:
        return 0.0
    d = direction_changer(rate, accel, params.mu, params.velocity_deadband)
    if d == 0.0:
        return 0.0
    mag = abs(accel)
    if accel < 0.0:
        return (params.m1_star * theta_ref * mag
                / ((params.b1 + abs(rate)) * (params.c1 + mag)) * d)
    return (params.m2_star * (params.theta_cap - theta_ref) * mag
            / ((params.b2 + abs(rate)) * (params.c2 + mag)) * d)


def update_gain(kp_current: float, delta: float, kp0: float) -> float:
    """Accumulate the increment, floored at the baseline gain."""
    return max(kp0, kp_current + delta)


class Compensator:
    """Per-subsystem compensator state: the live proportional gain.

    step() is a pure composition of feedforward_delta, gain_increment and
    update_gain; no other state exists.
    """

    __slots__ = ("params", "kp_current")

    def __init__(self, params: AdaptiveParams):
        self.params = params
        self.kp_current = params.kp0

    def reset(self) -> None:
        self.kp_current = self.params.kp0

    def step(self, theta_ref: float, rate: float, accel: float) -> tuple[float, float]:
        """Advance one sample; returns (dp_ff [kPa], live kp [kPa/deg])."""
        params = self.params
        dp_ff = feedforward_delta(rate, params.k_ff)
        delta = gain_increment(theta_ref, rate, accel, params)
        self.kp_current = update_gain(self.kp_current, delta, params.kp0)
        return dp_ff, self.kp_current
