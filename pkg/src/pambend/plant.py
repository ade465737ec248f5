"""Simulated dual-PAM bending actuator.

Minimal structure that makes the cascaded controller meaningful:

* valve model: each chamber pressure integrates k_valve * (u - u_neutral),
  clamped to p_limits;
* hysteresis: a weighted bank of play operators driven by the differential
  pressure dp = p_a - p_b, giving rate-independent loops whose dead bands
  (the operator radii) stall the bending output after every reversal;
* a first-order lag from the hysteresis output to the true bending angle;
* optional zero-mean Gaussian measurement noise from a seeded generator.

The actuator is symmetric: negative dp bends the other way.  Nothing here
models McKibben force physics; the plant exists to exercise the
controller with realistic hysteretic behaviour at desk scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError

# Full pressurization of one chamber (420 kPa) must bend into this range,
# the actuator's working envelope.
STATIC_GAIN_CHECK_DP = 420.0      # kPa
STATIC_GAIN_RANGE = (50.0, 62.0)  # deg

_NOISE_CHUNK = 8192


@dataclass(frozen=True, slots=True)
class PlantParams:
    """Simulated actuator parameters (artifact-defined, not measured)."""

    k_valve: float = 150.0         # kPa/(s*V), chamber fill/vent rate per volt
    u_neutral: float = 5.0         # V, valve closed
    p_limits: tuple[float, float] = (0.0, 500.0)  # kPa
    play_radii: tuple[float, ...] = (0.0, 30.0, 60.0, 90.0, 120.0)   # kPa
    play_weights: tuple[float, ...] = (0.060, 0.030, 0.025, 0.020, 0.015)  # deg/kPa
    tau_theta: float = 0.15        # s, hysteresis output to bending angle lag
    noise_sigma_theta: float = 0.05  # deg
    noise_sigma_p: float = 0.5       # kPa
    seed: int = 0

    def validate(self) -> None:
        if self.k_valve <= 0:
            raise ConfigError(f"k_valve must be positive, got {self.k_valve}")
        if not self.p_limits[0] < self.p_limits[1]:
            raise ConfigError(f"p_limits must satisfy low < high, got {self.p_limits}")
        if len(self.play_radii) != len(self.play_weights):
            raise ConfigError(
                f"play_radii and play_weights lengths differ: "
                f"{len(self.play_radii)} vs {len(self.play_weights)}")
        if not self.play_radii or self.play_radii[0] != 0.0:
            raise ConfigError(f"play_radii must start at 0, got {self.play_radii!r}")
        if any(b <= a for a, b in zip(self.play_radii, self.play_radii[1:])):
            raise ConfigError(f"play_radii must be strictly increasing, got {self.play_radii!r}")
        if any(w < 0 for w in self.play_weights) or not any(w > 0 for w in self.play_weights):
            raise ConfigError(
                f"play_weights must be nonnegative with at least one positive, "
                f"got {self.play_weights!r}")
        if self.tau_theta < 0:
            raise ConfigError(f"tau_theta must be nonnegative, got {self.tau_theta}")
        if self.noise_sigma_theta < 0 or self.noise_sigma_p < 0:
            raise ConfigError("noise sigmas must be nonnegative")
        gain = measure_static_gain(self, STATIC_GAIN_CHECK_DP)
        lo, hi = STATIC_GAIN_RANGE
        if not lo <= gain <= hi:
            raise ConfigError(
                f"static gain at {STATIC_GAIN_CHECK_DP} kPa must land in "
                f"[{lo}, {hi}] deg, got {gain:.3f}")


def play_operator_step(z_prev: float, value: float, radius: float) -> float:
    """Advance one play operator: max(value - r, min(value + r, z_prev))."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    lo = value - radius
    if z_prev < lo:
        return lo
    hi = value + radius
    if z_prev > hi:
        return hi
    return z_prev


def measure_static_gain(params: PlantParams, dp: float) -> float:
    """Bending angle on the virgin ascending branch: sum w*max(dp - r, 0)."""
    if dp < 0:
        raise ValueError(f"dp must be nonnegative, got {dp}")
    return sum(w * (dp - r) for w, r in zip(params.play_weights, params.play_radii) if dp > r)


class PlayBank:
    """Weighted play-operator bank: differential pressure in, angle out.

    Rate independent by construction; exposed separately from the full
    plant so hysteresis-only behaviour can be driven without valve or lag
    dynamics in the way.
    """

    __slots__ = ("radii", "weights", "z")

    def __init__(self, radii, weights):
        self.radii = tuple(float(r) for r in radii)
        self.weights = tuple(float(w) for w in weights)
        self.z = [0.0] * len(self.radii)

    def step(self, dp: float) -> float:
        """Advance every operator with input dp; return the weighted sum."""
        theta = 0.0
        z = self.z
        for j, r in enumerate(self.radii):
            zj = z[j]
            lo = dp - r
            if zj < lo:
                zj = lo
            else:
                hi = dp + r
                if zj > hi:
                    zj = hi
            z[j] = zj
            theta += self.weights[j] * zj
        return theta

    def output(self) -> float:
        return sum(w * zj for w, zj in zip(self.weights, self.z))

    def check_invariant(self, dp: float) -> None:
        """Assert |z_j - dp| <= r_j for every operator (test hook)."""
        for zj, r in zip(self.z, self.radii):
            if abs(zj - dp) > r + 1e-12:
                raise AssertionError(f"play invariant violated: |{zj} - {dp}| > {r}")


class Plant:
    """Full actuator state: chamber pressures, play bank, lagged angle.

    One instance per run.  step() advances the true state and returns
    noisy measurements; pass an explicit Generator to tie the noise
    stream to an experiment-level seed.
    """

    __slots__ = ("params", "p_a", "p_b", "bank", "theta_true",
                 "_rng", "_buf", "_bi")

    def __init__(self, params: PlantParams, rng: np.random.Generator | None = None):
        params.validate()
        self.params = params
        self.p_a = 0.0
        self.p_b = 0.0
        self.bank = PlayBank(params.play_radii, params.play_weights)
        self.theta_true = 0.0
        self._rng = rng if rng is not None else np.random.default_rng(params.seed)
        self._buf: list[float] = []
        self._bi = 0

    def _normal(self) -> float:
        i = self._bi
        buf = self._buf
        if i >= len(buf):
            buf = self._rng.standard_normal(_NOISE_CHUNK).tolist()
            self._buf = buf
            i = 0
        self._bi = i + 1
        return buf[i]

    def measure(self) -> tuple[float, float, float]:
        """Noisy (theta, p_a, p_b) of the current state."""
        p = self.params
        st = p.noise_sigma_theta
        sp = p.noise_sigma_p
        theta = self.theta_true + (st * self._normal() if st > 0.0 else 0.0)
        pa = self.p_a + (sp * self._normal() if sp > 0.0 else 0.0)
        pb = self.p_b + (sp * self._normal() if sp > 0.0 else 0.0)
        return theta, pa, pb

    def step(self, u_a: float, u_b: float, dt: float) -> tuple[float, float, float]:
        """Advance by dt under valve commands; returns noisy measurements."""
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        p = self.params
        lo, hi = p.p_limits
        kdt = p.k_valve * dt
        u0 = p.u_neutral

        pa = self.p_a + kdt * (u_a - u0)
        self.p_a = lo if pa < lo else hi if pa > hi else pa
        pb = self.p_b + kdt * (u_b - u0)
        self.p_b = lo if pb < lo else hi if pb > hi else pb

        theta_h = self.bank.step(self.p_a - self.p_b)
        tau = p.tau_theta
        if tau > dt:
            self.theta_true += (theta_h - self.theta_true) * (dt / tau)
        else:
            self.theta_true = theta_h
        return self.measure()
