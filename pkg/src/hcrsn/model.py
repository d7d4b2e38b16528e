"""Scenario data model and ON-OFF primary-user channel statistics.

Units are fixed globally: seconds, watts, joules, hertz, bits, and linear
(not dB) SNR / channel gains. dB conversions happen only in the scenario
generator.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .numerics import RngStream

__all__ = [
    "ChannelParams",
    "Scenario",
    "OnOffTrajectory",
    "stationary_probs",
    "mean_available_time",
    "max_access_time",
    "collision_probability",
    "sample_trajectory",
    "empirical_collision_rate",
]

# 2**K channel-assignment vectors are materialized by the scheduler; reject
# scenarios where that table would blow up.
MAX_CHANNELS = 20


@dataclass(frozen=True)
class ChannelParams:
    """Exponential ON-OFF primary-user channel.

    ``on_to_off_rate`` is the transition rate out of the occupied (PU active)
    state, ``off_to_on_rate`` the rate at which the PU returns.
    """

    on_to_off_rate: float
    off_to_on_rate: float
    bandwidth_hz: float

    def __post_init__(self):
        if self.on_to_off_rate <= 0.0 or self.off_to_on_rate <= 0.0:
            raise ValueError("transition rates must be positive")
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth must be positive")


def stationary_probs(ch: ChannelParams) -> tuple[float, float]:
    """Stationary (p_active, p_inactive) of the ON-OFF process."""
    lam, mu = ch.on_to_off_rate, ch.off_to_on_rate
    total = lam + mu
    return mu / total, lam / total


def mean_available_time(ch: ChannelParams) -> float:
    """Mean idle time per cycle: mean OFF sojourn times the OFF probability."""
    _, p_inactive = stationary_probs(ch)
    return p_inactive / ch.off_to_on_rate


def max_access_time(
    ch: ChannelParams, collision_bound: float, period_s: float, sensing_phase_s: float
) -> float:
    """Largest access window keeping the collision probability under the bound.

    Capped by the data-phase length. When the bound exceeds the idle
    probability the collision constraint can never bind (collision
    probability saturates below it), so the cap alone applies.
    """
    if not 0.0 < collision_bound < 1.0:
        raise ValueError("collision bound must lie in (0, 1)")
    if sensing_phase_s >= period_s:
        raise ValueError("sensing phase must be shorter than the period")
    phase = period_s - sensing_phase_s
    _, p_inactive = stationary_probs(ch)
    if collision_bound >= p_inactive:
        return phase
    analytic = -np.log1p(-collision_bound / p_inactive) / ch.off_to_on_rate
    return min(analytic, phase)


def collision_probability(ch: ChannelParams, access_time_s: float) -> float:
    """Probability the PU is initially away and returns within the window."""
    if access_time_s < 0.0:
        raise ValueError("access time must be nonnegative")
    _, p_inactive = stationary_probs(ch)
    return p_inactive * -np.expm1(-ch.off_to_on_rate * access_time_s)


@dataclass(frozen=True)
class OnOffTrajectory:
    """One sampled PU activity path over ``[0, horizon]``."""

    initial_active: bool
    transition_times: np.ndarray
    horizon_s: float

    def active_at(self, t: float) -> bool:
        flips = int(np.searchsorted(self.transition_times, t, side="right"))
        return self.initial_active ^ (flips % 2 == 1)

    def fraction_inactive(self) -> float:
        """Time share spent in the OFF state."""
        edges = np.concatenate(([0.0], self.transition_times, [self.horizon_s]))
        spans = np.diff(edges)
        active = self.initial_active
        total_off = 0.0
        for span in spans:
            if not active:
                total_off += span
            active = not active
        return total_off / self.horizon_s


def sample_trajectory(ch: ChannelParams, horizon_s: float, rng: RngStream) -> OnOffTrajectory:
    """Draw a stationary ON-OFF path: exponential sojourns, stationary start."""
    if horizon_s <= 0.0:
        raise ValueError("horizon must be positive")
    p_active, _ = stationary_probs(ch)
    active = bool(rng.random() < p_active)
    initial = active
    times = []
    t = 0.0
    while True:
        rate = ch.on_to_off_rate if active else ch.off_to_on_rate
        t += rng.exponential(1.0 / rate)
        if t > horizon_s:
            break
        times.append(t)
        active = not active
    return OnOffTrajectory(initial, np.asarray(times, dtype=float), horizon_s)


def empirical_collision_rate(
    ch: ChannelParams, access_time_s: float, num_trials: int, rng: RngStream
) -> float:
    """Monte Carlo collision frequency over independent access attempts.

    A trial collides when the channel starts the access window idle (drawn
    from the stationary law) and the PU's residual OFF sojourn, exponential
    by memorylessness, ends inside the window.
    """
    if num_trials < 1:
        raise ValueError("at least one trial is required")
    if access_time_s < 0.0:
        raise ValueError("access time must be nonnegative")
    _, p_inactive = stationary_probs(ch)
    hits = 0
    remaining = int(num_trials)
    chunk = 1 << 20
    while remaining > 0:
        n = min(chunk, remaining)
        u_state = rng.random(n)
        u_sojourn = rng.random(n)
        hits += kernels.count_collisions(
            u_state, u_sojourn, p_inactive, ch.off_to_on_rate, access_time_s
        )
        remaining -= n
    return hits / num_trials


@dataclass(frozen=True, eq=False)
class Scenario:
    """Static description of one network instance.

    Spectrum-sensor count M, data-sensor count N and channel count K are
    implied by the array shapes: ``harvest_rates_w`` is (M,), ``pu_snr`` is
    (M, K), ``data_gain`` is (N, K) and ``demands_bits`` is (N,).
    """

    channels: tuple[ChannelParams, ...]
    num_transceivers: int
    period_s: float
    sensing_phase_s: float
    sensing_slot_s: float
    sensing_energy_j: float
    harvest_rates_w: np.ndarray
    target_false_alarm: float
    samples_per_sensing: int
    misdetect_threshold: float
    collision_bound: float
    pu_snr: np.ndarray
    data_gain: np.ndarray
    demands_bits: np.ndarray
    p_max_w: float

    def __post_init__(self):
        for name in ("harvest_rates_w", "pu_snr", "data_gain", "demands_bits"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "channels", tuple(self.channels))

        k = len(self.channels)
        m = self.harvest_rates_w.shape[0]
        n = self.demands_bits.shape[0]
        if min(m, n, k, self.num_transceivers) < 1:
            raise ValueError("all counts must be at least 1")
        if k > MAX_CHANNELS:
            raise ValueError(
                f"{k} channels exceeds the supported maximum of {MAX_CHANNELS} "
                "(the scheduler materializes 2**K assignment vectors)"
            )
        if self.pu_snr.shape != (m, k):
            raise ValueError(f"pu_snr must be (M, K) = {(m, k)}")
        if self.data_gain.shape != (n, k):
            raise ValueError(f"data_gain must be (N, K) = {(n, k)}")
        if not 0.0 < self.sensing_slot_s <= self.sensing_phase_s <= self.period_s:
            raise ValueError("mini-slot <= sensing phase <= period is required")
        for name in ("target_false_alarm", "misdetect_threshold", "collision_bound"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.samples_per_sensing < 1:
            raise ValueError("samples_per_sensing must be at least 1")
        if self.sensing_energy_j <= 0.0 or self.p_max_w <= 0.0:
            raise ValueError("energies and powers must be positive")
        if np.any(self.harvest_rates_w < 0.0):
            raise ValueError("harvest rates must be nonnegative")
        if np.any(self.pu_snr <= 0.0) or np.any(self.data_gain <= 0.0):
            raise ValueError("SNR and gain matrices must be entrywise positive")
        if np.any(self.demands_bits < 0.0):
            raise ValueError("demands must be nonnegative")

    # Convenience counts
    @property
    def num_spectrum_sensors(self) -> int:
        return self.harvest_rates_w.shape[0]

    @property
    def num_data_sensors(self) -> int:
        return self.demands_bits.shape[0]

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray):
                if not (a.shape == b.shape and np.array_equal(a, b)):
                    return False
            elif a != b:
                return False
        return True
