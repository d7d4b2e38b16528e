"""Scenario generation and end-to-end period simulation.

All dB-to-linear conversion happens here; the rest of the package works in
linear units (watts, 1/W gains, linear SNR).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import DetectorConfig, single_detection_prob, protection_indicator
from .model import ChannelParams, Scenario, stationary_probs
from .numerics import RngStream

__all__ = [
    "GeometrySpec",
    "PeriodResult",
    "DEFAULT_ON_TO_OFF_RATES",
    "DEFAULT_OFF_TO_ON_RATES",
    "default_channels",
    "generate_scenario",
    "simulate_period",
]

# Per-channel transition rates of the default seven-channel primary network.
DEFAULT_ON_TO_OFF_RATES = (0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8)
DEFAULT_OFF_TO_ON_RATES = (0.4, 0.8, 0.6, 1.6, 1.2, 1.4, 1.8)
DEFAULT_BANDWIDTH_HZ = 6e6

# Remaining defaults of the standard parameter set.
DEFAULTS = {
    "period_s": 0.1,
    "sensing_phase_s": 0.005,
    "sensing_slot_s": 0.001,
    "sensing_energy_j": 0.11e-3,
    "target_false_alarm": 0.1,
    "samples_per_sensing": 6000,
    "misdetect_threshold": 0.9,
    "collision_bound": 0.1,
    "p_max_w": 0.1,
    "eh_rate_w": 5e-3,
    "demand_bits": 3000.0,
}


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class GeometrySpec:
    """Physical layout and radio constants of the generated network."""

    sensor_area_radius_m: float = 20.0
    pu_area_radius_m: float = 200.0
    pu_tx_power_w: float = 1e-3
    noise_power_dbm: float = -80.0
    path_loss_exponent: float = 3.5
    # PUs keep at least this distance from the sink (annulus placement).
    pu_area_inner_radius_m: float = 0.0
    # Noise normalizing the data-plane gains; defaults to the sensing noise.
    data_noise_power_dbm: float | None = None

    def __post_init__(self):
        if self.sensor_area_radius_m <= 0 or self.pu_area_radius_m <= 0:
            raise ValueError("area radii must be positive")
        if not 0.0 <= self.pu_area_inner_radius_m < self.pu_area_radius_m:
            raise ValueError("PU inner radius must lie inside the outer radius")
        if self.pu_tx_power_w <= 0:
            raise ValueError("PU transmit power must be positive")
        if self.path_loss_exponent <= 0:
            raise ValueError("path-loss exponent must be positive")


def default_channels(num_channels: int, bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ):
    """Default primary-user channels; rates cycle past the seventh channel."""
    channels = []
    for k in range(num_channels):
        idx = k % len(DEFAULT_ON_TO_OFF_RATES)
        channels.append(
            ChannelParams(
                on_to_off_rate=DEFAULT_ON_TO_OFF_RATES[idx],
                off_to_on_rate=DEFAULT_OFF_TO_ON_RATES[idx],
                bandwidth_hz=bandwidth_hz,
            )
        )
    return tuple(channels)


def _uniform_disk(radius: float, count: int, rng: RngStream, inner: float = 0.0) -> np.ndarray:
    draws = rng.random((count, 2))
    r = np.sqrt(inner**2 + draws[:, 0] * (radius**2 - inner**2))
    theta = 2.0 * np.pi * draws[:, 1]
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def generate_scenario(
    geom: GeometrySpec,
    counts: tuple[int, int, int, int],
    rng: RngStream,
    **overrides,
) -> Scenario:
    """Generate a random network instance.

    ``counts`` is (spectrum sensors, data sensors, channels, transceivers).
    The sink sits at the origin; sensors are placed uniformly in the sensor
    disk and one primary user per channel uniformly in the PU disk. PU SNRs
    follow transmit power over path loss over noise; data gains add a unit
    mean exponential (Rayleigh power) fading factor and are normalized by
    the data-plane noise so ``gain * power`` is an SNR.

    Draw order is fixed (PU positions, spectrum sensors, data sensors,
    fading), so equal seeds give identical scenarios. Scalar defaults can be
    overridden by keyword (``eh_rate_w``, ``demand_bits``, ``tau_s``, ...).
    """
    m, n, k, b = counts
    params = dict(DEFAULTS)
    unknown = set(overrides) - set(params)
    if unknown:
        raise TypeError(f"unknown scenario overrides: {sorted(unknown)}")
    params.update(overrides)

    pu_pos = _uniform_disk(geom.pu_area_radius_m, k, rng, inner=geom.pu_area_inner_radius_m)
    spectrum_pos = _uniform_disk(geom.sensor_area_radius_m, m, rng)
    data_pos = _uniform_disk(geom.sensor_area_radius_m, n, rng)
    fading = rng.exponential(1.0, (n, k))

    noise_w = dbm_to_watts(geom.noise_power_dbm)
    data_noise_dbm = (
        geom.noise_power_dbm
        if geom.data_noise_power_dbm is None
        else geom.data_noise_power_dbm
    )
    data_noise_w = dbm_to_watts(data_noise_dbm)

    d_pu = np.linalg.norm(spectrum_pos[:, np.newaxis, :] - pu_pos[np.newaxis, :, :], axis=2)
    d_pu = np.maximum(d_pu, 1.0)  # clamp inside 1 m to keep path loss finite
    pu_snr = geom.pu_tx_power_w * d_pu ** -geom.path_loss_exponent / noise_w

    d_sink = np.maximum(np.linalg.norm(data_pos, axis=1), 1.0)
    data_gain = fading * d_sink[:, np.newaxis] ** -geom.path_loss_exponent / data_noise_w
    data_gain = np.maximum(data_gain, 1e-300)

    eh = np.broadcast_to(np.asarray(params["eh_rate_w"], dtype=float), (m,)).copy()
    demands = np.broadcast_to(np.asarray(params["demand_bits"], dtype=float), (n,)).copy()

    return Scenario(
        channels=default_channels(k),
        num_transceivers=b,
        period_s=params["period_s"],
        sensing_phase_s=params["sensing_phase_s"],
        sensing_slot_s=params["sensing_slot_s"],
        sensing_energy_j=params["sensing_energy_j"],
        harvest_rates_w=eh,
        target_false_alarm=params["target_false_alarm"],
        samples_per_sensing=params["samples_per_sensing"],
        misdetect_threshold=params["misdetect_threshold"],
        collision_bound=params["collision_bound"],
        pu_snr=pu_snr,
        data_gain=data_gain,
        demands_bits=demands,
        p_max_w=params["p_max_w"],
    )


@dataclass(frozen=True)
class PeriodResult:
    """Outcome of one sensing phase.

    ``available`` holds channels the sink would hand to data sensors (fused
    decision idle and protection satisfied); ``leaked`` is its subset where
    the PU was in fact active (a missed detection), reported separately so
    collision exposure stays visible.
    """

    available: frozenset[int]
    leaked: frozenset[int]
    pu_active: tuple[bool, ...]
    fused_active: tuple[bool, ...]


def simulate_period(scenario: Scenario, assignment: np.ndarray, rng: RngStream) -> PeriodResult:
    """Simulate one period: draw PU states, sensor reports, fuse by Logic-OR.

    Ground-truth states follow the stationary law. Each assigned sensor
    reports "present" with its detection probability under an active PU and
    with the false-alarm probability otherwise. A channel is declared
    available when no assigned sensor reports the PU and the assigned set
    satisfies the protection requirement.
    """
    assignment = np.asarray(assignment, dtype=np.uint8)
    expected = (scenario.num_spectrum_sensors, scenario.num_channels)
    if assignment.shape != expected:
        raise ValueError(f"assignment must have shape {expected}")

    cfg = DetectorConfig(scenario.target_false_alarm, scenario.samples_per_sensing)
    available, leaked, truth, fused = [], [], [], []
    for k in range(scenario.num_channels):
        p_active, _ = stationary_probs(scenario.channels[k])
        active = bool(rng.random() < p_active)
        sensors = np.flatnonzero(assignment[:, k])
        any_report = False
        for m in sensors:
            p_report = (
                float(single_detection_prob(cfg, scenario.pu_snr[m, k]))
                if active
                else scenario.target_false_alarm
            )
            if rng.random() < p_report:
                any_report = True
        protected = bool(
            protection_indicator(
                cfg, scenario.pu_snr[sensors, k], scenario.misdetect_threshold
            )
        )
        truth.append(active)
        fused.append(any_report)
        if not any_report and protected:
            available.append(k)
            if active:
                leaked.append(k)

    return PeriodResult(
        available=frozenset(available),
        leaked=frozenset(leaked),
        pu_active=tuple(truth),
        fused_active=tuple(fused),
    )
