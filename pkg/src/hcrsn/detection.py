"""Energy-detector statistics and Logic-OR cooperative fusion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import gaussian_tail_q, gaussian_tail_q_inv

__all__ = [
    "DetectorConfig",
    "detection_threshold",
    "single_detection_prob",
    "fused_false_alarm",
    "fused_detection",
    "protection_indicator",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Energy detector operating point.

    With unit noise variance (the default) SNR matrices are plain linear
    ratios; the detection threshold is derived from the target false-alarm
    probability rather than stored.
    """

    target_false_alarm: float
    samples: int
    noise_variance: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.target_false_alarm < 1.0:
            raise ValueError("target false alarm must lie in (0, 1)")
        if self.samples < 1:
            raise ValueError("at least one sample per sensing is required")
        if self.noise_variance <= 0.0:
            raise ValueError("noise variance must be positive")


def detection_threshold(cfg: DetectorConfig) -> float:
    """Test-statistic threshold that realizes the target false-alarm rate."""
    return cfg.noise_variance * (
        1.0 + gaussian_tail_q_inv(cfg.target_false_alarm) / math.sqrt(cfg.samples)
    )


def single_detection_prob(cfg: DetectorConfig, snr):
    """Detection probability of one sensor at linear SNR ``snr`` (scalar or array)."""
    arr = np.asarray(snr, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("SNR must be positive")
    q_inv = gaussian_tail_q_inv(cfg.target_false_alarm)
    arg = (q_inv - math.sqrt(cfg.samples) * arr) / np.sqrt(2.0 * arr + 1.0)
    return gaussian_tail_q(arg)


def fused_false_alarm(num_assigned: int, target_false_alarm: float) -> float:
    """Logic-OR false alarm over ``num_assigned`` independent sensors."""
    if num_assigned < 0:
        raise ValueError("number of assigned sensors must be nonnegative")
    return 1.0 - (1.0 - target_false_alarm) ** num_assigned


def fused_detection(cfg: DetectorConfig, snrs) -> float:
    """Logic-OR detection probability over the assigned sensor set."""
    arr = np.asarray(snrs, dtype=float)
    if arr.size == 0:
        return 0.0
    return 1.0 - float(np.prod(1.0 - single_detection_prob(cfg, arr)))


def protection_indicator(cfg: DetectorConfig, snrs, misdetect_threshold: float) -> int:
    """1 when the fused miss probability falls strictly below the threshold.

    An empty assigned set has miss probability 1 and is never protected.
    Ties (miss probability equal to the threshold) yield 0.
    """
    arr = np.asarray(snrs, dtype=float)
    if arr.size == 0:
        return 0
    miss = float(np.prod(1.0 - single_detection_prob(cfg, arr)))
    return 1 if miss < misdetect_threshold else 0
