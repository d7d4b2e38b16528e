"""Spectrum-sensor scheduling: Cross-Entropy search plus baselines.

The schedule is an M x K binary matrix J assigning sensors (rows) to
channels (columns). Its objective is the detected average available time
summed over channels: each channel contributes its mean idle time,
discounted by the fused false-alarm complement ``(1 - pf)**count`` and
gated by the primary-user protection indicator. Constraint violations are
penalized with ``-sum(alpha)`` once per violating sensor row (energy) and
once per violating channel column (sensing time), so partially repaired
schedules score better than heavily infeasible ones.

Sensor rows are sampled from the set of all ``2**K`` channel-assignment
vectors in ascending integer order, bit ``k`` of vector ``c`` naming
channel ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .detection import DetectorConfig, single_detection_prob
from .model import Scenario, mean_available_time
from .numerics import RngStream

__all__ = [
    "CeParams",
    "CeTrace",
    "SearchSpaceTooLarge",
    "channel_vector_table",
    "daatc_objective",
    "penalized_objective",
    "sample_assignment",
    "elite_update",
    "run_ce",
    "run_exhaustive",
    "run_random",
    "run_greedy",
]

EXHAUSTIVE_MAX_BITS = 24


class SearchSpaceTooLarge(ValueError):
    """Raised when an enumeration guard trips."""


@dataclass(frozen=True)
class CeParams:
    """Cross-Entropy knobs: sample count, elite fraction, stopping rule."""

    num_samples: int = 200
    elite_fraction: float = 0.6
    stop_epsilon: float = 1e-3
    max_iterations: int = 100

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("at least two samples per iteration are required")
        if not 0.0 < self.elite_fraction < 1.0:
            raise ValueError("elite fraction must lie in (0, 1)")
        if self.stop_epsilon < 0.0:
            raise ValueError("stopping threshold must be nonnegative")
        if self.max_iterations < 1:
            raise ValueError("at least one iteration is required")

    @property
    def num_elite(self) -> int:
        return math.ceil(self.elite_fraction * self.num_samples)


@dataclass(frozen=True)
class CeTrace:
    """Per-iteration record of one Cross-Entropy run.

    ``best_objectives`` carries the global-best penalized objective after
    each iteration (non-decreasing by construction); ``pmf_steps`` the
    Frobenius norm of each distribution update. The reported assignment is
    the best sample seen over all iterations.
    """

    best_objectives: np.ndarray
    pmf_steps: np.ndarray
    assignment: np.ndarray
    best_penalized: float
    best_daatc: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class _ScoreContext:
    """Scenario-derived constants consumed by the scoring kernel."""

    alpha: np.ndarray
    miss_factors: np.ndarray
    false_alarm_pow: np.ndarray
    md_threshold: float
    sensing_energy_j: float
    harvest_budget_j: np.ndarray
    slot_s: float
    phase_s: float

    def score(self, assignments: np.ndarray):
        return kernels.score_assignments(
            assignments,
            self.alpha,
            self.miss_factors,
            self.false_alarm_pow,
            self.md_threshold,
            self.sensing_energy_j,
            self.harvest_budget_j,
            self.slot_s,
            self.phase_s,
        )


def _score_context(scenario: Scenario) -> _ScoreContext:
    m = scenario.num_spectrum_sensors
    cfg = DetectorConfig(scenario.target_false_alarm, scenario.samples_per_sensing)
    alpha = np.array([mean_available_time(ch) for ch in scenario.channels])
    miss_factors = 1.0 - single_detection_prob(cfg, scenario.pu_snr)
    # Power table built by repeated multiplication so both kernel backends
    # see bit-identical values.
    false_alarm_pow = np.concatenate(
        ([1.0], np.cumprod(np.full(m, 1.0 - scenario.target_false_alarm)))
    )
    return _ScoreContext(
        alpha=alpha,
        miss_factors=np.ascontiguousarray(miss_factors),
        false_alarm_pow=false_alarm_pow,
        md_threshold=scenario.misdetect_threshold,
        sensing_energy_j=scenario.sensing_energy_j,
        harvest_budget_j=scenario.harvest_rates_w * scenario.period_s,
        slot_s=scenario.sensing_slot_s,
        phase_s=scenario.sensing_phase_s,
    )


def channel_vector_table(num_channels: int) -> np.ndarray:
    """All 2**K channel-assignment vectors, row ``c`` holding the bits of ``c``."""
    if num_channels > 20:
        raise SearchSpaceTooLarge(
            f"2**{num_channels} channel vectors exceed the supported table size"
        )
    codes = np.arange(1 << num_channels, dtype=np.uint32)
    bits = (codes[:, np.newaxis] >> np.arange(num_channels, dtype=np.uint32)) & 1
    return bits.astype(np.uint8)


def daatc_objective(assignment: np.ndarray, scenario: Scenario) -> float:
    """Detected average available time of one schedule, in seconds."""
    ctx = _score_context(scenario)
    _, idle, _ = ctx.score(_as_stack(assignment, scenario))
    return float(idle[0])


def penalized_objective(assignment: np.ndarray, scenario: Scenario) -> float:
    """Objective penalized by ``-sum(alpha)`` per violating sensor or channel."""
    ctx = _score_context(scenario)
    scores, _, _ = ctx.score(_as_stack(assignment, scenario))
    return float(scores[0])


def _as_stack(assignment: np.ndarray, scenario: Scenario) -> np.ndarray:
    j = np.asarray(assignment, dtype=np.uint8)
    expected = (scenario.num_spectrum_sensors, scenario.num_channels)
    if j.shape != expected:
        raise ValueError(f"assignment must have shape {expected}")
    return j[np.newaxis]


def _uniform_pmf(m: int, num_vectors: int) -> np.ndarray:
    return np.full((m, num_vectors), 1.0 / num_vectors)


def _sample_codes(pmf: np.ndarray, count: int, rng: RngStream) -> np.ndarray:
    """Draw ``count`` vector codes per sensor row from the categorical pmf."""
    m, num_vectors = pmf.shape
    cum = np.cumsum(pmf, axis=1)
    u = rng.random((count, m))
    codes = np.empty((count, m), dtype=np.int64)
    for row in range(m):
        codes[:, row] = np.searchsorted(cum[row], u[:, row], side="right")
    return np.minimum(codes, num_vectors - 1)


def sample_assignment(pmf: np.ndarray, rng: RngStream) -> np.ndarray:
    """Draw one assignment matrix: each sensor row picks one channel vector."""
    num_channels = int(round(math.log2(pmf.shape[1])))
    table = channel_vector_table(num_channels)
    codes = _sample_codes(pmf, 1, rng)[0]
    return table[codes]


def elite_update(samples, scores, elite_fraction: float) -> np.ndarray:
    """Re-estimate the sampling pmf from the top ``ceil(rho * Z)`` samples.

    Ties at the elite cutoff are broken toward lower sample index (stable
    sort). Every returned row sums to one.
    """
    stack = np.asarray(samples, dtype=np.uint8)
    scores = np.asarray(scores, dtype=float)
    if stack.shape[0] != scores.shape[0]:
        raise ValueError("one score per sample is required")
    z, m, k = stack.shape
    n_elite = math.ceil(elite_fraction * z)
    order = np.argsort(-scores, kind="stable")[:n_elite]
    codes = stack @ (1 << np.arange(k, dtype=np.int64))
    pmf = np.zeros((m, 1 << k))
    for row in range(m):
        pmf[row] = np.bincount(codes[order, row], minlength=1 << k)
    return pmf / n_elite


def run_ce(scenario: Scenario, params: CeParams, rng: RngStream) -> CeTrace:
    """Cross-Entropy search over schedules.

    Starts from the uniform distribution over channel vectors, alternates
    sampling / scoring / elite re-estimation, and stops once the pmf update
    falls below the Frobenius threshold or the iteration cap is hit. The
    reported schedule is the best-scoring sample across all iterations.
    """
    ctx = _score_context(scenario)
    m, k = scenario.num_spectrum_sensors, scenario.num_channels
    table = channel_vector_table(k)
    pmf = _uniform_pmf(m, table.shape[0])

    best_score = -np.inf
    best_assignment = None
    best_trace = []
    step_trace = []
    converged = False

    for _ in range(params.max_iterations):
        codes = _sample_codes(pmf, params.num_samples, rng)
        stack = np.ascontiguousarray(table[codes])
        scores, _, _ = ctx.score(stack)
        top = int(np.argmax(scores))
        if scores[top] > best_score:
            best_score = float(scores[top])
            best_assignment = stack[top].copy()
        new_pmf = elite_update(stack, scores, params.elite_fraction)
        step = float(np.linalg.norm(new_pmf - pmf))
        pmf = new_pmf
        best_trace.append(best_score)
        step_trace.append(step)
        if step <= params.stop_epsilon:
            converged = True
            break

    return CeTrace(
        best_objectives=np.asarray(best_trace),
        pmf_steps=np.asarray(step_trace),
        assignment=best_assignment,
        best_penalized=best_score,
        best_daatc=daatc_objective(best_assignment, scenario),
        iterations=len(best_trace),
        converged=converged,
    )


def run_exhaustive(scenario: Scenario, chunk_bits: int = 16) -> tuple[np.ndarray, float]:
    """Enumerate all 2**(M*K) schedules and return the penalized argmax.

    Ties go to the smallest row-major binary encoding (ascending enumeration
    with strict improvement). Guarded to M*K <= 24 bits.
    """
    m, k = scenario.num_spectrum_sensors, scenario.num_channels
    bits = m * k
    if bits > EXHAUSTIVE_MAX_BITS:
        raise SearchSpaceTooLarge(
            f"exhaustive search over 2**{bits} schedules exceeds the "
            f"2**{EXHAUSTIVE_MAX_BITS} guard"
        )
    ctx = _score_context(scenario)
    total = 1 << bits
    chunk = 1 << min(chunk_bits, bits)
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint64)

    best_score = -np.inf
    best_assignment = None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        stack = ((codes[:, np.newaxis] >> shifts) & 1).astype(np.uint8)
        stack = np.ascontiguousarray(stack.reshape(-1, m, k))
        scores, _, _ = ctx.score(stack)
        top = int(np.argmax(scores))
        if scores[top] > best_score:
            best_score = float(scores[top])
            best_assignment = stack[top].copy()
    return best_assignment, best_score


def run_random(scenario: Scenario, rng: RngStream) -> tuple[np.ndarray, float]:
    """Uniform random schedule: each sensor draws one channel vector."""
    m, k = scenario.num_spectrum_sensors, scenario.num_channels
    pmf = _uniform_pmf(m, 1 << k)
    assignment = sample_assignment(pmf, rng)
    return assignment, penalized_objective(assignment, scenario)


def run_greedy(scenario: Scenario) -> tuple[np.ndarray, float]:
    """Sensor-sequential greedy baseline.

    Each sensor in index order grows its channel set one channel at a time,
    picking the largest positive marginal objective gain (ties to the lowest
    channel index) while both constraint families stay satisfied.
    """
    ctx = _score_context(scenario)
    m, k = scenario.num_spectrum_sensors, scenario.num_channels
    assignment = np.zeros((m, k), dtype=np.uint8)
    col_counts = np.zeros(k, dtype=np.int64)

    def idle_time(j):
        _, idle, _ = ctx.score(j[np.newaxis])
        return float(idle[0])

    current = idle_time(assignment)

    # Feasibility checks mirror the scoring kernel's comparisons exactly.
    for sensor in range(m):
        row_count = 0
        while True:
            if (row_count + 1) * ctx.sensing_energy_j > ctx.harvest_budget_j[sensor]:
                break
            best_gain = 0.0
            best_channel = -1
            for channel in range(k):
                if assignment[sensor, channel]:
                    continue
                if (col_counts[channel] + 1) * ctx.slot_s > ctx.phase_s:
                    continue
                assignment[sensor, channel] = 1
                gain = idle_time(assignment) - current
                assignment[sensor, channel] = 0
                if gain > best_gain:
                    best_gain = gain
                    best_channel = channel
            if best_channel < 0:
                break
            assignment[sensor, best_channel] = 1
            col_counts[best_channel] += 1
            row_count += 1
            current += best_gain

    return assignment, penalized_objective(assignment, scenario)
