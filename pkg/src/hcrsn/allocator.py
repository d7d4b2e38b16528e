"""Data-sensor time/power allocation by alternate convex search.

The allocation problem minimizes total transmission energy
``sum(t_nk * p_nk)`` subject to per-channel access-time caps, per-sensor
phase-time caps, per-sensor rate demands and a power box. It is biconvex:
fixing powers leaves an LP in the times, fixing times decomposes into one
single-constraint convex power problem per sensor (solved in closed
water-filling form). The solver alternates exact minimizations of the two
blocks from an all-``p_max`` start, so its objective sequence never
increases and its first point coincides with the max-power baseline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import Scenario, max_access_time
from .numerics import (
    DemandInfeasibleError,
    LpProblem,
    LpStatus,
    RngStream,
    solve_lp,
    solve_min_energy_power,
)
from .scheduler import SearchSpaceTooLarge

__all__ = [
    "DsraInstance",
    "Allocation",
    "JtpaTrace",
    "AllocationInfeasibleError",
    "select_channels",
    "total_energy",
    "transmission_rate",
    "solve_time_lp",
    "solve_power",
    "run_jtpa",
    "run_pmax_scheme",
    "run_random_channels",
    "run_optimal_small",
]


class AllocationInfeasibleError(Exception):
    """Demands cannot be met even at maximum power.

    ``max_bits_per_sensor`` maps sensor index to the most bits it could
    deliver at ``p_max``; sensors absent from the map passed their
    individual check (a joint time conflict made the instance infeasible).
    """

    def __init__(self, max_bits_per_sensor: dict[int, float], detail: str = ""):
        self.max_bits_per_sensor = dict(max_bits_per_sensor)
        msg = "allocation infeasible at maximum power"
        if self.max_bits_per_sensor:
            worst = min(self.max_bits_per_sensor, key=self.max_bits_per_sensor.get)
            msg += (
                f"; sensor {worst} can deliver at most "
                f"{self.max_bits_per_sensor[worst]:.6g} bits"
            )
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class DsraInstance:
    """One data-transmission-phase allocation problem.

    ``access_caps_s`` bounds the summed transmission time per selected
    channel, ``phase_s`` the summed time per sensor. ``gains`` holds linear
    channel gains over noise (1/W), so ``gain * power`` is an SNR.
    """

    selected_channels: tuple[int, ...]
    access_caps_s: np.ndarray
    phase_s: float
    gains: np.ndarray
    demands_bits: np.ndarray
    p_max_w: float
    bandwidth_hz: float

    def __post_init__(self):
        for name in ("access_caps_s", "gains", "demands_bits"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "selected_channels", tuple(self.selected_channels))
        if self.gains.ndim != 2:
            raise ValueError("gains must be a 2-D (sensors x channels) matrix")
        n, k = self.gains.shape
        if k != len(self.selected_channels) or k != self.access_caps_s.shape[0]:
            raise ValueError("channel dimensions disagree")
        if self.demands_bits.shape != (n,):
            raise ValueError("one demand per sensor is required")
        if k and np.any(self.access_caps_s > self.phase_s + 1e-12):
            raise ValueError("access caps cannot exceed the phase length")
        if np.any(self.gains <= 0.0):
            raise ValueError("gains must be positive")
        if np.any(self.demands_bits < 0.0):
            raise ValueError("demands must be nonnegative")
        if self.p_max_w <= 0.0 or self.bandwidth_hz <= 0.0 or self.phase_s <= 0.0:
            raise ValueError("powers, bandwidth and phase length must be positive")

    @property
    def num_sensors(self) -> int:
        return self.gains.shape[0]

    @property
    def num_channels(self) -> int:
        return self.gains.shape[1]


@dataclass(frozen=True)
class Allocation:
    """Transmission times (s) and powers (W), both (sensors x channels)."""

    times_s: np.ndarray
    powers_w: np.ndarray

    def __post_init__(self):
        times = np.ascontiguousarray(self.times_s, dtype=float)
        powers = np.ascontiguousarray(self.powers_w, dtype=float)
        if times.shape != powers.shape:
            raise ValueError("times and powers must share a shape")
        times.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "times_s", times)
        object.__setattr__(self, "powers_w", powers)


@dataclass(frozen=True)
class JtpaTrace:
    """Objective path of one alternate-convex-search run.

    ``objectives_j[0]`` is the all-``p_max`` starting energy (the max-power
    baseline); later entries follow each full time+power iteration and never
    increase.
    """

    objectives_j: np.ndarray
    allocation: Allocation
    iterations: int
    converged: bool

    @property
    def final_energy_j(self) -> float:
        return float(self.objectives_j[-1])


def select_channels(scenario: Scenario, available) -> DsraInstance:
    """Build the allocation instance from the detected-available channel set.

    At most ``num_transceivers`` channels are kept, preferring the largest
    mean idle sojourn ``1 / off_to_on_rate`` with ties to the lowest index.
    The instance keeps selected channels in ascending index order.
    """
    available = sorted(set(int(c) for c in available))
    if any(c < 0 or c >= scenario.num_channels for c in available):
        raise ValueError("available channels must be valid channel indices")
    ranked = sorted(
        available, key=lambda c: (-1.0 / scenario.channels[c].off_to_on_rate, c)
    )
    selected = tuple(sorted(ranked[: scenario.num_transceivers]))

    bandwidths = {scenario.channels[c].bandwidth_hz for c in selected} or {
        scenario.channels[0].bandwidth_hz
    }
    if len(bandwidths) > 1:
        raise ValueError("selected channels must share one bandwidth")

    caps = np.array(
        [
            max_access_time(
                scenario.channels[c],
                scenario.collision_bound,
                scenario.period_s,
                scenario.sensing_phase_s,
            )
            for c in selected
        ]
    )
    return DsraInstance(
        selected_channels=selected,
        access_caps_s=caps,
        phase_s=scenario.period_s - scenario.sensing_phase_s,
        gains=scenario.data_gain[:, list(selected)],
        demands_bits=scenario.demands_bits,
        p_max_w=scenario.p_max_w,
        bandwidth_hz=float(next(iter(bandwidths))),
    )


def total_energy(allocation: Allocation) -> float:
    """Total transmission energy in joules."""
    return float(np.sum(allocation.times_s * allocation.powers_w))


def transmission_rate(gain, power, bandwidth_hz):
    """Shannon rate ``W * log2(1 + gain * power)`` in bits/s."""
    return bandwidth_hz * np.log2(1.0 + np.asarray(gain) * np.asarray(power))


def _allowed_mask(inst: DsraInstance, allowed) -> np.ndarray:
    if allowed is None:
        return np.ones((inst.num_sensors, inst.num_channels), dtype=bool)
    mask = np.asarray(allowed, dtype=bool)
    if mask.shape != (inst.num_sensors, inst.num_channels):
        raise ValueError("allowed mask must match the gain matrix shape")
    return mask


def _max_bits_per_sensor(inst: DsraInstance, allowed: np.ndarray) -> np.ndarray:
    """Best-case deliverable bits per sensor alone: fill fastest channels first."""
    rates = transmission_rate(inst.gains, inst.p_max_w, inst.bandwidth_hz)
    rates = np.where(allowed, rates, 0.0)
    out = np.empty(inst.num_sensors)
    for n in range(inst.num_sensors):
        order = np.argsort(-rates[n], kind="stable")
        remaining = inst.phase_s
        bits = 0.0
        for k in order:
            if rates[n, k] <= 0.0 or remaining <= 0.0:
                break
            span = min(remaining, inst.access_caps_s[k])
            bits += span * rates[n, k]
            remaining -= span
        out[n] = bits
    return out


def solve_time_lp(
    inst: DsraInstance, powers: np.ndarray, allowed=None
) -> np.ndarray:
    """Minimum-energy time allocation at fixed powers (the LP half-step).

    Variables are the flattened times; columns are capped by channel access
    time, rows by the phase length, and each sensor's summed rate-time
    product must cover its demand. The optional ``allowed`` mask pins
    excluded sensor/channel pairs to zero time.
    """
    n, k = inst.num_sensors, inst.num_channels
    powers = np.asarray(powers, dtype=float)
    if powers.shape != (n, k):
        raise ValueError("powers must match the gain matrix shape")
    if np.any(powers < -1e-12) or np.any(powers > inst.p_max_w * (1 + 1e-9)):
        raise ValueError("powers must lie in the [0, p_max] box")
    mask = _allowed_mask(inst, allowed)

    rates = transmission_rate(inst.gains, powers, inst.bandwidth_hz)
    nvars = n * k

    rows, rhs, senses = [], [], []
    for col in range(k):
        coeff = np.zeros((n, k))
        coeff[:, col] = 1.0
        rows.append(coeff.ravel())
        rhs.append(inst.access_caps_s[col])
        senses.append("<=")
    for row in range(n):
        coeff = np.zeros((n, k))
        coeff[row, :] = 1.0
        rows.append(coeff.ravel())
        rhs.append(inst.phase_s)
        senses.append("<=")
    for row in range(n):
        coeff = np.zeros((n, k))
        coeff[row, :] = rates[row, :]
        rows.append(coeff.ravel())
        rhs.append(inst.demands_bits[row])
        senses.append(">=")

    upper = np.where(mask, inst.phase_s, 0.0).ravel()
    problem = LpProblem(
        objective=powers.ravel(),
        constraint_matrix=np.asarray(rows),
        constraint_rhs=np.asarray(rhs),
        senses=senses,
        lower_bounds=np.zeros(nvars),
        upper_bounds=list(upper),
    )
    solution = solve_lp(problem)
    if solution.status is not LpStatus.OPTIMAL:
        raise AllocationInfeasibleError(
            {}, detail=f"time allocation LP is {solution.status.value} at the given powers"
        )
    return solution.variables.reshape(n, k)


def solve_power(inst: DsraInstance, times: np.ndarray) -> np.ndarray:
    """Per-sensor minimum-energy powers at fixed times (water-filling half-step).

    Channels holding zero time get zero power.
    """
    n, k = inst.num_sensors, inst.num_channels
    times = np.asarray(times, dtype=float)
    if times.shape != (n, k):
        raise ValueError("times must match the gain matrix shape")
    powers = np.zeros((n, k))
    for row in range(n):
        try:
            powers[row] = solve_min_energy_power(
                times[row],
                inst.gains[row],
                float(inst.demands_bits[row]),
                inst.bandwidth_hz,
                inst.p_max_w,
            )
        except DemandInfeasibleError as exc:
            raise AllocationInfeasibleError(
                {row: exc.max_achievable_bits},
                detail=f"sensor {row} cannot meet its demand at the given times",
            ) from exc
    return powers


def _clean_allocation(inst: DsraInstance, times: np.ndarray, powers: np.ndarray) -> Allocation:
    times = np.where(times > 0.0, times, 0.0)
    powers = np.where(times > 0.0, powers, 0.0)
    return Allocation(times_s=times, powers_w=powers)


def _expand_times(inst: DsraInstance, times: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Grow a feasible time matrix into the unused channel and phase capacity.

    Needed to escape the max-power start: the first LP returns rate-tight
    minimal times at which no power can be lowered, so the alternation would
    stall at the baseline. Extra time never hurts (each sensor's minimum
    energy is non-increasing in its times), so descent stays monotone.
    """
    t = times.copy()
    tol = 1e-15
    for _ in range(inst.num_sensors + inst.num_channels + 1):
        row_resid = inst.phase_s - t.sum(axis=1)
        col_resid = inst.access_caps_s - t.sum(axis=0)
        progress = False
        for k in range(inst.num_channels):
            if col_resid[k] <= tol:
                continue
            takers = np.flatnonzero(mask[:, k] & (row_resid > tol))
            if takers.size == 0:
                continue
            grant = np.minimum(col_resid[k] / takers.size, row_resid[takers])
            t[takers, k] += grant
            row_resid[takers] -= grant
            col_resid[k] -= grant.sum()
            progress = True
        if not progress:
            break
    return t


def run_jtpa(
    inst: DsraInstance,
    stop_epsilon: float = 0.0,
    rel_epsilon: float = 1e-9,
    max_iterations: int = 50,
    explore_iterations: int = 10,
    allowed=None,
) -> JtpaTrace:
    """Alternate convex search from the all-``p_max`` start.

    Each iteration re-solves the time LP at the current powers and the
    per-sensor power problems at the resulting times. For the first
    ``explore_iterations`` rounds the LP times are additionally spread into
    leftover channel/phase capacity (extra time never increases a sensor's
    minimum energy, so descent stays monotone); without that spreading the
    rate-tight LP point is already a partial optimum and the search could
    never leave the max-power corner. After the exploration budget the pure
    alternation settles on its fixed point within an iteration or two.

    The run stops once a full iteration improves the energy by less than
    ``stop_epsilon`` joules plus ``rel_epsilon`` relative; the relative term
    keeps the test meaningful across instances whose energies span many
    orders of magnitude. Feasibility is checked up front so failures
    surface before iterating.
    """
    mask = _allowed_mask(inst, allowed)
    max_bits = _max_bits_per_sensor(inst, mask)
    short = {
        n: float(max_bits[n])
        for n in range(inst.num_sensors)
        if max_bits[n] < inst.demands_bits[n]
    }
    if short:
        raise AllocationInfeasibleError(short)

    powers = np.where(mask, inst.p_max_w, 0.0)
    try:
        times = solve_time_lp(inst, powers, allowed=mask)
    except AllocationInfeasibleError:
        # Per-sensor checks passed, so only the joint time budget conflicts.
        raise AllocationInfeasibleError(
            {n: float(max_bits[n]) for n in range(inst.num_sensors)},
            detail="channel time budgets conflict across sensors at maximum power",
        ) from None
    objectives = [float(np.sum(times * powers))]

    # The rate-tight LP times make (times, p_max) a partial optimum, so the
    # alternation alone cannot leave the baseline corner; spreading leftover
    # capacity each round restores the time-allocation search direction.
    times = _expand_times(inst, times, mask)

    converged = False
    iterations = 0
    for step in range(max_iterations):
        powers = solve_power(inst, times)
        energy = float(np.sum(times * powers))
        iterations += 1
        improvement = objectives[-1] - energy
        objectives.append(energy)
        if improvement < stop_epsilon + rel_epsilon * abs(objectives[-2]):
            converged = True
            break
        if step < max_iterations - 1:
            times = solve_time_lp(inst, powers, allowed=mask)
            if step < explore_iterations:
                times = _expand_times(inst, times, mask)

    return JtpaTrace(
        objectives_j=np.asarray(objectives),
        allocation=_clean_allocation(inst, times, powers),
        iterations=iterations,
        converged=converged,
    )


def run_pmax_scheme(inst: DsraInstance, allowed=None) -> tuple[Allocation, float]:
    """Max-power baseline: fix powers at ``p_max`` and solve the time LP once."""
    mask = _allowed_mask(inst, allowed)
    max_bits = _max_bits_per_sensor(inst, mask)
    short = {
        n: float(max_bits[n])
        for n in range(inst.num_sensors)
        if max_bits[n] < inst.demands_bits[n]
    }
    if short:
        raise AllocationInfeasibleError(short)
    powers = np.where(mask, inst.p_max_w, 0.0)
    times = solve_time_lp(inst, powers, allowed=mask)
    energy = float(np.sum(times * powers))
    return _clean_allocation(inst, times, powers), energy


def run_random_channels(
    inst: DsraInstance, rng: RngStream, max_retries: int = 20
) -> tuple[Allocation, float]:
    """Restrict each sensor to one uniformly drawn channel, then optimize.

    Infeasible draws are retried up to ``max_retries`` times; the last
    failure is re-raised if none succeeds.
    """
    last_error = None
    for _ in range(max_retries):
        choices = rng.integers(0, inst.num_channels, size=inst.num_sensors)
        mask = np.zeros((inst.num_sensors, inst.num_channels), dtype=bool)
        mask[np.arange(inst.num_sensors), choices] = True
        try:
            trace = run_jtpa(inst, allowed=mask)
        except AllocationInfeasibleError as exc:
            last_error = exc
            continue
        return trace.allocation, trace.final_energy_j
    raise AllocationInfeasibleError(
        getattr(last_error, "max_bits_per_sensor", {}),
        detail=f"no feasible single-channel restriction in {max_retries} draws",
    )


def run_optimal_small(inst: DsraInstance) -> tuple[Allocation, float]:
    """Small-instance oracle: best restricted search over channel subsets.

    Every assignment of a nonempty channel subset to each sensor is solved
    to convergence and the lowest-energy result returned. The unrestricted
    pattern is included, so the result never exceeds the plain solver's.
    Guarded to 4 sensors and 4 channels.
    """
    n, k = inst.num_sensors, inst.num_channels
    if n > 4 or k > 4:
        raise SearchSpaceTooLarge(
            f"restriction search over {(2 ** k - 1) ** n} patterns needs "
            "at most 4 sensors and 4 channels"
        )
    subsets = []
    for code in range(1, 1 << k):
        subsets.append(np.array([(code >> b) & 1 for b in range(k)], dtype=bool))

    best_energy = np.inf
    best_allocation = None
    for pattern in itertools.product(range(len(subsets)), repeat=n):
        mask = np.stack([subsets[p] for p in pattern])
        try:
            trace = run_jtpa(inst, allowed=mask)
        except AllocationInfeasibleError:
            continue
        if trace.final_energy_j < best_energy:
            best_energy = trace.final_energy_j
            best_allocation = trace.allocation
    if best_allocation is None:
        raise AllocationInfeasibleError({}, detail="every restriction pattern is infeasible")
    return best_allocation, float(best_energy)
