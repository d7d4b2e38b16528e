"""NumPy implementations of the hot kernels (fallback backend)."""

import math

import numpy as np

BACKEND_NAME = "numpy"


def score_assignments(
    assignments,
    alpha,
    miss_factors,
    false_alarm_pow,
    md_threshold,
    sensing_energy_j,
    harvest_budget_j,
    slot_s,
    phase_s,
):
    """Score a stack of binary sensor-to-channel assignment matrices.

    Parameters
    ----------
    assignments : (Z, M, K) uint8 array of 0/1 assignment matrices.
    alpha : (K,) mean idle time per channel, seconds.
    miss_factors : (M, K) per-pair miss probabilities (one minus the
        single-sensor detection probability).
    false_alarm_pow : (M+1,) lookup of (1 - pf)**count.
    md_threshold : channels count as protected when the product of miss
        factors over assigned sensors falls strictly below this value.
    sensing_energy_j, harvest_budget_j, slot_s, phase_s : constraint data;
        a sensor row violates energy when count * e_s > budget, a channel
        column violates time when count * slot > phase.

    Returns
    -------
    scores : (Z,) penalized objective: -sum(alpha) once per violating
        sensor row and once per violating channel column, so partial
        constraint repairs improve the score.
    idle_time : (Z,) unpenalized objective, seconds.
    feasible : (Z,) bool.
    """
    j = np.ascontiguousarray(assignments, dtype=np.uint8)
    col_counts = j.sum(axis=1, dtype=np.int64)  # (Z, K)
    row_counts = j.sum(axis=2, dtype=np.int64)  # (Z, M)

    # Sequential product over the sensor axis matches the compiled loop.
    miss = np.where(j.astype(bool), miss_factors[np.newaxis, :, :], 1.0).prod(axis=1)
    protected = miss < md_threshold

    idle_time = (alpha[np.newaxis, :] * false_alarm_pow[col_counts] * protected).sum(axis=1)

    energy_violations = (row_counts * sensing_energy_j > harvest_budget_j[np.newaxis, :]).sum(
        axis=1, dtype=np.int64
    )
    time_violations = (col_counts * slot_s > phase_s).sum(axis=1, dtype=np.int64)

    penalty = -alpha.sum()
    scores = idle_time + penalty * (energy_violations + time_violations)
    feasible = (energy_violations + time_violations) == 0
    return scores, idle_time, feasible


def count_collisions(u_state, u_sojourn, p_inactive, return_rate, access_time_s):
    """Count Monte Carlo collision events from uniform draws.

    A trial collides when ``u_state < p_inactive`` (channel idle at the start
    of access) and the inverse-CDF exponential sojourn ``-log(u)/rate`` ends
    inside the window, tested as ``u_sojourn > exp(-rate * access_time)`` so
    both backends compare identically.
    """
    threshold = math.exp(-return_rate * access_time_s)
    return int(np.count_nonzero((u_state < p_inactive) & (u_sojourn > threshold)))
