# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors ``_pure`` operation for operation: products and sums run in the same
order, comparisons are identical, so the two backends agree to the last few
ulps and integer outputs agree exactly.
"""

from libc.math cimport exp, log

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def score_assignments(
    assignments,
    alpha,
    miss_factors,
    false_alarm_pow,
    double md_threshold,
    double sensing_energy_j,
    harvest_budget_j,
    double slot_s,
    double phase_s,
):
    """See ``hcrsn.kernels._pure.score_assignments``."""
    cdef cnp.uint8_t[:, :, ::1] j = np.ascontiguousarray(assignments, dtype=np.uint8)
    cdef double[::1] a = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef double[:, ::1] miss_f = np.ascontiguousarray(miss_factors, dtype=np.float64)
    cdef double[::1] ff_pow = np.ascontiguousarray(false_alarm_pow, dtype=np.float64)
    cdef double[::1] budget = np.ascontiguousarray(harvest_budget_j, dtype=np.float64)

    cdef Py_ssize_t n_samples = j.shape[0]
    cdef Py_ssize_t n_sensors = j.shape[1]
    cdef Py_ssize_t n_channels = j.shape[2]

    scores_arr = np.empty(n_samples, dtype=np.float64)
    idle_arr = np.empty(n_samples, dtype=np.float64)
    feas_arr = np.empty(n_samples, dtype=np.uint8)
    cdef double[::1] scores = scores_arr
    cdef double[::1] idle = idle_arr
    cdef cnp.uint8_t[::1] feas = feas_arr

    cdef double penalty = 0.0
    cdef Py_ssize_t z, m, k
    cdef double miss, total
    cdef long col_count, row_count, violations

    for k in range(n_channels):
        penalty -= a[k]

    for z in range(n_samples):
        total = 0.0
        violations = 0
        for k in range(n_channels):
            miss = 1.0
            col_count = 0
            for m in range(n_sensors):
                if j[z, m, k]:
                    miss = miss * miss_f[m, k]
                    col_count += 1
            if col_count * slot_s > phase_s:
                violations += 1
            if miss < md_threshold:
                total = total + a[k] * ff_pow[col_count]
        for m in range(n_sensors):
            row_count = 0
            for k in range(n_channels):
                if j[z, m, k]:
                    row_count += 1
            if row_count * sensing_energy_j > budget[m]:
                violations += 1
        scores[z] = total + penalty * violations
        idle[z] = total
        feas[z] = violations == 0

    return scores_arr, idle_arr, feas_arr.astype(bool)


def count_collisions(
    u_state,
    u_sojourn,
    double p_inactive,
    double return_rate,
    double access_time_s,
):
    """See ``hcrsn.kernels._pure.count_collisions``."""
    cdef double[::1] us = np.ascontiguousarray(u_state, dtype=np.float64)
    cdef double[::1] uq = np.ascontiguousarray(u_sojourn, dtype=np.float64)
    cdef double threshold = exp(-return_rate * access_time_s)
    cdef Py_ssize_t i, n = us.shape[0]
    cdef long hits = 0
    for i in range(n):
        if us[i] < p_inactive and uq[i] > threshold:
            hits += 1
    return hits
