"""Numerical kernels shared by the scheduler and the allocator.

Provides the standard-Gaussian tail function and its inverse, a thin
linear-program interface, the single-constraint minimum-energy power
subsolver (water-filling with a bisected multiplier), and a seedable
counter-based random stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.special import ndtr, ndtri

__all__ = [
    "RngStream",
    "gaussian_tail_q",
    "gaussian_tail_q_inv",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "solve_lp",
    "solve_min_energy_power",
    "DemandInfeasibleError",
]

_LN2 = math.log(2.0)


class DemandInfeasibleError(Exception):
    """Raised when a rate demand exceeds what the power box can deliver.

    Carries the maximum achievable bits so callers can report how far off
    the demand is.
    """

    def __init__(self, demand_bits: float, max_achievable_bits: float, detail: str = ""):
        self.demand_bits = demand_bits
        self.max_achievable_bits = max_achievable_bits
        msg = (
            f"demand of {demand_bits:.6g} bits exceeds the maximum achievable "
            f"{max_achievable_bits:.6g} bits"
        )
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# Random stream
# ---------------------------------------------------------------------------


class RngStream:
    """Reproducible random stream backed by the Philox counter-based generator.

    Identical seed and identical call sequence produce identical outputs on
    every platform (the Philox4x64 stream is fully specified and NumPy pins
    its draw algorithms per Generator method). Independent substreams are
    derived deterministically from ``(seed, spawn_key)`` via ``SeedSequence``.
    """

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        self._gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(self.seed, spawn_key=self.spawn_key))
        )

    def substream(self, *path: int) -> "RngStream":
        """Derive an independent stream for (seed, spawn_key + path)."""
        return RngStream(self.seed, self.spawn_key + tuple(path))

    # Thin delegations; everything downstream draws through these.
    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def exponential(self, scale=1.0, size=None):
        return self._gen.exponential(scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, spawn_key={self.spawn_key})"


# ---------------------------------------------------------------------------
# Gaussian tail
# ---------------------------------------------------------------------------


def gaussian_tail_q(x):
    """Upper-tail probability Q(x) = P(Z > x) of the standard normal.

    Accepts scalars or arrays; absolute error is at machine level
    (well inside 1e-12).
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("gaussian_tail_q requires finite input")
    out = ndtr(-arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def gaussian_tail_q_inv(p):
    """Inverse of :func:`gaussian_tail_q` on (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("gaussian_tail_q_inv requires p in (0, 1)")
    out = -ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """Dense LP: optimize ``c @ x`` subject to row-wise <=, >= or = constraints.

    ``senses`` holds one of ``"<="``, ``">="``, ``"="`` per constraint row.
    Upper bounds may be ``None`` (unbounded above). Minimizes by default.
    """

    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_rhs: np.ndarray
    senses: list[str]
    lower_bounds: np.ndarray
    upper_bounds: list[float | None] = field(default_factory=list)
    maximize: bool = False

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.constraint_matrix = np.asarray(self.constraint_matrix, dtype=float)
        self.constraint_rhs = np.asarray(self.constraint_rhs, dtype=float)
        self.lower_bounds = np.asarray(self.lower_bounds, dtype=float)
        n = self.objective.size
        m = self.constraint_rhs.size
        if self.constraint_matrix.shape != (m, n):
            raise ValueError(
                f"constraint matrix shape {self.constraint_matrix.shape} does not match "
                f"{m} rows x {n} variables"
            )
        if len(self.senses) != m:
            raise ValueError("one sense per constraint row is required")
        if any(s not in ("<=", ">=", "=") for s in self.senses):
            raise ValueError("senses must be one of '<=', '>=', '='")
        if self.lower_bounds.size != n:
            raise ValueError("lower bound per variable is required")
        if not self.upper_bounds:
            self.upper_bounds = [None] * n
        if len(self.upper_bounds) != n:
            raise ValueError("upper bound per variable is required")
        for lo, hi in zip(self.lower_bounds, self.upper_bounds):
            if hi is not None and lo > hi:
                raise ValueError("lower bound exceeds upper bound")


@dataclass
class LpSolution:
    status: LpStatus
    variables: np.ndarray | None
    objective_value: float | None


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve a dense LP, reporting optimal/infeasible/unbounded faithfully."""
    c = -problem.objective if problem.maximize else problem.objective

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rhs, sense in zip(
        problem.constraint_matrix, problem.constraint_rhs, problem.senses
    ):
        if sense == "<=":
            a_ub.append(row)
            b_ub.append(rhs)
        elif sense == ">=":
            a_ub.append(-row)
            b_ub.append(-rhs)
        else:
            a_eq.append(row)
            b_eq.append(rhs)

    res = linprog(
        c,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=list(zip(problem.lower_bounds, problem.upper_bounds)),
        method="highs",
    )
    if res.status == 0:
        value = float(problem.objective @ res.x)
        return LpSolution(LpStatus.OPTIMAL, np.asarray(res.x, dtype=float), value)
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, None, None)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, None, None)
    raise RuntimeError(f"LP solver failed: {res.message}")


# ---------------------------------------------------------------------------
# Minimum-energy power subsolver
# ---------------------------------------------------------------------------


def _rate_bits(times, gains, powers, bandwidth_hz):
    return float(np.sum(times * bandwidth_hz * np.log2(1.0 + gains * powers)))


def solve_min_energy_power(
    times: np.ndarray,
    gains: np.ndarray,
    demand_bits: float,
    bandwidth_hz: float,
    p_max: float,
    rel_tol: float = 1e-9,
) -> np.ndarray:
    """Minimize ``sum(t_k * p_k)`` subject to a total rate demand and a power box.

    Stationarity gives the water-filling form
    ``p_k = clip(nu * W / ln 2 - 1 / g_k, 0, p_max)``; the multiplier ``nu``
    is bisected until the delivered bits match the demand within ``rel_tol``
    relative. Channels with zero time get zero power.
    """
    times = np.asarray(times, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if times.shape != gains.shape:
        raise ValueError("times and gains must have matching shapes")
    if np.any(times < 0.0):
        raise ValueError("times must be nonnegative")
    if np.any(gains <= 0.0):
        raise ValueError("gains must be positive")
    if demand_bits < 0.0:
        raise ValueError("demand must be nonnegative")
    if p_max < 0.0:
        raise ValueError("p_max must be nonnegative")

    powers = np.zeros_like(times)
    if demand_bits == 0.0:
        return powers

    active = times > 0.0
    max_bits = _rate_bits(times[active], gains[active], p_max, bandwidth_hz)
    if demand_bits > max_bits:
        if demand_bits <= max_bits * (1.0 + rel_tol):
            powers[active] = p_max
            return powers
        raise DemandInfeasibleError(demand_bits, max_bits)

    t_act = times[active]
    g_act = gains[active]

    def clipped_powers(nu):
        return np.clip(nu * bandwidth_hz / _LN2 - 1.0 / g_act, 0.0, p_max)

    lo = 0.0
    hi = (p_max + 1.0 / float(np.min(g_act))) * _LN2 / bandwidth_hz
    p_hi = clipped_powers(hi)
    bits_hi = _rate_bits(t_act, g_act, p_hi, bandwidth_hz)
    for _ in range(200):
        if bits_hi - demand_bits <= rel_tol * demand_bits:
            break
        mid = 0.5 * (lo + hi)
        p_mid = clipped_powers(mid)
        bits_mid = _rate_bits(t_act, g_act, p_mid, bandwidth_hz)
        if bits_mid >= demand_bits:
            hi, p_hi, bits_hi = mid, p_mid, bits_mid
        else:
            lo = mid

    powers[active] = p_hi
    return powers
