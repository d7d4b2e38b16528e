"""Resource allocation for heterogeneous cognitive-radio sensor networks.

Two coupled solvers: a Cross-Entropy scheduler assigning energy-harvesting
spectrum sensors to licensed channels (maximizing detected idle time), and
an alternate-convex-search allocator of transmission time and power for
battery-powered data sensors (minimizing their energy). A CLI harness
generates scenarios, runs the experiment suite and emits CSV.
"""

from .allocator import (
    Allocation,
    AllocationInfeasibleError,
    DsraInstance,
    JtpaTrace,
    run_jtpa,
    run_optimal_small,
    run_pmax_scheme,
    run_random_channels,
    select_channels,
    solve_power,
    solve_time_lp,
    total_energy,
    transmission_rate,
)
from .detection import (
    DetectorConfig,
    detection_threshold,
    fused_detection,
    fused_false_alarm,
    protection_indicator,
    single_detection_prob,
)
from .harness import GeometrySpec, PeriodResult, generate_scenario, simulate_period
from .kernels import BACKEND as KERNEL_BACKEND
from .model import (
    ChannelParams,
    OnOffTrajectory,
    Scenario,
    collision_probability,
    empirical_collision_rate,
    max_access_time,
    mean_available_time,
    sample_trajectory,
    stationary_probs,
)
from .numerics import (
    DemandInfeasibleError,
    LpProblem,
    LpSolution,
    LpStatus,
    RngStream,
    gaussian_tail_q,
    gaussian_tail_q_inv,
    solve_lp,
    solve_min_energy_power,
)
from .scenario_io import load_scenario, save_scenario
from .scheduler import (
    CeParams,
    CeTrace,
    SearchSpaceTooLarge,
    daatc_objective,
    elite_update,
    penalized_objective,
    run_ce,
    run_exhaustive,
    run_greedy,
    run_random,
    sample_assignment,
)

__version__ = "0.1.0"
