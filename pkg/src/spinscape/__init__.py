"""Spin-system sampling and landscape analysis toolkit.

Implements Metropolis dynamics on modified energy landscapes, exact
spectral/potential-theoretic analysis of the resulting chains at desk
scale, and power-law simulated annealing, together with the Ising and
random-energy models used to exercise them.
"""

from .spins import SpinConfig
from .models import (
    CapacityError,
    EnergyModel,
    GraphSpec,
    LandscapeStats,
    RemDisorder,
    erdos_renyi_graph,
    random_regular_graph,
)
from .landscape import (
    ModificationParams,
    TuneReport,
    modified_energy,
    modified_energy_table,
    tune_c,
    tuned_params,
)
from .heights import (
    SaddleReport,
    classical_m,
    minimax_elevation,
    modified_m,
    modified_m_upper_bound,
)
from .exact import (
    ExactChain,
    build_chain,
    capacity,
    gap_lower_bound,
    gibbs_distribution,
    mean_hitting_time,
    mixing_time,
    semigroup_row,
    spectral_gap,
    tv_distance,
)
from .dynamics import (
    HittingSample,
    Trajectory,
    hitting_time,
    hitting_times_batch,
    sample_states_at,
    simulate,
    time_to_ground,
    tunneling_experiment,
)
from .annealing import (
    HorizonConstants,
    Schedule,
    horizon_constants,
    simulate_annealing,
    success_probability,
)

__version__ = "0.1.0"

__all__ = [
    "SpinConfig",
    "CapacityError",
    "EnergyModel",
    "GraphSpec",
    "LandscapeStats",
    "RemDisorder",
    "erdos_renyi_graph",
    "random_regular_graph",
    "ModificationParams",
    "TuneReport",
    "modified_energy",
    "modified_energy_table",
    "tune_c",
    "tuned_params",
    "SaddleReport",
    "classical_m",
    "minimax_elevation",
    "modified_m",
    "modified_m_upper_bound",
    "ExactChain",
    "build_chain",
    "capacity",
    "gap_lower_bound",
    "gibbs_distribution",
    "mean_hitting_time",
    "mixing_time",
    "semigroup_row",
    "spectral_gap",
    "tv_distance",
    "HittingSample",
    "Trajectory",
    "hitting_time",
    "hitting_times_batch",
    "sample_states_at",
    "simulate",
    "time_to_ground",
    "tunneling_experiment",
    "HorizonConstants",
    "Schedule",
    "horizon_constants",
    "simulate_annealing",
    "success_probability",
]
