"""Joint source/relay power allocation for MIMO DF two-way relaying.

Core modules:

- ``channels``: channel generation, SVD gains, relay covariance shaping
- ``waterfill``: scalar waterfilling primitives and relative water-levels
- ``cvx``: log-det convex programs over the source covariance pair
- ``netopt``: the case/subcase decision procedure and bisection solver
- ``verify``: necessary-condition audits and the scalar grid oracle

The FastAPI service lives in ``twrpower.service``; ``twrpower.cli`` is a
thin client over it.
"""

__version__ = "0.1.0"

from .channels import ChannelSet, GainVector, SVDCache, bc_gains, generate_channels, relay_covariance, recover_precoder
from .cvx import CovPair, CvxSolution, LogDetProgram, RateConstraint, feasible, mac_capacity, solve
from .netopt import (
    InitialAlloc,
    Limits,
    NetSolution,
    RelayAlloc,
    Subcase,
    Workspace,
    classify,
    classify_subcase_II,
    initial_allocation,
    network_optimize,
    solve_case_I,
    solve_case_II,
    subcase_I2_pipeline,
)
from .verify import AuditReport, OracleResult, check_necessary, compare_to_oracle, scalar_oracle
from .waterfill import (
    LevelAlloc,
    WaterLevels,
    level_for_rate,
    mac_rate,
    power_at_level,
    rate_at_level,
    relative_levels,
    uplink_rate,
    waterfill,
)

__all__ = [
    "__version__",
    "ChannelSet", "GainVector", "SVDCache", "bc_gains", "generate_channels",
    "relay_covariance", "recover_precoder",
    "CovPair", "CvxSolution", "LogDetProgram", "RateConstraint", "feasible",
    "mac_capacity", "solve",
    "InitialAlloc", "Limits", "NetSolution", "RelayAlloc", "Subcase", "Workspace",
    "classify", "classify_subcase_II", "initial_allocation", "network_optimize",
    "solve_case_I", "solve_case_II", "subcase_I2_pipeline",
    "AuditReport", "OracleResult", "check_necessary", "compare_to_oracle", "scalar_oracle",
    "LevelAlloc", "WaterLevels", "level_for_rate", "mac_rate", "power_at_level",
    "rate_at_level", "relative_levels", "uplink_rate", "waterfill",
]
