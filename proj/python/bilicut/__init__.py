"""Lower bounds for box-constrained bilinear quadratic programs."""

from ._core import (
    Instance,
    addmc_rhs,
    bmc_bound,
    cutting_plane,
    gap_closed,
    generate,
    relative_gap,
    run_suite,
    saxmf_rhs,
    smc_bound,
    upper_bound,
)

__all__ = [
    "Instance",
    "addmc_rhs",
    "bmc_bound",
    "cutting_plane",
    "gap_closed",
    "generate",
    "relative_gap",
    "run_suite",
    "saxmf_rhs",
    "smc_bound",
    "upper_bound",
]
