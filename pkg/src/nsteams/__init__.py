"""Exact engine for finite non-sequential decentralized stochastic control."""

from .model import (
    IntrinsicModel,
    DecisionMaker,
    OrderingFunction,
    OrderingStage,
    PolicyProfile,
    expected_cost,
    solve_closed_loop,
    solution_map,
    validate,
)
from .properties import (
    PropertyReport,
    audit_implications,
    check_c,
    check_ci,
    check_df,
    check_rcs,
    check_sm,
    classify,
)

__all__ = [
    "IntrinsicModel",
    "DecisionMaker",
    "OrderingFunction",
    "OrderingStage",
    "PolicyProfile",
    "PropertyReport",
    "audit_implications",
    "check_c",
    "check_ci",
    "check_df",
    "check_rcs",
    "check_sm",
    "classify",
    "expected_cost",
    "solve_closed_loop",
    "solution_map",
    "validate",
]

__version__ = "0.1.0"
