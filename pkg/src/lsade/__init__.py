"""Surrogate-assisted differential evolution for expensive box-constrained problems."""

from .bench import get_problem, plugin_objective
from .core import Archive, BoxBounds, EvaluatedPoint, NonFiniteObjectiveError, RngStream
from .de import DeConfig
from .local_opt import LocalSearchConfig
from .optimizer import LsadeConfig, RunTrace, run_lsade, run_variant
from .rbf import RbfKernel
from .schedule import dry_run_counts, dynamic_policy, parse_rule, static_policy

__all__ = [
    "Archive",
    "BoxBounds",
    "DeConfig",
    "EvaluatedPoint",
    "LocalSearchConfig",
    "LsadeConfig",
    "NonFiniteObjectiveError",
    "RbfKernel",
    "RngStream",
    "RunTrace",
    "dry_run_counts",
    "dynamic_policy",
    "get_problem",
    "parse_rule",
    "plugin_objective",
    "run_lsade",
    "run_variant",
    "static_policy",
]
