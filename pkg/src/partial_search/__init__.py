"""Exact simulation and exhaustive sequence optimisation for quantum search
with global and partial (block-local) diffusion operators."""

from .core import (
    SearchParams,
    ReducedState,
    angle,
    apply_sequence,
    grover_success,
    initial_reduced_state,
    k_opt,
    reduced_global,
    reduced_local,
    success_full,
    success_partial,
    trajectory,
)
from .errors import CapacityError, InvalidParameterError, SequenceSyntaxError, UndefinedCollapseError
from .optimizer import OptimizationReport, enumerate_sequences, optimize_one_stage, optimize_two_stage
from .sequence import OperatorSequence
from .twostage import TwoStagePlan, compose, two_stage_success

__all__ = [
    "SearchParams", "ReducedState", "OperatorSequence", "OptimizationReport", "TwoStagePlan",
    "angle", "k_opt", "grover_success", "reduced_global", "reduced_local", "initial_reduced_state",
    "apply_sequence", "trajectory", "success_full", "success_partial",
    "enumerate_sequences", "optimize_one_stage", "optimize_two_stage", "compose", "two_stage_success",
    "InvalidParameterError", "CapacityError", "SequenceSyntaxError", "UndefinedCollapseError",
]
