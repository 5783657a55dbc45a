"""Robust CBF safety filter for sector-bounded input nonlinearities."""

from ._core import (
    ConeSolution,
    FilterResult,
    normalize_sector,
    optimal_multiplier,
    preset_names,
    robust_margin,
    run_verification,
    safety_filter,
    simulate,
    solve_cone_program,
    worst_case_input,
)

__all__ = [
    "ConeSolution",
    "FilterResult",
    "normalize_sector",
    "optimal_multiplier",
    "preset_names",
    "robust_margin",
    "run_verification",
    "safety_filter",
    "simulate",
    "solve_cone_program",
    "worst_case_input",
]
