"""Picker/guesser secret games: closed-form and LP solvers with brute-force checks."""

from .capped import classify, compute_L, maximin_utility, sample_dictionary, sweep_capped, verify_ne
from .capped import solve_ne as solve_capped
from .costly import best_response, build_sse_lp, classify_regime, solve_sse
from .costly import solve_ne as solve_costly_ne
from .ingest import from_frequency_file, prune, synthetic_key_model
from .model import (
    CappedParams,
    CostlyParams,
    ExplorationPlan,
    GameSpecError,
    GuesserMarginals,
    PartitionProfile,
    PickerMix,
    SolveReport,
    eval_capped,
    eval_costly_plan,
    exhaust_utility,
)

__all__ = [
    "CappedParams", "CostlyParams", "ExplorationPlan", "GameSpecError", "GuesserMarginals",
    "PartitionProfile", "PickerMix", "SolveReport", "best_response", "build_sse_lp", "classify",
    "classify_regime", "compute_L", "eval_capped", "eval_costly_plan", "exhaust_utility",
    "from_frequency_file", "maximin_utility", "prune", "sample_dictionary", "solve_capped",
    "solve_costly_ne", "solve_sse", "sweep_capped", "synthetic_key_model", "verify_ne",
]
