"""Exact solver toolkit for the two-stage stochastic 3D-printing knapsack problem.

Pack items, 3D printers and printing material under weight and volume limits,
then, once a demand scenario is revealed, hand out packed items and print
missing ones at a quality discount. The package compiles an instance into its
deterministic-equivalent integer program and solves it with a built-in
simplex and branch-and-bound engine.
"""

from .bounds import BoundResult, printer_upper_bound
from .deteq import (
    SolveError,
    VariableMap,
    build_det_equiv,
    build_second_stage,
    evaluate_first_stage,
    extract_solution,
    second_stage_value,
)
from .experiments import InstanceOutcome, SweepReport, SweepSpec, reward_gain, run_sweep, summarize
from .fileio import FormatError, ValidationError, read_instance, read_solution, write_instance, write_solution
from .generator import GenConfig, GenTrace, SweepOverride, apply_sweep_override, generate
from .lp import LpProblem, LpStatus, solve_lp
from .mip import MipParams, MipProblem, MipResult, MipStatus, relative_gap, solve_mip
from .model import (
    FirstStageDecision,
    Instance,
    Item,
    MaterialSpec,
    PrinterSpec,
    PrintPlan,
    Scenario,
    check_first_stage,
    check_plan_feasible,
    expected_reward,
    scenario_reward,
    validate_instance,
)
from .mps import export_mps, parse_mps
from .oracle import brute_force_full, brute_force_second_stage

__version__ = "0.1.0"

__all__ = [
    "BoundResult", "printer_upper_bound",
    "SolveError", "VariableMap", "build_det_equiv", "build_second_stage", "evaluate_first_stage",
    "extract_solution", "second_stage_value",
    "InstanceOutcome", "SweepReport", "SweepSpec", "reward_gain", "run_sweep", "summarize",
    "FormatError", "ValidationError", "read_instance", "read_solution", "write_instance", "write_solution",
    "GenConfig", "GenTrace", "SweepOverride", "apply_sweep_override", "generate",
    "LpProblem", "LpStatus", "solve_lp",
    "MipParams", "MipProblem", "MipResult", "MipStatus", "relative_gap", "solve_mip",
    "FirstStageDecision", "Instance", "Item", "MaterialSpec", "PrinterSpec", "PrintPlan", "Scenario",
    "check_first_stage", "check_plan_feasible", "expected_reward", "scenario_reward", "validate_instance",
    "export_mps", "parse_mps",
    "brute_force_full", "brute_force_second_stage",
]
