"""Differential oracle: reference Wasm interpreter and fragment evaluator."""

from .differential import DifferentialReport, Outcome, differential_check, run_fragment, run_wasm
from .evaluator import FragmentEvaluator, eval_fragment
from .interp import HostTrace, Instance, OutOfFuel, default_host, interp_wasm, string_host
from .numeric import Trap

__all__ = [
    "DifferentialReport", "FragmentEvaluator", "HostTrace", "Instance", "OutOfFuel", "Outcome", "Trap",
    "default_host", "differential_check", "eval_fragment", "interp_wasm", "run_fragment", "run_wasm",
    "string_host",
]
