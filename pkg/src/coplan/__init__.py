"""Capacity expansion planning for generation, storage and transmission,
co-optimized or sequential."""

from .lp import LinearProgram, LpSolution, export_lp, read_lp, solve
from .scenario import OptionsSpec, PolicySpec, Scenario, validate
from .scenario_io import load_scenario, write_scenario

__version__ = "0.1.0"

__all__ = [
    "LinearProgram",
    "LpSolution",
    "OptionsSpec",
    "PolicySpec",
    "Scenario",
    "export_lp",
    "load_scenario",
    "read_lp",
    "solve",
    "validate",
    "write_scenario",
]
