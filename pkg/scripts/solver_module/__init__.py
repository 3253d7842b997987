"""Nonlinear solution and time stepping.

This module provides tools for:
- Newton iterations with Appleyard chopping and variable switching
- Adaptive time steps over the report steps of a schedule
- Run telemetry
"""

from .monitor import SimulationMonitor
from .nonlinear import (
    NewtonConfig,
    NewtonSolver,
    ReportRecord,
    SimulationResults,
    SimulatorState,
    TimestepControl,
    run_schedule,
    solve_timestep,
)

__all__ = [
    "NewtonConfig",
    "TimestepControl",
    "NewtonSolver",
    "SimulatorState",
    "ReportRecord",
    "SimulationResults",
    "solve_timestep",
    "run_schedule",
    "SimulationMonitor",
]
