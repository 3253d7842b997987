"""Run telemetry: iteration counts, time-step cuts and where the wall time went."""

import time
from typing import Any


class SimulationMonitor:
    """Monitor and track simulator performance metrics."""

    def __init__(self):
        self.metrics = {
            "newton_iterations": 0,
            "linear_iterations": 0,
            "accepted_steps": 0,
            "cut_steps": 0,
            "variable_switches": 0,
            "control_switches": 0,
            "section_times": {},
            "total_start_time": None,
            "total_end_time": None,
        }

    def start_timer(self):
        """Start overall timer."""
        self.metrics["total_start_time"] = time.perf_counter()

    def end_timer(self):
        """End overall timer."""
        self.metrics["total_end_time"] = time.perf_counter()

    def record_section(self, section: str, duration: float):
        """Accumulate wall time spent in a named section (assembly, linear solve, ...)."""
        times = self.metrics["section_times"]
        times[section] = times.get(section, 0.0) + duration

    def record_newton_iteration(self, linear_iterations: int):
        self.metrics["newton_iterations"] += 1
        self.metrics["linear_iterations"] += linear_iterations

    def record_step(self, accepted: bool):
        key = "accepted_steps" if accepted else "cut_steps"
        self.metrics[key] += 1

    def record_switches(self, variables: int = 0, controls: int = 0):
        self.metrics["variable_switches"] += variables
        self.metrics["control_switches"] += controls

    def get_summary(self) -> dict[str, Any]:
        """Get performance summary."""
        total_time = 0.0
        if self.metrics["total_start_time"] is not None and self.metrics["total_end_time"] is not None:
            total_time = self.metrics["total_end_time"] - self.metrics["total_start_time"]

        accepted = self.metrics["accepted_steps"]
        newton = self.metrics["newton_iterations"]
        return {
            "total_execution_time_seconds": round(total_time, 2),
            "accepted_steps": accepted,
            "cut_steps": self.metrics["cut_steps"],
            "newton_iterations": newton,
            "linear_iterations": self.metrics["linear_iterations"],
            "newton_per_step": round(newton / max(1, accepted), 2),
            "linear_per_newton": round(self.metrics["linear_iterations"] / max(1, newton), 2),
            "variable_switches": self.metrics["variable_switches"],
            "control_switches": self.metrics["control_switches"],
            "section_times_seconds": {
                name: round(seconds, 2) for name, seconds in self.metrics["section_times"].items()
            },
        }

    def print_summary(self):
        """Print performance summary."""
        summary = self.get_summary()
        print("\n   📊 Simulator Performance Metrics:")
        print(f"   - Total execution time: {summary['total_execution_time_seconds']}s")
        print(f"   - Time steps: {summary['accepted_steps']} accepted, {summary['cut_steps']} cut")
        print(f"   - Newton iterations: {summary['newton_iterations']} ({summary['newton_per_step']} per step)")
        print(f"   - Linear iterations: {summary['linear_iterations']} ({summary['linear_per_newton']} per Newton)")
        print("   - Wall time by section:")
        for name, seconds in summary["section_times_seconds"].items():
            print(f"     • {name}: {seconds}s")
