"""Newton-Raphson time stepping with Appleyard chopping and adaptive step control.

One time step solves J(y_n)(y_{n+1} − y_n) = −R(y_n) until the mass-balance, local
(CNV) and well residual norms are below tolerance. A failed step never touches the
accepted state; the scheduler cuts the step and tries again.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.sparse.linalg import spsolve

from numerics_module.errors import ConfigurationError, NumericalError, SimulationAbort
from numerics_module.linalg import bicgstab, ilu0_apply, ilu0_factor
from reservoir_module.equil import Equilibrator
from reservoir_module.model import (
    NUM_EQUATIONS,
    SWITCH_THRESHOLD,
    BlackOilModel,
    PrimaryVariables,
    VariableMeaning,
)
from reservoir_module.pvt import Phase
from reservoir_module.units import DAY
from reservoir_module.wells import (
    StandardWell,
    WellSet,
    WellState,
    WellType,
    recover_well_solution,
    schur_reduce,
)

from .monitor import SimulationMonitor

logger = logging.getLogger(__name__)

LINEAR_SOLVERS = ("bicgstab", "direct")


@dataclass
class NewtonConfig:
    """Tolerances and update limits of the Newton loop."""

    tol_mb: float = 1e-6
    tol_cnv: float = 1e-2
    tol_wells: float = 1e-4
    tol_control: float = 1e-6  # relative residual of a well control equation
    max_iter: int = 15
    ds_max: float = 0.2
    dp_max_rel: float = 0.25
    linear_solver: str = "bicgstab"
    linear_tol: float = 1e-3
    linear_maxiter: int = 200

    def validate(self) -> "NewtonConfig":
        """Raises ConfigurationError when a setting is out of range."""
        for name in ("tol_mb", "tol_cnv", "tol_wells", "tol_control", "ds_max", "dp_max_rel", "linear_tol"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iter < 1 or self.linear_maxiter < 1:
            raise ConfigurationError("iteration limits must be at least 1")
        if self.linear_solver not in LINEAR_SOLVERS:
            raise ConfigurationError(
                f"unknown linear solver '{self.linear_solver}', expected one of {LINEAR_SOLVERS}"
            )
        return self


@dataclass
class TimestepControl:
    """Adaptive step sizes in seconds."""

    initial: float = 1.0 * DAY
    minimum: float = 1e-4 * DAY
    maximum: float = 365.0 * DAY
    growth: float = 2.0
    cut: float = 0.5

    def validate(self) -> "TimestepControl":
        if not 0.0 < self.minimum <= self.initial <= self.maximum:
            raise ConfigurationError(
                f"time steps must satisfy 0 < min ({self.minimum:g}) <= initial ({self.initial:g}) "
                f"<= max ({self.maximum:g}) seconds"
            )
        if not 0.0 < self.cut < 1.0 < self.growth:
            raise ConfigurationError("time step control needs 0 < cut < 1 < growth")
        return self


@dataclass
class SimulatorState:
    """Accepted solution: cell unknowns and the unknowns of every well seen so far."""

    primary: PrimaryVariables
    wells: dict[str, WellState] = field(default_factory=dict)

    def copy(self) -> "SimulatorState":
        return SimulatorState(self.primary.copy(), {name: s.copy() for name, s in self.wells.items()})


@dataclass
class StepResult:
    state: SimulatorState
    converged: bool
    iterations: int
    linear_iterations: int = 0
    reason: str = ""


@dataclass
class ReportRecord:
    """Quantities at the end of one report step (SI units)."""

    step: int
    time: float
    field_pressure: float
    well_rates: dict[str, dict[str, float]]
    field_rates: dict[str, float]
    newton_iterations: int = 0
    linear_iterations: int = 0
    cuts: int = 0


@dataclass
class SimulationResults:
    records: list[ReportRecord] = field(default_factory=list)
    control_events: list[dict[str, Any]] = field(default_factory=list)
    material_balance: dict[str, float] = field(default_factory=dict)
    telemetry: dict[str, Any] = field(default_factory=dict)
    final_state: SimulatorState | None = None


def newton_update(
    model: BlackOilModel,
    primary: PrimaryVariables,
    change: np.ndarray,
    config: NewtonConfig,
) -> tuple[PrimaryVariables, int]:
    """Apply a chopped Newton change, then switch variables and clamp.

    Args:
        model: Supplies the saturated dissolved gas-oil ratio
        primary: Current unknowns
        change: Signed change per cell, shape (n, 3)
        config: Chop limits

    Returns:
        New unknowns and the number of switched cells
    """
    change = np.asarray(change, dtype=float).reshape(-1, NUM_EQUATIONS)
    free_gas = primary.has_free_gas
    dp = change[:, 0]
    dsw = change[:, 1].copy()
    dx = change[:, 2].copy()

    limit = config.dp_max_rel * np.abs(primary.pressure)
    dp = np.clip(dp, -limit, limit)

    dsg = np.where(free_gas, dx, 0.0)
    largest = np.maximum(np.abs(dsw), np.abs(dsg))
    factor = np.where(largest > config.ds_max, config.ds_max / np.where(largest > 0.0, largest, 1.0), 1.0)
    dsw *= factor
    dx = np.where(free_gas, dx * factor, dx)

    updated = PrimaryVariables(
        primary.pressure + dp,
        primary.water_saturation + dsw,
        primary.x + dx,
        primary.meaning.copy(),
    )

    # do not jump far across the saturated/undersaturated boundary
    updated.x = np.where(free_gas, np.maximum(updated.x, -2.0 * SWITCH_THRESHOLD), updated.x)
    if model.fluid.has_dissolved_gas:
        rs = np.asarray(model.fluid.saturated_rs(updated.pressure), dtype=float)
        ceiling = rs * (1.0 + 2.0 * SWITCH_THRESHOLD)
        updated.x = np.where(free_gas, updated.x, np.clip(updated.x, 0.0, ceiling))

    updated, switched = model.switch_variables(updated)

    updated.water_saturation = np.clip(updated.water_saturation, 0.0, 1.0)
    gas = updated.meaning == VariableMeaning.GAS_SATURATION
    updated.x = np.where(gas, np.clip(updated.x, 0.0, 1.0 - updated.water_saturation), updated.x)
    return updated, switched


class NewtonSolver:
    """Solves single time steps of one model."""

    def __init__(
        self,
        model: BlackOilModel,
        config: NewtonConfig | None = None,
        monitor: SimulationMonitor | None = None,
    ):
        self.model = model
        self.config = (config or NewtonConfig()).validate()
        self.monitor = monitor or SimulationMonitor()

    def _converged(self, metrics: dict[str, np.ndarray], well_metrics: tuple[float, float]) -> bool:
        balance, control = well_metrics
        return bool(
            np.all(metrics["mb"] < self.config.tol_mb)
            and np.all(metrics["cnv"] < self.config.tol_cnv)
            and balance < self.config.tol_wells
            and control < self.config.tol_control
        )

    def _linear_solve(self, system) -> tuple[np.ndarray, list[np.ndarray], int, bool]:
        reduced = schur_reduce(system.jacobian, system.wells)
        rhs = reduced.reduce_rhs(system.residual)
        if self.config.linear_solver == "direct":
            x = spsolve(reduced.to_scipy().tocsc(), rhs)
            iterations, converged = 1, bool(np.all(np.isfinite(x)))
        else:
            factors = ilu0_factor(reduced.preconditioner_matrix())
            result = bicgstab(
                reduced,
                rhs,
                preconditioner=lambda r: ilu0_apply(factors, r),
                tol=self.config.linear_tol,
                maxiter=self.config.linear_maxiter,
            )
            x, iterations, converged = result.x, result.iterations, result.converged
            if not converged:
                logger.info(
                    "linear solver stopped after %d iterations, residual %.3e (%d breakdowns)",
                    iterations, result.residual_norm, result.breakdowns,
                )
        return x, recover_well_solution(reduced, x), iterations, converged

    def solve_timestep(self, state0: SimulatorState, wells: WellSet, dt: float) -> StepResult:
        """Advance the accepted state by ``dt`` seconds.

        Returns:
            StepResult; on failure ``state`` is ``state0`` itself, unmodified
        """
        if dt <= 0.0:
            raise ValueError(f"time step must be positive, got {dt}")
        model = self.model
        accumulation0 = model.accumulation(state0.primary)
        context = wells.prepare_step(state0.wells, model.update_secondary(state0.primary))
        primary = state0.primary.copy()
        linear_total = 0

        for iteration in range(self.config.max_iter + 1):
            started = time.perf_counter()
            try:
                secondary = model.update_secondary(primary)
                system = model.assemble(secondary, accumulation0, dt, wells, context)
            except NumericalError as error:
                return self._failed(state0, iteration, linear_total, f"assembly: {error}")
            if not np.all(np.isfinite(system.residual)) or any(
                not np.all(np.isfinite(block.residual)) for block in system.wells
            ):
                return self._failed(state0, iteration, linear_total, "non-finite residual")
            self.monitor.record_section("assembly", time.perf_counter() - started)

            fvf = model.average_fvf(secondary)
            metrics = model.convergence_metrics(system.residual, secondary, dt)
            well_metrics = wells.residual_metric(system.wells, context, fvf, dt) if len(wells) else (0.0, 0.0)
            logger.info(
                "  newton %2d  MB %s  CNV %s  wells %.2e  control %.2e",
                iteration, _fmt(metrics["mb"]), _fmt(metrics["cnv"]), *well_metrics,
            )

            if self._converged(metrics, well_metrics):
                # verify controls once more at the converged solution
                switched = wells.switch_controls(context)
                self.monitor.record_switches(controls=switched)
                if not switched:
                    state = SimulatorState(primary, dict(state0.wells))
                    state.wells.update({name: step.state for name, step in context.items()})
                    return StepResult(state, True, iteration, linear_total)
                continue
            if iteration == self.config.max_iter:
                break

            started = time.perf_counter()
            try:
                x_reservoir, x_wells, linear_iterations, linear_ok = self._linear_solve(system)
            except NumericalError as error:
                return self._failed(state0, iteration, linear_total, f"linear solve: {error}")
            self.monitor.record_section("linear_solve", time.perf_counter() - started)
            self.monitor.record_newton_iteration(linear_iterations)
            linear_total += linear_iterations
            if not linear_ok:
                return self._failed(state0, iteration, linear_total, "linear solver did not converge")

            primary, switched = newton_update(model, primary, -x_reservoir.reshape(-1, NUM_EQUATIONS), self.config)
            for well, x_well in zip(wells, x_wells):
                step = context[well.name]
                step.state = well.apply_update(step.state, -x_well, self.config.dp_max_rel)
            controls = wells.switch_controls(context)
            self.monitor.record_switches(variables=switched, controls=controls)

        return self._failed(state0, self.config.max_iter, linear_total, "Newton iteration limit reached")

    def _failed(self, state0: SimulatorState, iterations: int, linear: int, reason: str) -> StepResult:
        logger.info("  step failed: %s", reason)
        return StepResult(state0, False, iterations, linear, reason)


def _fmt(values: np.ndarray) -> str:
    return "[" + " ".join(f"{v:.2e}" for v in values) + "]"


def solve_timestep(
    model: BlackOilModel,
    state0: SimulatorState,
    wells: WellSet,
    dt: float,
    config: NewtonConfig | None = None,
) -> StepResult:
    """Functional form of ``NewtonSolver.solve_timestep``."""
    return NewtonSolver(model, config).solve_timestep(state0, wells, dt)


def well_report(name: str, state: WellState, well_type: WellType) -> dict[str, float]:
    """Summary quantities of one well (SI, production and injection both positive)."""
    q_w, q_o, q_g = state.surface_rates
    producer = well_type == WellType.PRODUCER
    return {
        "WBHP": state.bhp,
        "WOPR": max(q_o, 0.0) if producer else 0.0,
        "WWPR": max(q_w, 0.0) if producer else 0.0,
        "WGPR": max(q_g, 0.0) if producer else 0.0,
        "WGOR": q_g / q_o if producer and q_o > 0.0 else 0.0,
        "WWIR": max(-q_w, 0.0) if not producer else 0.0,
        "WGIR": max(-q_g, 0.0) if not producer else 0.0,
    }


def field_pressure(model: BlackOilModel, primary: PrimaryVariables) -> float:
    """Pore-volume weighted average oil pressure."""
    return float(np.sum(model.pore_volume * primary.pressure) / np.sum(model.pore_volume))


def run_schedule(
    case: Any,
    config: NewtonConfig | None = None,
    timestep: TimestepControl | None = None,
    on_report: Callable[[ReportRecord, SimulatorState], None] | None = None,
    monitor: SimulationMonitor | None = None,
    model: BlackOilModel | None = None,
) -> SimulationResults:
    """Equilibrate a case and advance it through all report steps.

    Args:
        case: Resolved simulation case (grid, fluids, equilibration, schedule)
        config: Newton settings
        timestep: Adaptive step settings
        on_report: Called after equilibration (step 0) and after every report step
        monitor: Telemetry sink
        model: Prebuilt model for the case, built when omitted

    Raises:
        SimulationAbort: the step was cut below the minimum
    """
    timestep = (timestep or TimestepControl()).validate()
    monitor = monitor or SimulationMonitor()
    model = model or BlackOilModel(case.grid, case.rock, case.fluid, case.satfunc, case.connections)
    solver = NewtonSolver(model, config, monitor)
    monitor.start_timer()

    initial = Equilibrator(case.fluid, case.satfunc, case.rsvd).equilibrate(model.grid.cell_depth, case.equil)
    state = SimulatorState(initial.primary)
    results = SimulationResults()
    in_place0 = model.in_place(state.primary)
    produced = np.zeros(NUM_EQUATIONS)  # net surface volume leaving through wells
    storage_change = np.zeros(NUM_EQUATIONS)

    record = ReportRecord(0, 0.0, field_pressure(model, state.primary), {}, _field_rates({}))
    results.records.append(record)
    if on_report is not None:
        on_report(record, state)

    current, dt = 0.0, timestep.initial
    for index, report in enumerate(case.schedule, start=1):
        wells = WellSet([StandardWell(spec, case.fluid) for spec in report.wells], model.pore_volume)
        types = {spec.name: spec.well_type for spec in report.wells}
        values = model.update_secondary(state.primary).values()
        for well in wells:
            # a switched mode stays until the deck gives the well a new control
            if well.name not in state.wells:
                state.wells[well.name] = well.initial_state(values.take(well.cells), well.spec.control)
            elif well.name in report.reissued:
                state.wells[well.name].control = well.spec.control
        modes = {name: s.control.mode for name, s in state.wells.items() if name in types}

        end = current + report.length
        newton = linear = cuts = 0
        while current < end:
            remaining = end - current
            step = min(dt, remaining)
            logger.info("report %d: trying step %.6g days at t = %.6g days", index, step / DAY, current / DAY)
            result = solver.solve_timestep(state, wells, step)
            newton += result.iterations
            linear += result.linear_iterations
            if not result.converged:
                cuts += 1
                monitor.record_step(accepted=False)
                dt = step * timestep.cut
                logger.info("report %d: step cut to %.6g days (%s)", index, dt / DAY, result.reason)
                if dt < timestep.minimum:
                    raise SimulationAbort(
                        f"time step {dt / DAY:.3g} days below minimum {timestep.minimum / DAY:.3g} days "
                        f"at t = {current / DAY:.6g} days",
                        report={"report_step": index, "time_days": current / DAY, "reason": result.reason},
                    )
                continue

            for well in wells:
                old, new = state.wells[well.name], result.state.wells[well.name]
                before = well.storage(old.water_fraction, old.gas_fraction, old.bhp)
                after = well.storage(new.water_fraction, new.gas_fraction, new.bhp)
                storage_change += np.array([float(a - b) for a, b in zip(after, before)])
                produced += np.array(new.surface_rates) * step
            state = result.state
            current = end if step == remaining else current + step
            monitor.record_step(accepted=True)
            dt = min(step * timestep.growth, timestep.maximum)
            logger.info("report %d: accepted step, t = %.6g days, %d newton", index, current / DAY, result.iterations)

        for name, mode in modes.items():
            if state.wells[name].control.mode != mode:
                results.control_events.append({
                    "well": name, "report_step": index, "time_days": current / DAY,
                    "from": mode.value, "to": state.wells[name].control.mode.value,
                })

        well_rates = {name: well_report(name, state.wells[name], types[name]) for name in types}
        record = ReportRecord(
            step=index,
            time=current,
            field_pressure=field_pressure(model, state.primary),
            well_rates=well_rates,
            field_rates=_field_rates(well_rates),
            newton_iterations=newton,
            linear_iterations=linear,
            cuts=cuts,
        )
        results.records.append(record)
        if on_report is not None:
            on_report(record, state)

    monitor.end_timer()
    change = model.in_place(state.primary) - in_place0
    error = (change + storage_change + produced) / np.maximum(np.abs(in_place0), 1e-30)
    results.material_balance = {phase.name.lower(): float(error[phase]) for phase in Phase}
    logger.info("material balance error per component: %s", results.material_balance)
    results.telemetry = monitor.get_summary()
    results.final_state = state
    return results


def _field_rates(well_rates: dict[str, dict[str, float]]) -> dict[str, float]:
    totals = {"FOPR": 0.0, "FWPR": 0.0, "FGPR": 0.0, "FWIR": 0.0, "FGIR": 0.0}
    for rates in well_rates.values():
        totals["FOPR"] += rates["WOPR"]
        totals["FWPR"] += rates["WWPR"]
        totals["FGPR"] += rates["WGPR"]
        totals["FWIR"] += rates["WWIR"]
        totals["FGIR"] += rates["WGIR"]
    return totals
