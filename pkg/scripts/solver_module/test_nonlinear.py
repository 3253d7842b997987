"""Tests for Newton time steps, the report-step scheduler and run telemetry."""

import numpy as np
import pytest

from deck_module.case_builder import build_case
from deck_module.deck_parser import parse_stage1
from numerics_module.errors import ConfigurationError, SimulationAbort
from reservoir_module.equil import equilibrate
from reservoir_module.model import BlackOilModel, PrimaryVariables, VariableMeaning
from reservoir_module.units import BAR, DAY, PSI, STB
from reservoir_module.wells import ControlMode, RateTarget, WellControl, WellSet, WellState, WellType
from solver_module.monitor import SimulationMonitor
from solver_module.nonlinear import (
    NewtonConfig,
    NewtonSolver,
    SimulatorState,
    TimestepControl,
    field_pressure,
    newton_update,
    run_schedule,
    solve_timestep,
    well_report,
)

GAS = VariableMeaning.GAS_SATURATION


def closed_box(fluid, satfunc, box_factory):
    grid, rock, connections = box_factory(dims=(3, 1, 1), compressibility=5e-10, reference_pressure=200.0 * BAR)
    model = BlackOilModel(grid, rock, fluid, satfunc, connections)
    pv = PrimaryVariables(
        np.array([230.0, 220.0, 210.0]) * BAR, np.array([0.3, 0.4, 0.5]), np.array([0.1, 0.05, 0.15]), np.full(3, GAS)
    )
    return model, pv


class TestConfiguration:
    """Validation of solver and step settings."""

    @pytest.mark.parametrize(
        "overrides",
        [
            {"tol_mb": 0.0}, {"tol_cnv": -1.0}, {"tol_control": 0.0}, {"max_iter": 0},
            {"linear_solver": "gmres"}, {"ds_max": 0.0},
        ],
    )
    def test_invalid_newton_settings(self, overrides):
        with pytest.raises(ConfigurationError):
            NewtonConfig(**overrides).validate()

    @pytest.mark.parametrize(
        "overrides",
        [{"minimum": 2.0 * DAY}, {"initial": 400.0 * DAY}, {"cut": 1.0}, {"growth": 1.0}, {"minimum": 0.0}],
    )
    def test_invalid_step_settings(self, overrides):
        with pytest.raises(ConfigurationError):
            TimestepControl(**overrides).validate()

    def test_defaults_are_valid(self):
        assert NewtonConfig().validate().tol_mb == 1e-6
        assert TimestepControl().validate().maximum == 365.0 * DAY


class TestNewtonUpdate:
    """Chopping, clamping and switching of a Newton change."""

    def test_pressure_change_is_chopped(self, dead_fluid, satfunc, box_factory):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        change = np.zeros((3, 3))
        change[:, 0] = [100.0 * BAR, -100.0 * BAR, 10.0 * BAR]
        updated, _ = newton_update(model, pv, change, NewtonConfig())
        np.testing.assert_allclose(updated.pressure, np.array([287.5, 165.0, 220.0]) * BAR)

    def test_saturation_change_is_scaled_together(self, dead_fluid, satfunc, box_factory):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        change = np.zeros((3, 3))
        change[1] = [0.0, 0.5, -0.1]
        updated, _ = newton_update(model, pv, change, NewtonConfig())
        assert updated.water_saturation[1] == pytest.approx(0.4 + 0.2)
        assert updated.x[1] == pytest.approx(0.05 - 0.04)

    def test_saturations_are_clamped(self, dead_fluid, satfunc, box_factory):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        change = np.zeros((3, 3))
        change[2] = [0.0, 0.15, 0.1]
        updated, _ = newton_update(model, pv, change, NewtonConfig())
        assert updated.water_saturation[2] == pytest.approx(0.65)
        assert updated.x[2] == pytest.approx(0.25)
        change[2] = [0.0, 0.0, -0.19]
        updated, _ = newton_update(model, pv, change, NewtonConfig())
        assert updated.x[2] == 0.0

    def test_gas_disappearance_switches_meaning(self, live_fluid, satfunc, box_factory):
        model, pv = closed_box(live_fluid, satfunc, box_factory)
        change = np.zeros((3, 3))
        change[1, 2] = -0.06
        updated, switched = newton_update(model, pv, change, NewtonConfig())
        assert switched == 1
        assert updated.meaning[1] == VariableMeaning.DISSOLVED_GAS
        assert updated.x[1] < live_fluid.saturated_rs(220.0 * BAR)


class TestTimestep:
    """Single implicit steps on a closed box."""

    @pytest.mark.parametrize("linear_solver", ["bicgstab", "direct"])
    def test_closed_system_conserves_mass(self, dead_fluid, satfunc, box_factory, linear_solver):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        config = NewtonConfig(linear_solver=linear_solver, linear_tol=1e-10)
        result = solve_timestep(model, SimulatorState(pv), WellSet([], model.pore_volume), DAY, config)
        assert result.converged
        assert 1 <= result.iterations <= config.max_iter
        before, after = model.in_place(pv), model.in_place(result.state.primary)
        np.testing.assert_allclose(after, before, rtol=1e-4)
        assert np.ptp(result.state.primary.pressure) < np.ptp(pv.pressure)

    def test_state_at_rest_needs_no_iteration(self, live_fluid, satfunc, box_factory):
        model, _ = closed_box(live_fluid, satfunc, box_factory)
        pv = PrimaryVariables(np.full(3, 200.0 * BAR), np.full(3, 0.3), np.full(3, 0.1), np.full(3, GAS))
        grid = model.grid
        assert not np.any(grid.cell_depth - grid.cell_depth[0])
        result = solve_timestep(model, SimulatorState(pv), WellSet([], model.pore_volume), 10.0 * DAY)
        assert result.converged and result.iterations == 0

    def test_failed_step_returns_start_state(self, dead_fluid, satfunc, box_factory):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        state0 = SimulatorState(pv)
        config = NewtonConfig(tol_mb=1e-300, tol_cnv=1e-300, max_iter=2, linear_solver="direct")
        result = NewtonSolver(model, config).solve_timestep(state0, WellSet([], model.pore_volume), DAY)
        assert not result.converged
        assert result.state is state0
        assert "limit" in result.reason
        np.testing.assert_array_equal(state0.primary.pressure, pv.pressure)

    def test_non_positive_step(self, dead_fluid, satfunc, box_factory):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        with pytest.raises(ValueError):
            solve_timestep(model, SimulatorState(pv), WellSet([], model.pore_volume), -1.0)


class TestEquilibrium:
    """An equilibrated column without wells stays at rest."""

    def test_initial_residual_vanishes(self, case_loader):
        case = case_loader("COLUMN")
        model = BlackOilModel(case.grid, case.rock, case.fluid, case.satfunc, case.connections)
        initial = equilibrate(model.grid.cell_depth, case.equil, case.fluid, case.satfunc, case.rsvd)
        accumulation = model.accumulation(initial.primary)
        residual = model.residual(initial.primary, accumulation, DAY)
        scale = model.pore_volume.max() / DAY * np.abs(accumulation).max()
        assert np.abs(residual).max() < 1e-8 * scale

    def test_schedule_keeps_state(self, case_loader):
        case = case_loader("COLUMN")
        records = []
        results = run_schedule(case, on_report=lambda record, state: records.append((record, state.primary.copy())))
        assert [record.step for record, _ in records] == list(range(11))
        assert results.records[-1].time == pytest.approx(100.0 * DAY)
        initial, final = records[0][1], records[-1][1]
        assert np.abs(final.water_saturation - initial.water_saturation).max() < 1e-8
        assert np.abs(final.x - initial.x)[final.has_free_gas].max() < 1e-8
        telemetry = results.telemetry
        assert telemetry["cut_steps"] == 0
        assert telemetry["newton_iterations"] <= telemetry["accepted_steps"]


class TestSchedule:
    """Report steps with wells."""

    def test_mini_producer(self, case_loader):
        results = run_schedule(case_loader("MINI"))
        assert len(results.records) == 2
        final = results.records[-1]
        assert final.time == pytest.approx(10.0 * DAY)
        prod = final.well_rates["PROD"]
        assert prod["WBHP"] == pytest.approx(2500.0 * PSI)
        assert prod["WOPR"] > 0.0
        assert final.field_rates["FOPR"] == pytest.approx(prod["WOPR"])
        assert final.field_pressure < results.records[0].field_pressure
        assert abs(results.material_balance["water"]) < 1e-3
        assert abs(results.material_balance["oil"]) < 1e-3
        assert results.final_state.wells["PROD"].control.mode == ControlMode.BHP

    def test_step_below_minimum_aborts(self, case_loader):
        config = NewtonConfig(tol_mb=1e-300, tol_cnv=1e-300, max_iter=1)
        timestep = TimestepControl(initial=DAY, minimum=0.9 * DAY)
        with pytest.raises(SimulationAbort) as info:
            run_schedule(case_loader("MINI"), config, timestep)
        assert info.value.report["report_step"] == 1
        assert info.value.report["time_days"] == 0.0


class TestBundledSchedules:
    """Full runs of the gas injection and rate window decks."""

    def test_gas_injection_frees_gas(self, schedule_runner):
        results, states = schedule_runner("SPE1")
        assert np.all(states[0].primary.meaning == VariableMeaning.DISSOLVED_GAS)
        assert np.any(states[-1].primary.meaning == GAS)
        assert results.telemetry["variable_switches"] > 0

    def test_producer_gor_rises_after_breakthrough(self, schedule_runner):
        results, _ = schedule_runner("SPE1")
        gor = np.array([record.well_rates["PROD"]["WGOR"] for record in results.records[1:]])
        breakthrough = np.flatnonzero(gor > 1.5 * gor[0])
        assert breakthrough.size > 0
        after = gor[breakthrough[0]:]
        assert np.all(np.diff(after) >= -0.01 * after[:-1])

    def test_controls_respect_limits(self, case_loader, schedule_runner):
        results, states = schedule_runner("SPE1")
        assert [(e["well"], e["from"], e["to"]) for e in results.control_events] == [("PROD", "RATE", "BHP")]
        controls = {spec.name: spec.control for spec in case_loader("SPE1").schedule[0].wells}
        for state in states[results.control_events[0]["report_step"]:]:
            assert state.wells["PROD"].control.mode == ControlMode.BHP
            assert state.wells["PROD"].bhp == pytest.approx(controls["PROD"].bhp_limit, rel=1e-6)
        for record in results.records[1:]:
            prod, inj = record.well_rates["PROD"], record.well_rates["INJ"]
            assert prod["WOPR"] <= controls["PROD"].rate_limit * (1.0 + 1e-6)
            assert prod["WBHP"] >= controls["PROD"].bhp_limit * (1.0 - 1e-6)
            assert inj["WGIR"] <= controls["INJ"].rate_limit * (1.0 + 1e-6)
            assert inj["WBHP"] <= controls["INJ"].bhp_limit * (1.0 + 1e-6)

    def test_rate_window(self, schedule_runner):
        results, states = schedule_runner("RATEDROP")
        targets = [1500.0, 1500.0, 100.0, 100.0, 1500.0, 1500.0]
        oil = [record.well_rates["PROD"]["WOPR"] / (STB / DAY) for record in results.records[1:]]
        for rate, state, target, record in zip(oil, states[1:], targets, results.records[1:]):
            if state.wells["PROD"].control.mode == ControlMode.RATE:
                assert rate == pytest.approx(target, rel=1e-6)
            else:
                assert rate <= target * (1.0 + 1e-6)
                assert record.well_rates["PROD"]["WBHP"] == pytest.approx(1000.0 * PSI, rel=1e-6)
        assert oil[:2] == pytest.approx([1500.0, 1500.0], rel=1e-6)
        assert oil[2:4] == pytest.approx([100.0, 100.0], rel=1e-6)
        assert oil[4] > 5.0 * oil[3]

    def test_switched_injector_stays_switched(self, schedule_runner):
        results, _ = schedule_runner("RATEDROP")
        events = [e for e in results.control_events if e["well"] == "INJ"]
        assert (events[0]["report_step"], events[0]["from"], events[0]["to"]) == (1, "RATE", "BHP")
        for before, after in zip(events, events[1:]):
            assert after["from"] == before["to"]

    def test_shut_in_conserves_components(self, decks_dir):
        text = (decks_dir / "RATEDROP.DATA").read_text(encoding="utf-8")
        injection = text[: text.index("WCONPROD\n 'PROD' 'OPEN' 'ORAT' 100 ")]
        shut = (
            "WCONPROD\n 'PROD' 'SHUT' 'ORAT' 1500 4* 1000 /\n/\n"
            "WCONINJE\n 'INJ' 'WATER' 'SHUT' 'RATE' 2000 1* 6000 /\n/\n"
            "TSTEP\n 3*20 /\nEND\n"
        )
        case = build_case(parse_stage1(injection + shut, base_dir=decks_dir), "SHUTIN")
        assert [len(step.wells) for step in case.schedule] == [2, 2, 0, 0, 0]
        model = BlackOilModel(case.grid, case.rock, case.fluid, case.satfunc, case.connections)
        in_place = []
        run_schedule(
            case,
            timestep=TimestepControl(maximum=20.0 * DAY),
            model=model,
            on_report=lambda record, state: in_place.append(model.in_place(state.primary)),
        )
        after = np.array(in_place[2:])
        change = np.abs(np.diff(after, axis=0)) / after[:-1]
        assert change.max() < 10.0 * NewtonConfig().tol_mb

class TestReporting:
    """Well and field summary quantities."""

    def test_producer_report(self):
        control = WellControl(ControlMode.BHP, RateTarget.OIL, None, 100.0 * BAR)
        report = well_report("P", WellState(0.02, 0.25, 0.25, 100.0 * BAR, control), WellType.PRODUCER)
        assert report["WOPR"] == pytest.approx(0.01)
        assert report["WWPR"] == pytest.approx(0.005)
        assert report["WGOR"] == pytest.approx(report["WGPR"] / report["WOPR"])
        assert report["WWIR"] == 0.0 and report["WGIR"] == 0.0

    def test_injector_report(self):
        control = WellControl(ControlMode.RATE, RateTarget.WATER, 0.01, 400.0 * BAR)
        report = well_report("I", WellState(-0.01, 1.0, 0.0, 300.0 * BAR, control), WellType.INJECTOR)
        assert report["WWIR"] == pytest.approx(0.01)
        assert report["WOPR"] == 0.0 and report["WGOR"] == 0.0

    def test_field_pressure_is_pore_volume_weighted(self, dead_fluid, satfunc, box_factory):
        model, pv = closed_box(dead_fluid, satfunc, box_factory)
        assert field_pressure(model, pv) == pytest.approx(220.0 * BAR)


class TestMonitor:
    """Telemetry bookkeeping."""

    def test_summary_ratios(self):
        monitor = SimulationMonitor()
        monitor.record_newton_iteration(10)
        monitor.record_newton_iteration(20)
        monitor.record_step(accepted=True)
        monitor.record_step(accepted=False)
        monitor.record_switches(variables=3, controls=1)
        monitor.record_section("assembly", 0.25)
        monitor.record_section("assembly", 0.25)
        summary = monitor.get_summary()
        assert summary["newton_per_step"] == 2.0
        assert summary["linear_per_newton"] == 15.0
        assert summary["cut_steps"] == 1
        assert summary["variable_switches"] == 3
        assert summary["section_times_seconds"]["assembly"] == 0.5

    def test_print_summary(self, capsys):
        monitor = SimulationMonitor()
        monitor.start_timer()
        monitor.end_timer()
        monitor.print_summary()
        assert "Newton iterations: 0" in capsys.readouterr().out
