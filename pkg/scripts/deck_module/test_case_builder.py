"""Tests for resolving parsed decks into simulation cases."""

import pytest

from deck_module.case_builder import DEFAULT_PRODUCER_BHP, build_case
from deck_module.deck_parser import parse_stage1
from numerics_module.errors import DeckError
from reservoir_module.units import DAY, MSCF, PSI, STB
from reservoir_module.wells import ControlMode, RateTarget, WellType


def edited_case(decks_dir, name, *replacements):
    """Build a bundled deck after plain text substitutions."""
    text = (decks_dir / f"{name}.DATA").read_text(encoding="utf-8")
    for old, new in replacements:
        assert old in text
        text = text.replace(old, new)
    return build_case(parse_stage1(text, base_dir=decks_dir), name)


class TestMiniCase:
    """The smallest bundled deck."""

    def test_describe(self, case_loader):
        case = case_loader("MINI")
        summary = case.describe()
        assert summary["units"] == "FIELD"
        assert summary["dims"] == [3, 3, 1]
        assert summary["active_cells"] == 9
        assert summary["dissolved_gas"] is False
        assert summary["summary"] == ["WBHP:PROD", "WOPR:PROD", "FPR"]
        (step,) = summary["report_steps"]
        assert step["days"] == pytest.approx(10.0)
        prod = step["wells"]["PROD"]
        assert prod["type"] == "PRODUCER"
        assert prod["mode"] == "BHP"
        assert prod["bhp_limit"] == pytest.approx(2500.0 * PSI)
        assert prod["cells"] == [case.grid.active_index[case.grid.global_index(1, 1, 0)]]

    def test_si_conversion(self, case_loader):
        case = case_loader("MINI")
        assert case.total_time == pytest.approx(10.0 * DAY)
        assert case.equil.datum_pressure == pytest.approx(3000.0 * PSI)
        assert case.rock.compressibility == pytest.approx(4.0e-6 / PSI)
        assert case.title.startswith("MINI")

    def test_zero_porosity_cells_are_inactive(self, decks_dir):
        case = edited_case(decks_dir, "MINI", ("9*0.2", "8*0.2 0"))
        assert case.grid.num_cells == 8
        assert len(case.rock.porosity) == 8

    def test_later_control_replaces_earlier(self, decks_dir):
        case = edited_case(
            decks_dir, "MINI",
            ("TSTEP", "WCONPROD\n 'PROD' 'OPEN' 'ORAT' 300 4* 1500 /\n/\nTSTEP"),
        )
        control = case.schedule[0].wells[0].control
        assert control.mode == ControlMode.RATE
        assert control.rate_target == RateTarget.OIL
        assert control.rate_limit == pytest.approx(300.0 * STB / DAY)
        assert control.bhp_limit == pytest.approx(1500.0 * PSI)

    def test_default_bhp_limit(self, decks_dir):
        case = edited_case(decks_dir, "MINI", ("'BHP' 5* 2500", "'ORAT' 300"))
        assert case.schedule[0].wells[0].control.bhp_limit == DEFAULT_PRODUCER_BHP

    def test_shut_well_is_not_open(self, decks_dir):
        case = edited_case(decks_dir, "MINI", ("'PROD' 'OPEN' 'BHP'", "'PROD' 'SHUT' 'BHP'"))
        assert case.schedule[0].wells == ()


class TestScheduleFolding:
    """Report steps carry the controls in force."""

    def test_spe1_controls(self, case_loader):
        case = case_loader("SPE1")
        assert len(case.schedule) == 40
        assert case.total_time == pytest.approx(40 * 91.25 * DAY)
        wells = {spec.name: spec for spec in case.schedule[0].wells}
        injector, producer = wells["INJ"], wells["PROD"]
        assert injector.well_type == WellType.INJECTOR
        assert injector.control.rate_target == RateTarget.GAS
        assert injector.control.rate_limit == pytest.approx(100000.0 * MSCF / DAY)
        assert injector.control.bhp_limit == pytest.approx(9014.0 * PSI)
        assert producer.control.rate_limit == pytest.approx(20000.0 * STB / DAY)
        assert producer.control.bhp_limit == pytest.approx(1000.0 * PSI)
        assert case.fluid.has_dissolved_gas
        assert case.rsvd is not None
        assert case.start == "1 JAN 2015"

    def test_rate_window(self, case_loader):
        case = case_loader("RATEDROP")
        rates = [
            {spec.name: spec.control.rate_limit for spec in step.wells}["PROD"] / (STB / DAY)
            for step in case.schedule
        ]
        assert rates == pytest.approx([1500.0, 1500.0, 100.0, 100.0, 1500.0, 1500.0])
        assert case.well_names == ["PROD", "INJ"]

    def test_reissued_controls(self, case_loader):
        case = case_loader("RATEDROP")
        assert [step.reissued for step in case.schedule] == [
            {"PROD", "INJ"}, set(), {"PROD"}, set(), {"PROD"}, set(),
        ]
        assert [step.reissued for step in case_loader("SPE1").schedule[1:]] == [set()] * 39

    def test_summary_lists_every_well_for_empty_record(self, case_loader):
        case = case_loader("RATEDROP")
        assert ("WBHP", "PROD") in case.summary and ("WBHP", "INJ") in case.summary


class TestErrors:
    """Stage-2 errors name the keyword and where it is."""

    def test_layer_range(self, decks_dir):
        with pytest.raises(DeckError, match="invalid layer range 2..1"):
            edited_case(decks_dir, "MINI", ("'PROD' 2 2 1  1", "'PROD' 2 2 2  1"))

    def test_undefined_well(self, decks_dir):
        with pytest.raises(DeckError, match="well 'INJ' is not defined by WELSPECS"):
            edited_case(decks_dir, "MINI", ("'PROD' 2 2 1  1", "'INJ' 2 2 1  1"))

    def test_live_oil_needs_disgas(self, decks_dir):
        with pytest.raises(DeckError, match="need DISGAS"):
            edited_case(decks_dir, "COLUMN", ("DISGAS\n", ""))

    def test_conflicting_unit_systems(self, decks_dir):
        with pytest.raises(DeckError, match="both FIELD and METRIC"):
            edited_case(decks_dir, "MINI", ("FIELD\n", "FIELD\nMETRIC\n"))

    def test_missing_section(self, decks_dir):
        with pytest.raises(DeckError, match="required section SOLUTION is missing"):
            edited_case(
                decks_dir, "MINI", ("SOLUTION\n", ""), ("EQUIL\n 5010 3000 5100 0 4900 0 /\n", "")
            )

    def test_array_size(self, decks_dir):
        with pytest.raises(DeckError, match="expected 9 values, got 8") as info:
            edited_case(decks_dir, "MINI", ("9*0.2", "8*0.2"))
        assert info.value.line is not None

    def test_rate_mode_needs_rate(self, decks_dir):
        with pytest.raises(DeckError, match="needs its rate item"):
            edited_case(decks_dir, "MINI", ("'BHP' 5* 2500", "'ORAT' 5* 2500"))

    def test_non_positive_report_step(self, decks_dir):
        with pytest.raises(DeckError, match="must be positive"):
            edited_case(decks_dir, "MINI", ("TSTEP\n 10 /", "TSTEP\n -5 /"))
