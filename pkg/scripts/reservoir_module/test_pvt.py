"""Tests for tables and black-oil PVT."""

import logging

import numpy as np
import pytest

from numerics_module.autodiff import Evaluation
from numerics_module.errors import InputError
from reservoir_module.pvt import LiveOilPvt, Phase, WaterPvt
from reservoir_module.tables import PiecewiseLinear
from reservoir_module.units import BAR, CENTIPOISE


class TestPiecewiseLinear:
    """Interpolation, extrapolation and inversion."""

    def test_interpolates_between_nodes(self):
        table = PiecewiseLinear([0.0, 1.0, 3.0], {"y": [0.0, 2.0, 3.0]})
        assert table(0.5, "y") == pytest.approx(1.0)
        assert table(2.0, "y") == pytest.approx(2.5)

    def test_flat_below_first_node(self):
        table = PiecewiseLinear([1.0, 2.0], {"y": [5.0, 7.0]})
        x = Evaluation.variable(0.0, 0)
        result = table(x, "y")
        assert result.value == 5.0
        assert result.derivative(0) == 0.0

    def test_extrapolates_above_last_node_with_one_warning(self, caplog):
        table = PiecewiseLinear([0.0, 1.0], {"y": [0.0, 2.0]}, name="T")
        with caplog.at_level(logging.WARNING):
            assert table(2.0, "y") == pytest.approx(4.0)
            table(3.0, "y")
        assert sum("above last node" in record.message for record in caplog.records) == 1

    def test_clamped_table_stays_inside(self):
        table = PiecewiseLinear([0.0, 1.0], {"y": [0.0, 2.0]}, clamp=True)
        x = Evaluation.variable(2.0, 1)
        result = table(x, "y")
        assert result.value == 2.0
        assert result.derivative(1) == 0.0

    def test_derivative_is_segment_slope(self):
        table = PiecewiseLinear([0.0, 1.0, 3.0], {"y": [0.0, 2.0, 3.0]})
        result = table(Evaluation.variable(np.array([0.5, 2.0]), 0), "y")
        np.testing.assert_allclose(result.derivative(0), [2.0, 0.5])

    def test_inverse_of_decreasing_column(self):
        table = PiecewiseLinear([0.0, 1.0], {"y": [4.0, 0.0]})
        assert table.inverse(1.0, "y") == pytest.approx(0.75)
        assert table.inverse(10.0, "y") == pytest.approx(0.0)

    @pytest.mark.parametrize("x", [[], [1.0, 1.0], [2.0, 1.0]])
    def test_invalid_abscissa(self, x):
        with pytest.raises(InputError):
            PiecewiseLinear(x, {"y": np.zeros(len(x))})

    def test_ragged_column(self):
        with pytest.raises(InputError):
            PiecewiseLinear([0.0, 1.0], {"y": [1.0]})


class TestWaterPvt:
    """Constant-compressibility water."""

    def test_reference_point(self):
        water = WaterPvt(100.0 * BAR, 1.0 / 1.02, 4.5e-5 / BAR, 0.4 * CENTIPOISE)
        b, mu = water.props(100.0 * BAR)
        assert b == pytest.approx(1.0 / 1.02)
        assert mu == pytest.approx(0.4 * CENTIPOISE)

    def test_compressibility_expansion(self):
        water = WaterPvt(0.0, 1.0, 1e-9, 1e-3)
        x = 1e-9 * 1e7
        b, _ = water.props(1e7)
        assert b == pytest.approx(1.0 + x + x * x / 2.0, rel=1e-14)

    def test_viscosity_convention(self):
        water = WaterPvt(0.0, 1.0, 1e-9, 1e-3)
        x = 1e-9 * 1e7
        _, mu = water.props(1e7)
        assert mu == pytest.approx(1e-3 * (1.0 + x + x * x / 2.0), rel=1e-14)
        viscous = WaterPvt(0.0, 1.0, 0.0, 1e-3, viscosibility=1e-9)
        _, mu = viscous.props(1e7)
        assert mu == pytest.approx(1e-3 / (1.0 - x + x * x / 2.0), rel=1e-14)

    def test_non_positive_b_rejected(self):
        with pytest.raises(InputError):
            WaterPvt(0.0, 0.0, 0.0, 1e-3)


class TestLiveOil:
    """Saturated and undersaturated oil."""

    def test_saturated_rs_interpolates_bubble_points(self, live_fluid):
        assert live_fluid.saturated_rs(100.0 * BAR) == pytest.approx(40.0)
        assert live_fluid.saturated_rs(300.0 * BAR) == pytest.approx(120.0)

    def test_saturated_props(self, live_fluid):
        b, mu = live_fluid.oil_props(250.0 * BAR, 100.0, saturated=True)
        assert b == pytest.approx(1.0 / 1.30)
        assert mu == pytest.approx(0.70 * CENTIPOISE)

    def test_undersaturated_props_on_given_branch(self, live_fluid):
        b, mu = live_fluid.oil_props(350.0 * BAR, 100.0, saturated=False)
        assert b == pytest.approx(1.0 / 1.28)
        assert mu == pytest.approx(0.75 * CENTIPOISE)

    def test_undersaturated_interpolates_between_records(self, live_fluid):
        """Halfway between two records the branches are averaged at equal pressure."""
        b, _ = live_fluid.oil_props(350.0 * BAR, 120.0, saturated=False)
        assert b == pytest.approx(0.5 * (1.0 / 1.28) + 0.5 * (1.0 / 1.40))

    def test_branch_borrowed_from_next_record(self, live_fluid):
        """A record without undersaturated rows takes the next record's shape."""
        b, mu = live_fluid.oil_props(250.0 * BAR, 60.0, saturated=False)
        assert b == pytest.approx((1.0 / 1.20) * (1.30 / 1.28))
        assert mu == pytest.approx(0.90 * CENTIPOISE * 0.75 / 0.70)

    def test_mixed_flags_select_per_entry(self, live_fluid):
        p = np.array([250.0, 350.0]) * BAR
        b, _ = live_fluid.oil_props(p, np.array([0.0, 100.0]), saturated=np.array([True, False]))
        np.testing.assert_allclose(b, [1.0 / 1.30, 1.0 / 1.28])

    def test_derivatives_match_finite_differences(self, live_fluid):
        p0, rs0 = 300.0 * BAR, 90.0
        p = Evaluation.variable(p0, 0)
        rs = Evaluation.variable(rs0, 2)
        b, mu = live_fluid.oil_props(p, rs, saturated=False)
        h_p, h_rs = 1.0, 1e-4
        plain = lambda pp, rr: live_fluid.oil_props(pp, rr, saturated=False)
        db_dp = (plain(p0 + h_p, rs0)[0] - plain(p0 - h_p, rs0)[0]) / (2 * h_p)
        dmu_drs = (plain(p0, rs0 + h_rs)[1] - plain(p0, rs0 - h_rs)[1]) / (2 * h_rs)
        assert b.derivative(0) == pytest.approx(db_dp, rel=1e-5)
        assert mu.derivative(2) == pytest.approx(dmu_drs, rel=1e-5)

    def test_needs_two_records(self):
        with pytest.raises(InputError):
            LiveOilPvt([(1.0, np.array([[1e7, 0.8, 1e-3], [2e7, 0.79, 1.1e-3]]))])

    def test_rs_must_increase(self):
        rows = np.array([[1e7, 0.8, 1e-3], [2e7, 0.79, 1.1e-3]])
        with pytest.raises(InputError):
            LiveOilPvt([(5.0, rows), (5.0, rows)])

    def test_needs_an_undersaturated_branch(self):
        with pytest.raises(InputError):
            LiveOilPvt([(1.0, np.array([[1e7, 0.8, 1e-3]])), (2.0, np.array([[2e7, 0.7, 1e-3]]))])


class TestDeadOilAndDensity:
    """Dead oil and phase densities."""

    def test_dead_oil_has_no_dissolved_gas(self, dead_fluid):
        assert not dead_fluid.has_dissolved_gas
        assert dead_fluid.saturated_rs(200.0 * BAR) == 0.0
        b, _ = dead_fluid.oil_props(200.0 * BAR, 0.0, True)
        assert b == pytest.approx(1.0 / 1.05)

    def test_oil_density_carries_dissolved_gas(self, live_fluid):
        density = live_fluid.phase_density(Phase.OIL, 0.8, 100.0)
        assert density == pytest.approx(0.8 * (800.0 + 100.0 * 0.9))

    def test_gas_props(self, live_fluid):
        b, mu = live_fluid.gas_props(150.0 * BAR)
        assert b == pytest.approx(1.0 / 0.0085)
        assert mu == pytest.approx(0.018 * CENTIPOISE)
