import math

import numpy as np
import pytest

from backscatter_sim.rfmath import (
    CC1310_REJECTION,
    CC2500_REJECTION,
    RejectionCurve,
    bistatic_received_power,
    carrier_rejection,
    db_to_linear,
    dbm_to_mw,
    free_space_path_loss,
    linear_to_db,
    mw_to_dbm,
    noise_floor,
    path_loss,
    sum_dbm,
    wavelength,
)


class TestUnits:
    def test_dbm_round_trip(self):
        for p in (-120.0, -3.0, 0.0, 30.0):
            assert mw_to_dbm(dbm_to_mw(p)) == pytest.approx(p)

    def test_zero_milliwatts_is_minus_infinity(self):
        assert mw_to_dbm(0.0) == -math.inf

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            mw_to_dbm(-1.0)

    def test_non_finite_dbm_rejected(self):
        with pytest.raises(ValueError):
            dbm_to_mw(math.nan)

    def test_linear_db_helpers(self):
        assert db_to_linear(10.0) == pytest.approx(10.0)
        assert linear_to_db(100.0) == pytest.approx(20.0)
        assert linear_to_db(0.0) == -math.inf

    def test_sum_of_two_equal_powers_adds_3db(self):
        assert sum_dbm([-50.0, -50.0]) == pytest.approx(-50.0 + 10 * math.log10(2))

    def test_empty_sum_is_minus_infinity(self):
        assert sum_dbm([]) == -math.inf

    def test_wavelength_at_2_4_ghz(self):
        assert wavelength(2.4e9) == pytest.approx(0.12491352, rel=1e-7)


class TestPathLoss:
    def test_free_space_1m_2_4ghz(self):
        # 20 log10(4 pi f / c) at 2.4 GHz
        assert free_space_path_loss(1.0, 2.4e9) == pytest.approx(40.0520, abs=1e-4)

    def test_free_space_1km_868mhz(self):
        assert free_space_path_loss(1000.0, 868e6) == pytest.approx(91.2182, abs=1e-4)

    def test_exponent_two_equals_free_space(self):
        for d in (0.5, 3.0, 250.0):
            assert path_loss(d, 2.44e9) == pytest.approx(free_space_path_loss(d, 2.44e9))

    def test_exponent_scales_slope(self):
        step = path_loss(100.0, 868e6, 3.0) - path_loss(10.0, 868e6, 3.0)
        assert step == pytest.approx(30.0)

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_non_positive_distance_rejected(self, bad):
        with pytest.raises(ValueError):
            path_loss(bad, 2.4e9)

    def test_sub_free_space_exponent_rejected(self):
        with pytest.raises(ValueError):
            path_loss(10.0, 2.4e9, 1.5)


class TestBistatic:
    def test_reference_link(self):
        # 26 dBm, K = -3 dB, 2.4 GHz, d1 = 1 m, d2 = 10 m
        p = bistatic_received_power(26.0, 0.0, 0.0, -3.0, 2.4e9, 1.0, 10.0)
        assert p == pytest.approx(-48.0441, abs=1e-3)

    def test_868_reference(self):
        p = bistatic_received_power(28.0, 0.0, 0.0, -3.0, 868e6, 1.0, 3400.0)
        assert p == pytest.approx(-87.8399, abs=1e-3)

    def test_gains_add_in_db(self):
        base = bistatic_received_power(20.0, 0.0, 0.0, 0.0, 2.4e9, 2.0, 5.0)
        gained = bistatic_received_power(20.0, 2.0, 3.0, 0.0, 2.4e9, 2.0, 5.0)
        assert gained - base == pytest.approx(5.0)

    def test_zero_distance_rejected(self):
        with pytest.raises(ValueError):
            bistatic_received_power(26.0, 0.0, 0.0, -3.0, 2.4e9, 0.0, 10.0)

    def test_sub_free_space_exponent_rejected(self):
        with pytest.raises(ValueError):
            bistatic_received_power(26.0, 0.0, 0.0, -3.0, 2.4e9, 1.0, 10.0, exponent=1.9)


class TestRejection:
    def test_cc2500_exceeds_50db_at_2mhz(self):
        assert carrier_rejection(CC2500_REJECTION, 2e6) >= 50.0

    def test_cc1310_exceeds_50db_at_100khz(self):
        assert carrier_rejection(CC1310_REJECTION, 100e3) >= 50.0

    def test_zero_offset_is_zero(self):
        assert carrier_rejection(CC2500_REJECTION, 0.0) == 0.0

    def test_clamped_beyond_last_point(self):
        assert CC2500_REJECTION(1e9) == CC2500_REJECTION.values[-1]

    def test_interpolation_between_points(self):
        assert CC2500_REJECTION(1.5e6) == pytest.approx((35.0 + 52.0) / 2)

    def test_vectorised(self):
        out = CC2500_REJECTION(np.array([0.0, 2e6]))
        assert out.shape == (2,)

    def test_negative_offset_rejected(self):
        with pytest.raises(ValueError):
            carrier_rejection(CC2500_REJECTION, -1.0)

    def test_curve_must_start_at_origin(self):
        with pytest.raises(ValueError):
            RejectionCurve(((1.0, 0.0), (2.0, 3.0)))

    def test_curve_offsets_must_not_decrease(self):
        with pytest.raises(ValueError):
            RejectionCurve(((0.0, 0.0), (2.0, 3.0), (1.0, 4.0)))

    def test_round_trip_via_list(self):
        assert RejectionCurve.from_pairs(CC1310_REJECTION.to_list()) == CC1310_REJECTION


class TestNoiseFloor:
    def test_812khz_nf10(self):
        assert noise_floor(812e3, 10.0) == pytest.approx(-104.9044, abs=1e-4)

    def test_58khz_nf6(self):
        assert noise_floor(58e3, 6.0) == pytest.approx(-120.3657, abs=1e-4)

    def test_rejects_zero_bandwidth(self):
        with pytest.raises(ValueError):
            noise_floor(0.0, 6.0)
