import numpy as np
import pytest

from twrpower.errors import InvalidInputError, UnachievableRateError
from twrpower.waterfill import (
    level_for_rate,
    mac_rate,
    power_at_level,
    rate_at_level,
    relative_levels,
    uplink_rate,
    waterfill,
)

from conftest import scalar_channels


def grid_rate_two_modes(gains, P, step=1e-4):
    """Brute-force rate over p1 in [0, P], p2 = P - p1."""
    p1 = np.arange(0.0, P + step, step)
    p1 = np.minimum(p1, P)
    r = np.log2(1 + gains[0] * p1) + np.log2(1 + gains[1] * (P - p1))
    return float(r.max())


class TestWaterfill:
    def test_symmetric_split(self):
        a = waterfill([1.0, 1.0], 2.0)
        assert abs(a.inv_level - 2.0) < 1e-12
        np.testing.assert_allclose(a.powers, [1.0, 1.0])
        assert abs(a.rate - 2.0) < 1e-12

    def test_single_mode_optimum(self):
        # independent grid oracle first: exhaustive split of P = 1
        expected = grid_rate_two_modes([2.0, 0.5], 1.0)
        a = waterfill([2.0, 0.5], 1.0)
        assert abs(a.inv_level - 1.5) < 1e-12
        np.testing.assert_allclose(a.powers, [1.0, 0.0], atol=1e-12)
        assert abs(a.rate - np.log2(3.0)) < 1e-12
        assert a.rate >= expected - 1e-9

    def test_zero_budget(self):
        a = waterfill([1.0], 0.0)
        assert a.rate == 0.0
        assert a.inv_level == 1.0

    def test_empty_gains_flag(self):
        a = waterfill([], 1.0)
        assert a.unallocatable and a.rate == 0.0 and a.inv_level == 0.0
        b = waterfill([], 0.0)
        assert not b.unallocatable

    def test_budget_and_kkt_form(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            g = np.sort(rng.uniform(0.05, 8.0, rng.integers(1, 9)))[::-1]
            P = float(rng.uniform(0, 10))
            a = waterfill(g, P)
            assert abs(a.powers.sum() - P) <= 1e-9 * max(1.0, P)
            ref = np.maximum(a.inv_level - 1.0 / g, 0.0)
            assert np.array_equal(a.powers, ref)

    def test_beats_random_feasible_allocations(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            g = rng.uniform(0.1, 5.0, 4)
            P = float(rng.uniform(0.1, 6))
            best = waterfill(g, P).rate
            w = rng.dirichlet(np.ones(4), size=200) * P
            rates = np.log2(1 + g * w).sum(axis=1)
            assert best >= rates.max() - 1e-9

    def test_negative_budget_rejected(self):
        with pytest.raises(InvalidInputError):
            waterfill([1.0], -1.0)


class TestRateAndPowerAtLevel:
    def test_rate_examples(self):
        assert abs(rate_at_level([1, 1], np.sqrt(3)) - np.log2(3)) < 1e-12
        assert rate_at_level([2.0], 0.4) == 0.0
        assert abs(rate_at_level([4, 1], 1.0) - 2.0) < 1e-12

    def test_power_examples(self):
        assert abs(power_at_level([1, 1], 2.0) - 2.0) < 1e-12
        assert power_at_level([1, 1], 0.0) == 0.0
        assert abs(power_at_level([4, 1], 0.5) - 0.25) < 1e-12

    def test_monotone_in_level(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            g = rng.uniform(0.1, 5.0, 5)
            levels = np.sort(rng.uniform(0, 4.0, 12))
            rates = [rate_at_level(g, x) for x in levels]
            powers = [power_at_level(g, x) for x in levels]
            assert np.all(np.diff(rates) >= -1e-12)
            assert np.all(np.diff(powers) >= -1e-12)


class TestLevelForRate:
    def test_examples(self):
        assert abs(level_for_rate([1.0], 1.0) - 2.0) < 1e-12
        assert abs(level_for_rate([1, 1], np.log2(3)) - np.sqrt(3)) < 1e-12
        assert level_for_rate([4.0, 1.0], 0.0) == 0.25

    def test_against_bisection(self):
        # independent inversion by plain bisection
        g = [2.0, 0.7, 0.3]
        R = 2.345
        lo, hi = 0.5, 50.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if rate_at_level(g, mid) < R:
                lo = mid
            else:
                hi = mid
        assert abs(level_for_rate(g, R) - 0.5 * (lo + hi)) < 1e-9

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            g = rng.uniform(0.1, 6.0, rng.integers(1, 7))
            x = float(rng.uniform(1.0 / g.max(), 8.0 / g.max()))
            if x * g.max() <= 1.0 + 1e-9:
                continue
            R = rate_at_level(g, x)
            back = level_for_rate(g, R)
            assert abs(back - x) <= 1e-9 * x
            assert abs(rate_at_level(g, back) - R) <= 1e-9

    def test_waterfill_power_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            g = rng.uniform(0.1, 6.0, 5)
            x = float(rng.uniform(1.0 / g.max(), 10.0))
            P = power_at_level(g, x)
            a = waterfill(g, P)
            assert abs(a.inv_level - x) <= 1e-9 * max(1.0, x)

    def test_unachievable(self):
        with pytest.raises(UnachievableRateError):
            level_for_rate([], 1.0)


class TestMatrixRates:
    def test_uplink_examples(self, unit_scalar):
        z = np.zeros((1, 1))
        assert uplink_rate(unit_scalar, z, 1) == 0.0
        assert abs(uplink_rate(unit_scalar, np.array([[1.0]]), 1) - 1.0) < 1e-12
        assert abs(uplink_rate(unit_scalar, np.array([[3.0]]), 1) - 2.0) < 1e-12

    def test_mac_examples(self, unit_scalar):
        z = np.zeros((1, 1))
        assert mac_rate(unit_scalar, (z, z)) == 0.0
        one = np.array([[1.0]])
        assert abs(mac_rate(unit_scalar, (one, one)) - np.log2(3)) < 1e-12
        assert abs(mac_rate(unit_scalar, (one, z)) - uplink_rate(unit_scalar, one, 1)) < 1e-12

    def test_non_psd_rejected(self, unit_scalar):
        with pytest.raises(InvalidInputError):
            uplink_rate(unit_scalar, np.array([[-1.0]]), 1)

    def test_relative_levels_scalar(self, unit_scalar):
        one = np.array([[1.0]])
        lv = relative_levels(unit_scalar, (one, one))
        assert abs(lv.inv_mu1 - 2.0) < 1e-9
        assert abs(lv.inv_mu2 - 2.0) < 1e-9
        assert abs(lv.inv_mu_ma - np.sqrt(3)) < 1e-9

    def test_relative_levels_zero(self, unit_scalar):
        z = np.zeros((1, 1))
        lv = relative_levels(unit_scalar, (z, z))
        assert lv.inv_mu1 == 1.0 and lv.inv_mu2 == 1.0 and lv.inv_mu_ma == 1.0

    def test_mu_ma_below_max_mu(self):
        # combined-level property: 1/mu_ma < max(1/mu_1, 1/mu_2) for D > 0
        from twrpower.channels import generate_channels

        rng = np.random.default_rng(5)
        for seed in range(12):
            ch = generate_channels(2, 2, 3, seed=seed)
            d1 = rng.uniform(0.2, 1.0)
            d2 = rng.uniform(0.2, 1.0)
            D = (d1 * np.eye(2), d2 * np.eye(2))
            lv = relative_levels(ch, D)
            assert lv.inv_mu_ma < max(lv.inv_mu1, lv.inv_mu2) + 1e-12
