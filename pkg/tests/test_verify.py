import numpy as np
import pytest

from twrpower.channels import bc_gains, generate_channels, relay_covariance
from twrpower.errors import InvalidInputError
from twrpower.netopt import Limits, network_optimize
from twrpower.verify import check_necessary, compare_to_oracle, scalar_oracle

from conftest import scalar_channels


class TestCheckNecessary:
    def test_passes_on_closed_form(self, unit_scalar):
        lim = Limits(1, 1, 3)
        sol = network_optimize(unit_scalar, lim)
        report = check_necessary(unit_scalar, sol, limits=lim)
        assert report.passed
        assert report["cond_13b"].residual <= 1e-9

    def test_perturbed_relay_level_fails_13b(self, unit_scalar):
        lim = Limits(1, 1, 3)
        sol = network_optimize(unit_scalar, lim)
        # raise one side's water-level but stay below the other mu: only the
        # phase balance breaks
        g, svd = bc_gains(unit_scalar, 1)
        delta = 0.1
        sol.relay.inv_lambda1 = sol.relay.inv_lambda1 + delta
        sol.relay.B1 = relay_covariance(svd, g, sol.relay.inv_lambda1)
        report = check_necessary(unit_scalar, sol, limits=lim)
        assert not report.passed
        assert not report["cond_13b"].passed
        assert report["cond_13b"].residual > 1e-3

    def test_deterministic_reports(self):
        ch = generate_channels(2, 2, 3, seed=3)
        lim = Limits(1.0, 1.5, 2.0)
        sol = network_optimize(ch, lim)
        a = check_necessary(ch, sol, limits=lim)
        b = check_necessary(ch, sol, limits=lim)
        assert {k: (c.passed, c.residual) for k, c in a.checks.items()} == {
            k: (c.passed, c.residual) for k, c in b.checks.items()
        }

    def test_full_relay_power_on_hard_subcases(self):
        ch = scalar_channels(h1r=2.0, h2r=0.5)
        lim = Limits(1.0, 1.0, 3.0)
        sol = network_optimize(ch, lim)
        assert sol.subcase.label in ("I-2", "II-4")
        report = check_necessary(ch, sol, limits=lim)
        assert report["full_relay_power"].passed
        assert report["full_relay_power"].residual <= 1e-6
        assert report["mu_ordering"].passed


class TestScalarOracle:
    def test_benchmark_instance(self, unit_scalar):
        orc = scalar_oracle(unit_scalar, Limits(1, 1, 3), steps=300)
        assert abs(orc.R_tw - np.log2(3) / 2) < 2e-3
        assert abs(orc.total_power - (2 + 2 * (np.sqrt(3) - 1))) < 2e-2
        relay = orc.q1 + orc.q2
        assert abs(relay - 2 * (np.sqrt(3) - 1)) < 2e-2

    def test_zero_relay(self, unit_scalar):
        orc = scalar_oracle(unit_scalar, Limits(1, 1, 0), steps=150)
        assert orc.R_tw == 0.0
        assert orc.q1 == 0.0 and orc.q2 == 0.0

    def test_zero_source(self, unit_scalar):
        # with p1 = 0 the 1 -> 2 direction is dead; direct evaluation of the
        # surviving direction bounds the oracle
        orc = scalar_oracle(unit_scalar, Limits(0, 1, 2), steps=150)
        # best possible: min over the 2 -> 1 path, capped by R_ma = log2(2)
        assert orc.R_tw <= 0.5 * np.log2(2.0) + 1e-9
        assert orc.R_tw > 0.2

    def test_refinement_bounded_by_modulus(self):
        ch = generate_channels(1, 1, 1, seed=4)
        lim = Limits(1.0, 0.8, 1.5)
        coarse = scalar_oracle(ch, lim, steps=150)
        fine = scalar_oracle(ch, lim, steps=300)
        assert fine.R_tw >= coarse.R_tw - 1e-12
        assert fine.R_tw - coarse.R_tw <= coarse.grid_modulus + 1e-9

    def test_rejects_matrix_channels(self):
        ch = generate_channels(2, 2, 2, seed=0)
        with pytest.raises(InvalidInputError):
            scalar_oracle(ch, Limits(1, 1, 1))

    def test_rejects_too_few_steps(self, unit_scalar):
        with pytest.raises(InvalidInputError):
            scalar_oracle(unit_scalar, Limits(1, 1, 1), steps=50)


class TestCompareToOracle:
    def test_matched_instance(self, unit_scalar):
        lim = Limits(1, 1, 3)
        sol = network_optimize(unit_scalar, lim)
        orc = scalar_oracle(unit_scalar, lim, steps=300)
        res = compare_to_oracle(sol, orc)
        assert res.passed

    def test_adversarial_mismatch(self, unit_scalar):
        lim = Limits(1, 1, 3)
        sol = network_optimize(unit_scalar, lim)
        orc = scalar_oracle(unit_scalar, lim, steps=300)
        sol.rates.R_tw = sol.rates.R_tw + 0.5
        res = compare_to_oracle(sol, orc)
        assert not res.passed
        assert res.rate_delta > 0.4  # signed delta reported
