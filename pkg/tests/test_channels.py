import numpy as np
import pytest

from twrpower.channels import (
    SVDCache,
    bc_gains,
    generate_channels,
    mix64,
    recover_precoder,
    relay_covariance,
)
from twrpower.errors import InvalidInputError, InvalidSpecError
from twrpower.waterfill import power_at_level

from conftest import scalar_channels


class TestGenerate:
    def test_shapes(self):
        ch = generate_channels(2, 2, 3, seed=42)
        assert ch.H_1r.shape == (3, 2)
        assert ch.H_2r.shape == (3, 2)
        assert ch.H_r1.shape == (2, 3)
        assert ch.H_r2.shape == (2, 3)
        assert (ch.n1, ch.n2, ch.nr) == (2, 2, 3)

    def test_reciprocal_is_exact_transpose(self):
        ch = generate_channels(3, 2, 4, seed=1, reciprocal=True)
        assert np.array_equal(ch.H_r1, ch.H_1r.T)
        assert np.array_equal(ch.H_r2, ch.H_2r.T)

    def test_seed_determinism(self):
        a = generate_channels(2, 3, 4, seed=9, trial=5)
        b = generate_channels(2, 3, 4, seed=9, trial=5)
        for f in ("H_1r", "H_2r", "H_r1", "H_r2"):
            assert np.array_equal(getattr(a, f), getattr(b, f))
        c = generate_channels(2, 3, 4, seed=10, trial=5)
        assert not np.array_equal(a.H_1r, c.H_1r)
        d = generate_channels(2, 3, 4, seed=9, trial=6)
        assert not np.array_equal(a.H_1r, d.H_1r)

    def test_invalid_spec(self):
        with pytest.raises(InvalidSpecError):
            generate_channels(0, 2, 3)
        with pytest.raises(InvalidSpecError):
            generate_channels(2, 2, 3, v1=-1.0)
        with pytest.raises(InvalidSpecError):
            generate_channels(2, 2, 3, v2=0.0)

    def test_per_part_variance(self):
        ch = generate_channels(40, 2, 40, v1=2.5, seed=3)
        re = ch.H_1r.real.ravel()
        im = ch.H_1r.imag.ravel()
        assert abs(re.var() - 2.5) < 0.35
        assert abs(im.var() - 2.5) < 0.35
        assert abs(re.mean()) < 0.2

    def test_mix64_distinct_keys(self):
        keys = {mix64(7, t) for t in range(1000)}
        assert len(keys) == 1000


class TestGains:
    def test_identity(self):
        ch = scalar_channels()
        ch = generate_channels(2, 2, 2, seed=0)
        ch.H_r1 = np.eye(2, dtype=complex)
        g, svd = bc_gains(ch, 1)
        np.testing.assert_allclose(g.gains, [1.0, 1.0])

    def test_diagonal(self):
        ch = generate_channels(2, 2, 2, seed=0)
        ch.H_r1 = np.diag([2.0, 1.0]).astype(complex)
        g, _ = bc_gains(ch, 1)
        np.testing.assert_allclose(g.gains, [4.0, 1.0])

    def test_zero_channel_gives_empty(self):
        ch = generate_channels(2, 2, 2, seed=0)
        ch.H_r1 = np.zeros((2, 2), dtype=complex)
        g, _ = bc_gains(ch, 1)
        assert g.rank == 0

    def test_noise_scaling(self):
        ch = generate_channels(2, 2, 3, seed=4, sigma2_1=4.0)
        g, _ = bc_gains(ch, 1)
        ch.sigma2_1 = 1.0
        g0, _ = bc_gains(ch, 1)
        np.testing.assert_allclose(g.gains, g0.gains / 4.0, rtol=1e-12)

    def test_svd_invariants_random(self):
        for seed in range(8):
            ch = generate_channels(3, 2, 4, seed=seed)
            for i in (1, 2):
                g, svd = bc_gains(ch, i)
                assert np.all(np.diff(g.gains) <= 1e-12)
                assert np.all(g.gains > 0)
                V = svd.V
                assert np.linalg.norm(V.conj().T @ V - np.eye(V.shape[0])) < 1e-10
                H = ch.downlink(i)
                err = np.linalg.norm(svd.reconstruct() - H) / np.linalg.norm(H)
                assert err < 1e-9


class TestRelayCovariance:
    def test_single_gain(self):
        ch = generate_channels(1, 1, 1, seed=0)
        ch.H_r1 = np.array([[1.0 + 0j]])
        g, svd = bc_gains(ch, 1)
        B = relay_covariance(svd, g, 2.0)
        assert abs(np.trace(B).real - 1.0) < 1e-12

    def test_zero_level(self):
        ch = generate_channels(2, 2, 3, seed=1)
        g, svd = bc_gains(ch, 1)
        B = relay_covariance(svd, g, 0.0)
        assert np.linalg.norm(B) == 0.0

    def test_partial_mode_activation(self):
        ch = generate_channels(2, 2, 2, seed=0)
        ch.H_r1 = np.diag([2.0, 1.0]).astype(complex)
        g, svd = bc_gains(ch, 1)
        B = relay_covariance(svd, g, 0.5)
        assert abs(np.trace(B).real - 0.25) < 1e-12

    def test_trace_matches_power_at_level(self):
        for seed in range(6):
            ch = generate_channels(3, 2, 4, seed=seed)
            g, svd = bc_gains(ch, 2)
            for lev in (0.0, 0.1, 0.7, 3.0):
                B = relay_covariance(svd, g, lev)
                assert abs(np.trace(B).real - power_at_level(g, lev)) < 1e-10
                w = np.linalg.eigvalsh(B)
                assert w.min() > -1e-12

    def test_negative_level_rejected(self):
        ch = generate_channels(2, 2, 2, seed=0)
        g, svd = bc_gains(ch, 1)
        with pytest.raises(InvalidInputError):
            relay_covariance(svd, g, -0.1)


class TestRecoverPrecoder:
    def test_identity(self):
        W = recover_precoder(np.eye(3, dtype=complex))
        np.testing.assert_allclose(W, np.eye(3), atol=1e-12)

    def test_zero(self):
        W = recover_precoder(np.zeros((2, 2), dtype=complex))
        assert np.linalg.norm(W) == 0.0

    def test_random_psd_reconstruction(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            Cm = A @ A.conj().T
            W = recover_precoder(Cm)
            err = np.linalg.norm(W @ W.conj().T - Cm)
            assert err <= 1e-9 * max(1.0, np.linalg.norm(Cm))

    def test_rejects_bad_input(self):
        with pytest.raises(InvalidInputError):
            recover_precoder(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(InvalidInputError):
            recover_precoder(np.diag([1.0, -0.5]))
