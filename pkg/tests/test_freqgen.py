"""Tests for Sobol generation, the ball map, and the radial warp."""

import numpy as np
import pytest
from scipy.stats import chisquare, kstest

from scalefield.freqgen import (
    build_frequency_bank,
    cube_to_ball,
    radial_warp,
    sobol_sequence,
)


class TestSobol:
    def test_empty(self):
        assert sobol_sequence(0, 2).shape == (0, 2)

    def test_first_points_1d(self):
        # Reference values from the Joe-Kuo direction-number construction.
        pts = sobol_sequence(3, 1)
        assert np.allclose(pts[:, 0], [0.5, 0.75, 0.25], atol=1e-12)

    def test_first_points_2d(self):
        pts = sobol_sequence(2, 2)
        assert np.allclose(pts, [[0.5, 0.5], [0.75, 0.25]], atol=1e-12)

    def test_vs_scipy_reference(self):
        # scipy's generator uses the same published direction numbers; our
        # sequence must match it (minus the skipped origin) in every dim.
        from scipy.stats import qmc

        for dim in (1, 2, 3, 4):
            ref = qmc.Sobol(d=dim, scramble=False).random(129)[1:]
            pts = sobol_sequence(128, dim)
            assert np.abs(pts - ref).max() < 1e-9

    def test_unsupported_dim(self):
        with pytest.raises(ValueError):
            sobol_sequence(4, 5)

    def test_deterministic(self):
        assert np.array_equal(sobol_sequence(64, 3), sobol_sequence(64, 3))


class TestCubeToBall:
    def test_center_maps_to_origin(self):
        out = cube_to_ball(np.array([[0.5, 0.5]]))
        assert np.array_equal(out, np.zeros((1, 2)))

    def test_norm_bound(self):
        rng = np.random.default_rng(0)
        for d in (1, 2, 3, 4):
            out = cube_to_ball(rng.random((2000, d)))
            assert np.linalg.norm(out, axis=1).max() <= 1.0 + 1e-12

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_annulus_counts_chi2(self, d):
        # Uniform-ball radii satisfy P(r <= t) = t^d; compare shell counts
        # against those analytic volumes.
        pts = cube_to_ball(sobol_sequence(10_000, d))
        r = np.linalg.norm(pts, axis=1)
        edges = np.linspace(0.0, 1.0, 17)
        counts, _ = np.histogram(r, bins=edges)
        expected = (edges[1:] ** d - edges[:-1] ** d) * len(r)
        assert chisquare(counts, expected).pvalue > 0.01

    def test_rejects_out_of_cube(self):
        with pytest.raises(ValueError):
            cube_to_ball(np.array([[1.0, 0.2]]))


class TestRadialWarp:
    def test_origin_fixed(self):
        out = radial_warp(np.zeros((1, 2)), sigma_f=3.0)
        assert np.array_equal(out, np.zeros((1, 2)))

    def test_monotone_radii(self):
        p = np.array([[0.2, 0.0], [0.7, 0.0]])
        out = radial_warp(p, sigma_f=1.5)
        assert np.linalg.norm(out[0]) < np.linalg.norm(out[1])

    def test_closed_form_2d_point(self):
        # d=2, sigma_f=1, input radius with r^2 = 0.5 -> sqrt(-2 ln 0.5).
        r_in = np.sqrt(0.5)
        out = radial_warp(np.array([[r_in, 0.0]]), sigma_f=1.0)
        assert abs(np.linalg.norm(out[0]) - 1.1774100225154747) < 1e-7

    def test_closed_form_2d_field(self):
        # For d=2 the warped radius is sqrt(-2 sigma_f ln(1 - r^2)).
        rng = np.random.default_rng(1)
        for sigma_f in (0.5, 40.0, 2000.0):
            p = cube_to_ball(rng.random((500, 2)))
            r = np.linalg.norm(p, axis=1)
            out = radial_warp(p, sigma_f)
            expected = np.sqrt(-2.0 * sigma_f * np.log1p(-(r**2)))
            got = np.linalg.norm(out, axis=1)
            ok = expected > 1e-6
            assert np.abs(got[ok] - expected[ok]).max() / expected[ok].max() < 1e-6

    def test_direction_preserved(self):
        rng = np.random.default_rng(2)
        p = cube_to_ball(rng.random((200, 3)))
        out = radial_warp(p, sigma_f=2.0)
        nz = np.linalg.norm(p, axis=1) > 1e-9
        cos = np.sum(p[nz] * out[nz], axis=1) / (
            np.linalg.norm(p[nz], axis=1) * np.linalg.norm(out[nz], axis=1)
        )
        assert cos.min() > 1.0 - 1e-12

    def test_invalid_sigma(self):
        with pytest.raises(ValueError):
            radial_warp(np.zeros((1, 2)), sigma_f=0.0)


class TestFrequencyBank:
    def test_deterministic_regeneration(self):
        b1 = build_frequency_bank(2, 512, 2000.0, seed=0)
        b2 = build_frequency_bank(2, 512, 2000.0, seed=0)
        assert b1 == b2
        assert np.array_equal(b1.freqs, b2.freqs)

    def test_seed_changes_bank(self):
        b1 = build_frequency_bank(2, 64, 100.0, seed=0)
        b2 = build_frequency_bank(2, 64, 100.0, seed=7)
        assert not np.array_equal(b1.freqs, b2.freqs)

    def test_single_frequency_1d(self):
        # Sobol point 0.5 -> ball coordinate 0 -> radius 0: the warp fixes it.
        bank = build_frequency_bank(1, 1, 1.0, seed=0)
        assert bank.freqs.shape == (1, 1)
        assert abs(bank.freqs[0, 0]) < 1e-12

    @pytest.mark.parametrize("d,sigma_f", [(1, 100.0), (2, 2000.0), (3, 100.0)])
    def test_radial_law_ks(self, d, sigma_f):
        from scipy.special import gammainc

        bank = build_frequency_bank(d, 512, sigma_f, seed=0)
        r = np.linalg.norm(bank.freqs, axis=1)
        stat = kstest(r, lambda x: gammainc(d / 2.0, x**2 / (2.0 * sigma_f))).statistic
        assert stat < 0.05

    def test_pairwise_distinct(self):
        bank = build_frequency_bank(2, 4096, 2000.0, seed=0)
        order = np.lexsort(bank.freqs.T)
        srt = bank.freqs[order]
        assert (np.abs(np.diff(srt, axis=0)).max(axis=1) > 0).all()

    def test_all_finite(self):
        bank = build_frequency_bank(4, 256, 500.0, seed=3)
        assert np.all(np.isfinite(bank.freqs))
