"""Array geometry: design rules, kernel, responses, nulls, beamwidths."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

import raysim as rs

PHI_MAX = 0.499 * math.pi


def brute_kernel(M, x):
    """Direct summation oracle for the normalized phasor sum."""
    return np.mean(np.exp(1j * np.pi * np.arange(M) * x))


class TestDesign:
    def test_large_array_ray_count(self):
        cfg = rs.design_ray_array(128, PHI_MAX)
        assert cfg.N == 201
        assert cfg.M == 128

    def test_small_array_ray_count(self):
        # arcsin(1/3) = 0.33984, floor(1.56765 / 0.33984) = 4
        assert rs.design_ray_array(6, PHI_MAX).N == 9

    def test_hub_offset_lower_bound(self):
        cfg = rs.design_ray_array(8, PHI_MAX)
        assert cfg.D == pytest.approx(1.9840593925343335, rel=1e-12)

    def test_orientation_grid(self):
        cfg = rs.design_ray_array(128, 0.3 * math.pi)
        mid = (cfg.N - 1) // 2
        assert cfg.orientations[mid] == 0.0
        assert cfg.orientations[mid + 1] == pytest.approx(math.asin(1 / 64), abs=1e-15)
        assert np.allclose(cfg.orientations, -cfg.orientations[::-1])
        spacing = np.diff(cfg.orientations)
        assert np.allclose(spacing, math.asin(2 / 128))

    def test_margin_scales_hub_offset(self):
        base = rs.design_ray_array(8, PHI_MAX)
        padded = rs.design_ray_array(8, PHI_MAX, D_margin=0.5)
        assert padded.D == pytest.approx(1.5 * base.D)

    @pytest.mark.parametrize("M,phi_max", [(1, 0.3), (0, 0.3), (4, 0.0), (4, 0.5 * math.pi), (4, -0.1)])
    def test_rejects_bad_inputs(self, M, phi_max):
        with pytest.raises(ValueError):
            rs.design_ray_array(M, phi_max)


class TestDirichletKernel:
    def test_unity_at_zero(self):
        assert rs.dirichlet_kernel(8, 0.0) == pytest.approx(1.0 + 0.0j)

    def test_null_at_first_zero(self):
        assert abs(rs.dirichlet_kernel(8, 0.25)) == pytest.approx(0.0, abs=1e-15)

    def test_interior_value_matches_summation(self):
        # frozen from the 8-phasor summation oracle
        val = abs(rs.dirichlet_kernel(8, 1 / 8))
        assert val == pytest.approx(0.6407288619353766, rel=1e-14)
        assert val == pytest.approx(abs(brute_kernel(8, 1 / 8)), rel=1e-14)

    @pytest.mark.parametrize("M", [1, 2, 5, 8, 33])
    def test_matches_summation_on_grid(self, M):
        xs = np.linspace(-2.5, 2.5, 701)
        closed = rs.dirichlet_kernel(M, xs)
        summed = np.array([brute_kernel(M, x) for x in xs])
        assert np.max(np.abs(closed - summed)) < 1e-12

    def test_removable_singularities_have_unit_magnitude(self):
        for M in (2, 7, 8):
            for x in (0.0, 2.0, -2.0, 4.0):
                assert abs(rs.dirichlet_kernel(M, x)) == pytest.approx(1.0, abs=1e-15)

    def test_bounded_with_equality_only_at_even_integers(self):
        xs = np.linspace(-4, 4, 20001)
        mags = np.abs(rs.dirichlet_kernel(16, xs))
        assert np.all(mags <= 1 + 1e-12)
        near_one = xs[mags > 1 - 1e-6]
        assert np.all(np.abs(near_one - 2 * np.round(near_one / 2)) < 1e-3)


class TestSteering:
    def test_aligned_gives_all_ones(self):
        assert np.allclose(rs.subarray_steering(0.37, 0.37, 6), np.ones(6))

    def test_two_element_quarter_turn(self):
        # sin(pi/6) = 1/2 -> second element at e^{j pi/2}
        vec = rs.subarray_steering(math.pi / 6, 0.0, 2)
        assert np.allclose(vec, [1.0, 1j])

    def test_sign_flip_conjugates(self):
        rng = np.random.default_rng(3)
        for phi, eta in rng.uniform(-1.2, 1.2, (20, 2)):
            a = rs.subarray_steering(phi, eta, 9)
            b = rs.subarray_steering(-phi, -eta, 9)
            assert np.allclose(a, b.conj())


class TestRayResponses:
    def test_peak_value_at_alignment(self, ray_pattern):
        cfg = rs.design_ray_array(8, PHI_MAX)
        mid = (cfg.N - 1) // 2
        resp = rs.ray_responses(cfg.orientations[mid + 2], cfg, ray_pattern)
        assert abs(resp.values[mid + 2]) == pytest.approx(
            8 * math.sqrt(ray_pattern.G0), rel=1e-12
        )

    def test_null_one_spacing_away(self):
        iso = rs.ElementPattern.isotropic(0.0)
        cfg = rs.design_ray_array(8, PHI_MAX)
        mid = (cfg.N - 1) // 2
        resp = rs.ray_responses(math.asin(2 / 8) + cfg.orientations[mid], cfg, iso)
        assert abs(resp.values[mid]) < 1e-12

    def test_matches_per_element_summation(self, ray_pattern):
        # oracle by construction: sum the M element phasors directly
        cfg = rs.design_ray_array(8, PHI_MAX)
        phi = 0.3 * math.pi
        resp = rs.ray_responses(phi, cfg, ray_pattern)
        for n, eta in enumerate(cfg.orientations):
            elements = np.exp(1j * np.pi * np.arange(8) * math.sin(phi - eta))
            first = np.exp(2j * np.pi * cfg.D * math.sin(phi - eta))
            brute = elements.sum() * first * math.sqrt(ray_pattern.gain(phi - eta))
            if abs(brute) > 1e-9:
                assert abs(resp.values[n] - brute) / abs(brute) < 1e-10
            else:
                assert abs(resp.values[n] - brute) < 1e-10

    def test_isotropic_magnitude_is_kernel(self):
        iso = rs.ElementPattern.isotropic(0.0)
        cfg = rs.design_ray_array(8, PHI_MAX)
        mid = (cfg.N - 1) // 2
        resp = rs.ray_responses(0.3 * math.pi, cfg, iso)
        expected = abs(8 * brute_kernel(8, math.sin(0.3 * math.pi)))
        assert abs(resp.values[mid]) == pytest.approx(expected, rel=1e-12)


def first_null_offset(M, eta, phi_max=PHI_MAX, pattern=None):
    """Root-finding oracle: locate the first pattern zero above the peak."""
    spacing = math.asin(2 / M)
    factor = lambda phi: math.sin(0.5 * math.pi * M * math.sin(phi - eta))
    return brentq(factor, eta + 0.5 * spacing, eta + 1.5 * spacing, xtol=1e-14) - eta


class TestRayNulls:
    def test_first_positive_null(self):
        nulls = rs.ray_nulls(0.0, 8, PHI_MAX)
        positive = nulls[nulls > 0]
        assert positive[0] == pytest.approx(math.asin(0.25), abs=1e-15)

    def test_two_element_nulls_outside_sector(self):
        # arcsin(2p/2) = pi/2 > phi_max, so nothing remains
        assert len(rs.ray_nulls(0.0, 2, PHI_MAX)) == 0

    def test_steered_nulls_shift_with_orientation(self):
        # the boresight nulls shift with the ray; steering can also pull the
        # grazing-incidence zero (sin offset = -1) into the admissible set
        eta = 0.3 * math.pi
        nulls = rs.ray_nulls(eta, 8, PHI_MAX)
        shifted = rs.ray_nulls(0.0, 8, PHI_MAX) + eta
        expected = shifted[np.abs(shifted) <= PHI_MAX]
        assert all(np.min(np.abs(nulls - e)) < 1e-14 for e in expected)
        # every reported null zeroes the response (root-finding oracle for the first)
        for phi in nulls:
            assert abs(8 * rs.dirichlet_kernel(8, math.sin(phi - eta))) < 1e-10
        assert min(n for n in nulls if n > eta) - eta == pytest.approx(
            first_null_offset(8, eta), abs=1e-12
        )

    def test_all_nulls_zero_the_response(self):
        iso = rs.ElementPattern.isotropic(0.0)
        cfg = rs.design_ray_array(8, PHI_MAX)
        mid = (cfg.N - 1) // 2
        for eta_idx in (mid, mid + 3):
            eta = cfg.orientations[eta_idx]
            for phi in rs.ray_nulls(eta, 8, PHI_MAX):
                assert abs(rs.ray_responses(phi, cfg, iso).values[eta_idx]) < 1e-10


class TestBeamwidths:
    def test_ray_beamwidth_values(self):
        assert rs.ray_beamwidth(8) == pytest.approx(0.5053605102841573, rel=1e-14)
        assert rs.ray_beamwidth(128) == pytest.approx(0.0312512717054739, rel=1e-12)

    def test_large_array_small_angle_limit(self):
        assert rs.ray_beamwidth(4096) == pytest.approx(4 / 4096, rel=1e-5)

    def test_rejects_tiny_arrays(self):
        with pytest.raises(ValueError):
            rs.ray_beamwidth(2)

    def test_ray_beamwidth_matches_null_search(self):
        for M in (4, 8, 16, 128):
            eta = math.asin(2 / M)  # second ray of the fan
            lo = brentq(
                lambda p: math.sin(0.5 * math.pi * M * math.sin(p - eta)),
                eta - 1.5 * math.asin(2 / M),
                eta - 0.5 * math.asin(2 / M),
                xtol=1e-14,
            )
            hi = eta + first_null_offset(M, eta)
            assert hi - lo == pytest.approx(rs.ray_beamwidth(M), abs=1e-11)

    def test_ula_beamwidth_boresight_equals_ray(self):
        for M in (4, 8, 64):
            assert rs.ula_beamwidth(0.0, M) == pytest.approx(rs.ray_beamwidth(M), abs=1e-15)

    def test_ula_beamwidth_half_space_codeword(self):
        # frozen: arcsin(0.75) - arcsin(0.25)
        phi_n = math.asin(0.5)
        assert rs.ula_beamwidth(phi_n, 8) == pytest.approx(0.5953818238394024, rel=1e-14)

    def test_ula_beamwidth_strictly_widens(self):
        assert rs.ula_beamwidth(0.5, 16) > rs.ula_beamwidth(0.25, 16)
        angles = np.linspace(0.0, 1.05, 40)  # stays below sin(phi) + 2/M = 1
        widths = [rs.ula_beamwidth(a, 16) for a in angles]
        assert np.all(np.diff(widths) > 0)

    def test_ula_never_narrower_than_ray(self):
        for M in (8, 16, 128):
            for phi_n in np.linspace(0.01, 1.0, 17):
                if math.sin(phi_n) + 2 / M <= 1:
                    assert rs.ula_beamwidth(phi_n, M) > rs.ray_beamwidth(M)

    def test_ula_beamwidth_rejects_edge_codeword(self):
        with pytest.raises(ValueError):
            rs.ula_beamwidth(math.asin(0.95), 8)


class TestCodebook:
    def test_small_codebook_size(self):
        assert rs.dft_codebook(6, PHI_MAX).n_codewords == 5

    def test_large_codebook_size_floor_formula(self):
        # floor formula gives 127 here (2*floor(64 sin(0.499 pi)) + 1)
        assert rs.dft_codebook(128, PHI_MAX).n_codewords == 127

    def test_center_codeword_is_boresight(self):
        cb = rs.dft_codebook(16, PHI_MAX)
        mid = (cb.n_codewords - 1) // 2
        assert cb.codeword_angles[mid] == 0.0

    def test_codewords_orthogonal_with_norm_m(self):
        cb = rs.dft_codebook(8, PHI_MAX)
        c = cb.matrix
        assert np.allclose(c.conj().T @ c, 8 * np.eye(cb.n_codewords), atol=1e-10)

    def test_beam_pattern_peak_and_null(self, ula_pattern):
        phi_n = math.asin(2 / 8)
        peak = rs.ula_beam_pattern(phi_n, phi_n, 8, ula_pattern)
        assert abs(peak) == pytest.approx(8 * math.sqrt(ula_pattern.gain(phi_n)), rel=1e-12)
        null_phi = math.asin(math.sin(phi_n) + 2 / 8)
        assert abs(rs.ula_beam_pattern(null_phi, phi_n, 8, ula_pattern)) < 1e-12

    def test_beam_pattern_matches_summation(self, ula_pattern):
        phi = 0.1
        brute = math.sqrt(ula_pattern.gain(phi)) * 8 * brute_kernel(8, math.sin(phi))
        assert rs.ula_beam_pattern(phi, 0.0, 8, ula_pattern) == pytest.approx(brute, rel=1e-12)


class TestBestBeam:
    def test_boresight_picks_center(self, ray_pattern, ula_pattern):
        cfg = rs.design_ray_array(8, PHI_MAX)
        cb = rs.dft_codebook(8, PHI_MAX)
        assert rs.best_beam(0.0, cfg, ray_pattern)[1] == 0
        assert rs.best_beam(0.0, cb, ula_pattern)[1] == 0

    def test_alignment_gives_full_gain(self, ray_pattern):
        cfg = rs.design_ray_array(8, PHI_MAX)
        gain, idx = rs.best_beam(cfg.orientations[(cfg.N - 1) // 2 + 1], cfg, ray_pattern)
        assert idx == 1
        assert gain == pytest.approx(8 * math.sqrt(ray_pattern.G0), rel=1e-12)

    def test_mid_cell_worst_case_value(self):
        iso = rs.ElementPattern.isotropic(0.0)
        cfg = rs.design_ray_array(8, PHI_MAX)
        phi = 0.5 * math.asin(2 / 8)
        gain, idx = rs.best_beam(phi, cfg, iso)
        expected = 8 * abs(brute_kernel(8, math.sin(phi)))
        assert gain == pytest.approx(expected, rel=1e-12)
        assert idx in (0, 1)  # exact straddle point

    def test_rejects_angles_outside_sector(self, ray_pattern):
        cfg = rs.design_ray_array(8, PHI_MAX)
        with pytest.raises(ValueError):
            rs.best_beam(PHI_MAX + 0.01, cfg, ray_pattern)

    @pytest.mark.parametrize("M", [8, 128])
    def test_argmax_matches_closed_form(self, M, ray_pattern, ula_pattern):
        cfg = rs.design_ray_array(M, PHI_MAX)
        cb = rs.dft_codebook(M, PHI_MAX)
        spacing = math.asin(2 / M)
        rng = np.random.default_rng(11)
        for phi in rng.uniform(-PHI_MAX, PHI_MAX, 400):
            n_ray = rs.nearest_ray_index(phi, M)
            if abs(n_ray) <= (cfg.N - 1) // 2 and (abs(n_ray) + 0.5) * spacing <= PHI_MAX:
                cell = phi / spacing
                if min(abs(cell - math.floor(cell)), abs(cell - math.ceil(cell))) > 1e-9:
                    assert rs.best_beam(phi, cfg, ray_pattern)[1] == n_ray
            n_cw = rs.nearest_codeword_index(phi, M)
            edge = math.sin(PHI_MAX)
            if abs(n_cw) <= (cb.n_codewords - 1) // 2 and (2 * abs(n_cw) + 1) / M <= edge:
                cell = M * math.sin(phi) / 2
                if min(abs(cell - math.floor(cell)), abs(cell - math.ceil(cell))) > 1e-9:
                    assert rs.best_beam(phi, cb, ula_pattern)[1] == n_cw
