import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnlw.harmonics import SphereGrid, degrees, lp_norm, n_modes, synthesize
from pnlw.random_basis import RandomBasis
from pnlw.random_data import (
    CoefficientProfile, RandomDraw, StatePair, draw_coefficients, draw_data,
    expected_sobolev_sq, make_profile, mgf_check, series_growth_exponent,
    sobolev_divergence_stat)


class TestProfile:
    def test_critical_example(self):
        prof = make_profile(0.0, 1.55, 12)
        assert np.isfinite(prof.S)
        assert prof.critical_divergent
        assert not prof.diverges_at(0.0)

    def test_zero_amplitudes(self):
        prof = make_profile(0.0, 2.0, 6, scale=0.0)
        assert prof.S == 0.0

    @given(st.integers(1, 10), st.integers(0, 10))
    def test_partial_sums_split(self, n_max, N):
        prof = make_profile(0.2, 2.0, n_max)
        assert prof.S_low(N) + prof.S_high(N) == pytest.approx(prof.S)

    def test_sigma_out_of_range(self):
        with pytest.raises(ValueError, match="sigma"):
            make_profile(0.5, 3.0, 4)

    def test_divergent_choice(self):
        with pytest.raises(ValueError):
            make_profile(0.25, 1.7, 4)

    def test_mismatched_shapes(self):
        with pytest.raises(ValueError):
            CoefficientProfile(0.0, np.ones(5), np.ones(14))


class TestDraws:
    def test_zero_draw(self):
        prof = make_profile(0.0, 2.0, 3)
        z = np.zeros(n_modes(3))
        st_ = draw_data(prof, None, RandomDraw(z, z))
        assert not st_.pos.coeffs.any() and not st_.vel.coeffs.any()

    def test_unit_draw_identity_basis(self):
        prof = make_profile(0.0, 2.0, 3)
        one = np.ones(n_modes(3))
        st_ = draw_data(prof, None, RandomDraw(one, one))
        np.testing.assert_array_equal(st_.pos.coeffs, prof.u0)
        np.testing.assert_array_equal(st_.vel.coeffs, prof.u1)

    def test_second_moment(self):
        prof = make_profile(0.0, 1.55, 5)
        draw = draw_coefficients(5, "gaussian", np.random.default_rng(2), size=10_000)
        rb = RandomBasis(n_max=5, random_state=1).fit()
        state = draw_data(prof, rb.rotations_, draw)
        sq = np.sum(state.pos.coeffs**2, axis=-1)
        expected = expected_sobolev_sq(prof, 0.0)
        assert abs(sq.mean() - expected) < 3 * sq.std() / np.sqrt(sq.size)

    def test_l2_from_grid(self):
        prof = make_profile(0.0, 1.55, 4)
        state = draw_data(prof, None, draw_coefficients(4, rng=np.random.default_rng(0)))
        grid = SphereGrid.for_bandlimit(4)
        assert lp_norm(synthesize(state.pos, grid), 2, grid) == pytest.approx(
            np.linalg.norm(state.pos.coeffs))

    @pytest.mark.parametrize("law", ["gaussian", "rademacher"])
    def test_subgaussian_mgf(self, law):
        draw = draw_coefficients(20, law, np.random.default_rng(1), size=2000)
        mgf, bound = mgf_check(draw.a, np.linspace(-1.5, 1.5, 7))
        assert np.all(mgf <= bound * 1.05)

    def test_unknown_law(self):
        with pytest.raises(ValueError):
            draw_coefficients(2, "cauchy")

    def test_state_arithmetic(self):
        a = StatePair(np.ones(5), np.zeros(5))
        b = 2 * a - a
        np.testing.assert_array_equal(b.as_array(), a.as_array())
        assert StatePair.from_array(a.as_array()).n_max == 2


class TestRegularity:
    def test_bounded_at_sigma(self):
        # a faster-decaying profile keeps the partial sums visibly saturated
        prof = make_profile(0.0, 2.5, 24)
        exponent = series_growth_exponent(prof, 0.0, [8, 12, 16, 20, 24])
        assert abs(exponent) < 0.05

    def test_growth_above_sigma(self):
        prof = make_profile(0.0, 1.55, 24)
        assert series_growth_exponent(prof, 0.25, [8, 12, 16, 20, 24]) > 0.1

    def test_monte_carlo_growth(self):
        prof = make_profile(0.0, 1.55, 16)
        rep = sobolev_divergence_stat(prof, 0.5, [4, 8, 12, 16], 400, np.random.default_rng(3))
        assert rep.exponent > 0.2
        assert np.all(np.diff(rep.median_norm) > 0)

    def test_zero_profile(self):
        prof = make_profile(0.0, 2.0, 8, scale=0.0)
        rep = sobolev_divergence_stat(prof, 1.0, [2, 4, 8], 10, np.random.default_rng(0))
        assert rep.exponent == 0.0 and not rep.median_norm.any()

    def test_sweep_beyond_truncation(self):
        with pytest.raises(ValueError):
            sobolev_divergence_stat(make_profile(0.0, 2.0, 4), 0.0, [8], 5)

    def test_expected_sobolev(self):
        prof = make_profile(0.0, 2.0, 3)
        n = degrees(3)
        assert expected_sobolev_sq(prof, 1.0) == pytest.approx(np.sum(n**2 * n**-4.0))
