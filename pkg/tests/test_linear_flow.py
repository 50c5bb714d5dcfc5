import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from pnlw.harmonics import VOLUME, degrees, n_modes
from pnlw.linear_flow import (
    WeightedNormSpec, WindowError, apply_projection, evolve_coeffs, evolve_linear,
    fit_tail_shape, linear_energy, moment_growth_exponent, pair_with_weight,
    regime_norms, regime_spec, tail_experiment, weighted_spacetime_norm)
from pnlw.random_data import StatePair, draw_coefficients, draw_data, make_profile

# (2 pi^2)^(1/6 - 1/2) * (int (1 + |T|^(2/3))^-3 |cos T|^3 dT)^(1/3), integrated
# period by period with mpmath at 30 digits and frozen
E11_WEIGHTED_NORM = 0.321516050080831


def unit(n_max, index, slot="pos"):
    c = np.zeros(n_modes(n_max))
    c[index] = 1.0
    z = np.zeros_like(c)
    return StatePair(c, z) if slot == "pos" else StatePair(z, c)


def random_state(seed, n_max=4):
    rng = np.random.default_rng(seed)
    return StatePair(rng.standard_normal(n_modes(n_max)), rng.standard_normal(n_modes(n_max)))


class TestPropagator:
    def test_identity_at_zero(self):
        s = random_state(0)
        np.testing.assert_array_equal(evolve_linear(s, 0.0).as_array(), s.as_array())

    @pytest.mark.parametrize("T", [0.3, 1.0, -2.5])
    def test_constant_mode(self, T):
        out = evolve_linear(unit(2, 0), T)
        assert out.pos.coeffs[0] == pytest.approx(np.cos(T), abs=1e-15)
        assert out.vel.coeffs[0] == pytest.approx(-np.sin(T), abs=1e-15)
        assert not out.pos.coeffs[1:].any()

    @given(st.integers(0, 2**32 - 1))
    def test_full_period(self, seed):
        s = random_state(seed, 6)
        np.testing.assert_allclose(evolve_linear(s, 2 * np.pi).as_array(), s.as_array(),
                                   atol=1e-12)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 2**32 - 1))
    def test_group_law(self, t1, t2, seed):
        s = random_state(seed)
        two = evolve_linear(evolve_linear(s, t2), t1)
        np.testing.assert_allclose(two.as_array(), evolve_linear(s, t1 + t2).as_array(),
                                   atol=1e-12)

    @given(st.floats(-10, 10), st.integers(0, 4))
    def test_commutes_with_projection(self, T, N):
        s = random_state(1)
        a = apply_projection(evolve_linear(s, T), N)
        b = evolve_linear(apply_projection(s, N), T)
        np.testing.assert_array_equal(a.as_array(), b.as_array())

    def test_energy_conserved(self):
        s = random_state(2)
        assert linear_energy(evolve_linear(s, 1.7)) == pytest.approx(linear_energy(s), rel=1e-13)

    def test_batched_times(self):
        pos, vel = evolve_coeffs(np.ones(5), np.zeros(5), np.array([0.0, np.pi]))
        assert pos.shape == (2, 5)
        np.testing.assert_allclose(pos[1], np.cos(np.pi * degrees(2)))


class TestProjection:
    def test_zero_cutoff(self):
        assert not apply_projection(random_state(0), 0).as_array().any()

    def test_full_cutoff(self):
        s = random_state(0)
        np.testing.assert_array_equal(apply_projection(s, 4).as_array(), s.as_array())

    @given(st.integers(0, 5))
    def test_idempotent(self, N):
        once = apply_projection(random_state(3), N)
        np.testing.assert_array_equal(apply_projection(once, N).as_array(), once.as_array())


class TestWeightedNorm:
    def test_zero_state(self):
        assert weighted_spacetime_norm(StatePair.zeros(3), regime_spec(2)) == 0.0

    def test_constant_mode_oracle(self):
        val = weighted_spacetime_norm(unit(1, 0), WeightedNormSpec(r=3, p=6, delta=2 / 3))
        assert val == pytest.approx(E11_WEIGHTED_NORM, rel=1e-6)

    def test_frozen_value_against_quad(self):
        # half-period pieces out to 200 pi, then the period-averaged tail
        f = lambda T: (1 + T ** (2 / 3)) ** -3 * abs(np.cos(T)) ** 3  # noqa: E731
        edges = np.concatenate([[0.0], np.arange(np.pi / 2, 200 * np.pi, np.pi)])
        head = sum(integrate.quad(f, a, b, epsabs=1e-15, epsrel=1e-13)[0]
                   for a, b in zip(edges[:-1], edges[1:]))
        tail = 4 / (3 * np.pi) * integrate.quad(
            lambda T: (1 + T ** (2 / 3)) ** -3, edges[-1], np.inf)[0]
        oracle = VOLUME ** (1 / 6 - 0.5) * (2 * (head + tail)) ** (1 / 3)
        assert oracle == pytest.approx(E11_WEIGHTED_NORM, rel=1e-8)

    def test_homogeneity(self):
        s = random_state(4, 3)
        spec = regime_spec(2)
        assert weighted_spacetime_norm(2 * s, spec) == pytest.approx(
            2 * weighted_spacetime_norm(s, spec), rel=1e-12)

    def test_velocity_only_matches_shifted_position(self):
        # U(T)(0, e) = U(T - pi/2)(e, 0) for the constant mode; the weight breaks
        # the symmetry so only the period averages agree
        spec = WeightedNormSpec(r=2, p=2, delta=1.0)
        a = weighted_spacetime_norm(unit(1, 0), spec)
        b = weighted_spacetime_norm(unit(1, 0, "vel"), spec)
        assert a > 0 and b > 0 and abs(a - b) / a < 0.2

    def test_window_rejected(self):
        spec = WeightedNormSpec(r=3, p=6, delta=2 / 3, window=10.0)
        with pytest.raises(WindowError):
            weighted_spacetime_norm(unit(1, 0), spec)

    def test_wide_window_accepted(self):
        spec = WeightedNormSpec(r=1, p=np.inf, delta=2.0, window=1e7)
        assert spec.check_window() < 1e-6

    def test_non_integrable_weight(self):
        with pytest.raises(ValueError):
            WeightedNormSpec(r=3, p=6, delta=1 / 3)

    def test_pairing_constant(self):
        spec = WeightedNormSpec(r=2, p=2, delta=1.0)
        # int (1 + |T|)^-2 dT = 2
        assert pair_with_weight(np.ones(16), spec) == pytest.approx(2.0, rel=1e-10)

    def test_batched(self):
        prof = make_profile(0.0, 2.0, 3)
        state = draw_data(prof, None, draw_coefficients(3, rng=np.random.default_rng(0), size=3))
        batch = regime_norms(state, 2)
        single = regime_norms(StatePair(state.pos.coeffs[1], state.vel.coeffs[1]), 2)
        assert batch[1] == pytest.approx(single, rel=1e-12)

    def test_regime3_refinement_is_not_smaller(self):
        prof = make_profile(0.0, 2.0, 3)
        state = draw_data(prof, None, draw_coefficients(3, rng=np.random.default_rng(5)))
        coarse, fine = regime_norms(state, 3, refine=True)
        assert fine >= coarse * (1 - 1e-9)

    def test_unknown_regime(self):
        with pytest.raises(ValueError):
            regime_spec(4)


class TestTails:
    def test_zero_level(self):
        prof = make_profile(0.0, 1.55, 4)
        exp = tail_experiment(prof, None, 2, [0.0, 1e-9], 50, np.random.default_rng(0))
        assert exp.tail.survival[0] == 1.0 and exp.tail.survival[1] == 1.0

    def test_regime2_gaussian_shape(self):
        prof = make_profile(0.0, 1.55, 4)
        exp = tail_experiment(prof, None, 2, np.linspace(0.05, 1.5, 40), 600,
                              np.random.default_rng(1))
        assert exp.fit["slope"] < 0

    def test_regime1_dominance(self):
        prof = make_profile(0.0, 1.55, 5)
        levels = np.linspace(0.0, 1.0, 21)
        low = tail_experiment(prof, None, 1, levels, 300, np.random.default_rng(2), N=1)
        high = tail_experiment(prof, None, 1, levels, 300, np.random.default_rng(2), N=3)
        assert high.S_high < low.S_high
        assert np.all(high.tail.survival <= low.tail.survival)

    def test_fit_needs_levels(self):
        prof = make_profile(0.0, 2.0, 2)
        exp = tail_experiment(prof, None, 3, [0.0], 20, np.random.default_rng(0))
        assert np.isnan(fit_tail_shape(exp.tail, 3)["slope"])

    def test_moment_growth_subgaussian(self):
        x = np.abs(np.random.default_rng(0).standard_normal(200_000))
        assert moment_growth_exponent(x) < 0.5
