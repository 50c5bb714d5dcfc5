import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnlw._validation import OutOfImageError, RepresentationError
from pnlw.harmonics import VOLUME, SphereField, n_modes
from pnlw.random_data import StatePair, draw_coefficients, draw_data, make_profile
from pnlw.penrose import (
    DecayRateRegressor, EuclideanRadialGrid, PenroseChart, apply_H0, apply_H1,
    chart_forward, chart_inverse, conformal_factor0, eigen_residual, euclid_weighted_norm,
    fixed_time_norm, lq_transfer, pt0, pt0_inverse, radius_at_time, scattering_decay)
from pnlw.solver import solve

ATAN2 = 1.10714871779409
TWO_OVER_SQRT5 = 0.894427190999916
SQRT3_OVER_2 = 0.866025403784439
TWO_PI_CUBED = 62.0125533605996


def field(n_max, modes):
    return SphereField.from_modes(n_max, modes).coeffs


def random_state(seed, n_max=3, scale=1.0):
    prof = make_profile(0.0, 2.0, n_max, scale=scale)
    return draw_data(prof, None, draw_coefficients(n_max, rng=np.random.default_rng(seed)))


class TestChart:
    def test_origin(self):
        assert chart_forward(0.0, 0.0) == (0.0, 0.0, 2.0)

    def test_unit_radius(self):
        T, R, om = chart_forward(0.0, 1.0)
        assert (T, R, om) == pytest.approx((0.0, np.pi / 2, 1.0), abs=1e-15)

    def test_diagonal(self):
        T, R, om = chart_forward(1.0, 1.0)
        assert T == pytest.approx(ATAN2, abs=1e-14)
        assert R == pytest.approx(ATAN2, abs=1e-14)
        assert om == pytest.approx(TWO_OVER_SQRT5, abs=1e-14)

    def test_inverse_values(self):
        assert chart_inverse(0.0, 0.0) == (0.0, 0.0)
        assert chart_inverse(0.0, np.pi / 2) == pytest.approx((0.0, 1.0), abs=1e-15)
        assert chart_inverse(np.pi / 3, np.pi / 3) == pytest.approx(
            (SQRT3_OVER_2, SQRT3_OVER_2), abs=1e-14)

    def test_out_of_image(self):
        with pytest.raises(OutOfImageError):
            chart_inverse(2.0, 2.0)

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            chart_forward(0.0, -1.0)

    @given(st.floats(-50, 50), st.floats(0, 50))
    def test_round_trip(self, t, r):
        T, R, om = chart_forward(t, r)
        assert om > 0
        assert np.cos(T) + np.cos(R) == pytest.approx(om, rel=1e-12, abs=1e-15)
        t2, r2 = chart_inverse(T, R)
        scale = np.sqrt(1 + t * t + r * r)
        assert abs(t2 - t) <= 1e-12 * scale**2 and abs(r2 - r) <= 1e-12 * scale**2

    def test_jacobian_at_zero(self):
        r = np.linspace(0.1, 5, 9)
        h = 1e-5
        num = (chart_forward(0.0, r + h)[1] - chart_forward(0.0, r - h)[1]) / (2 * h)
        np.testing.assert_allclose(num, conformal_factor0(r), atol=1e-8)
        np.testing.assert_allclose(PenroseChart.dR_dr(0.0, r), conformal_factor0(r), rtol=1e-14)

    @given(st.floats(-20, 20), st.floats(0.01, 3.1))
    def test_radius_at_time(self, t, R):
        r = radius_at_time(t, R)
        assert chart_forward(t, r)[1] == pytest.approx(R, rel=1e-10)


class TestGrid:
    def test_volume(self):
        egrid = EuclideanRadialGrid(64, 2, 3)
        assert egrid.integrate(np.broadcast_to(egrid.omega0[:, None, None] ** 3,
                                               egrid.shape)) == pytest.approx(VOLUME, rel=1e-12)

    def test_measure_pullback(self):
        egrid = EuclideanRadialGrid.for_bandlimit(4, power=2)
        v = pt0_inverse(random_state(0, 4), egrid).g0 / egrid.omega0[:, None, None]
        om3 = egrid.omega0[:, None, None] ** 3
        assert egrid.integrate(om3 * v * v) == pytest.approx(egrid.sphere_integrate(v * v),
                                                             rel=1e-12)


class TestTrace:
    def test_zero(self):
        egrid = EuclideanRadialGrid.for_bandlimit(2)
        pair = pt0_inverse(StatePair.zeros(2), egrid)
        assert not pair.g0.any() and not pair.g1.any()

    def test_constant(self):
        egrid = EuclideanRadialGrid.for_bandlimit(2)
        c = 0.7
        pair = pt0_inverse(StatePair(field(2, {(1, 1): c * np.sqrt(VOLUME)}), np.zeros(5)), egrid)
        expected = c * conformal_factor0(egrid.r)[:, None, None]
        np.testing.assert_allclose(pair.g0, np.broadcast_to(expected, egrid.shape), rtol=1e-13)

    def test_round_trip(self):
        egrid = EuclideanRadialGrid.for_bandlimit(4)
        s = random_state(1, 4)
        back = pt0(pt0_inverse(s, egrid), 4)
        np.testing.assert_allclose(back.as_array(), s.as_array(), atol=1e-12)

    def test_l2_isometry(self):
        egrid = EuclideanRadialGrid.for_bandlimit(4)
        s = random_state(2, 4)
        s = StatePair(s.pos.coeffs / np.linalg.norm(s.pos.coeffs), s.vel.coeffs)
        g0 = pt0_inverse(s, egrid).g0
        assert euclid_weighted_norm(g0, egrid, 0.5) == pytest.approx(1.0, abs=1e-8)


class TestOperators:
    def test_constant_image_in_kernel(self):
        egrid = EuclideanRadialGrid.for_bandlimit(4)
        assert eigen_residual("H0", 1, 1, egrid) < 1e-6

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_h1_degree_two(self, k):
        egrid = EuclideanRadialGrid.for_bandlimit(4)
        assert eigen_residual("H1", 2, k, egrid) < 1e-5

    @pytest.mark.parametrize("op", ["H0", "H1"])
    def test_all_modes_degree_three(self, op):
        egrid = EuclideanRadialGrid.for_bandlimit(6)
        assert max(eigen_residual(op, 3, k, egrid) for k in range(1, 10)) < 1e-5

    def test_linear(self):
        egrid = EuclideanRadialGrid.for_bandlimit(3)
        a = pt0_inverse(random_state(3), egrid).g0
        b = pt0_inverse(random_state(4), egrid).g0
        np.testing.assert_allclose(apply_H0(2 * a - 3 * b, egrid),
                                   2 * apply_H0(a, egrid) - 3 * apply_H0(b, egrid),
                                   rtol=1e-12, atol=1e-11)

    def test_h1_linear(self):
        egrid = EuclideanRadialGrid.for_bandlimit(3)
        a = pt0_inverse(random_state(5), egrid).g1
        np.testing.assert_allclose(apply_H1(3 * a, egrid), 3 * apply_H1(a, egrid),
                                   rtol=1e-12, atol=1e-11)


class TestNorms:
    def test_zero(self):
        egrid = EuclideanRadialGrid.for_bandlimit(2)
        assert euclid_weighted_norm(np.zeros(egrid.shape), egrid) == 0.0

    @pytest.mark.parametrize("n,k", [(1, 1), (2, 3), (3, 5)])
    def test_inverse_derivative_of_mode(self, n, k):
        egrid = EuclideanRadialGrid.for_bandlimit(4)
        s = StatePair(np.zeros(n_modes(4)), field(4, {(n, k): 1.0}))
        g1 = pt0_inverse(s, egrid).g1
        val = euclid_weighted_norm(g1, egrid, -0.5, operator="H1", s=-1, n_max=4)
        assert val == pytest.approx(1 / n, abs=1e-6)

    def test_unrepresentable(self):
        egrid = EuclideanRadialGrid.for_bandlimit(4)
        g = pt0_inverse(random_state(6, 4), egrid).g0
        with pytest.raises(RepresentationError):
            euclid_weighted_norm(g, egrid, 0.5, s=1, n_max=2)


class TestLqTransfer:
    def test_constant_field(self):
        one = (lambda T: np.full(np.shape(T) + (1,), np.sqrt(VOLUME)), 1)
        res = lq_transfer(one, 4)
        assert res.euclid == pytest.approx(TWO_PI_CUBED, rel=1e-10)
        assert res.sphere == pytest.approx(TWO_PI_CUBED, rel=1e-10)

    def test_zero(self):
        res = lq_transfer(StatePair.zeros(2), 5)
        assert res.euclid == 0.0 and res.sphere == 0.0

    def test_linear_data_identity(self):
        res = lq_transfer(random_state(7, 2), 6)
        assert res.relative_gap < 1e-6 and res.bound_holds()

    def test_homogeneity(self):
        s = random_state(8, 2)
        a, b = lq_transfer(s, 4), lq_transfer(3 * s, 4)
        assert b.euclid == pytest.approx(81 * a.euclid, rel=1e-12)

    def test_small_exponent(self):
        with pytest.raises(ValueError):
            lq_transfer(StatePair.zeros(2), 3)


@pytest.fixture(scope="module")
def run():
    s = random_state(9, 4, scale=0.1)
    return s, solve(s, (0, np.pi), 1e-2)


class TestScattering:
    def test_linear_control(self, run):
        s, _ = run
        lin = solve(s, (0, np.pi), 1e-2, coupling=0.0)
        fit = scattering_decay(lin, s, 6, [2, 5, 10])
        assert np.all(fit.norms < 1e-8)

    def test_small_data_decay(self, run):
        s, traj = run
        fit = scattering_decay(traj, s, 6, np.geomspace(2, 40, 8))
        assert fit.beta >= 0.30

    def test_difference_scaling(self, run):
        s, traj = run
        double = lambda T: 2.0 * np.asarray(traj.at(T))  # noqa: E731
        assert fixed_time_norm(double, 4, 3.0, 6) == pytest.approx(
            2 * fixed_time_norm(traj.at, 4, 3.0, 6), rel=1e-12)

    def test_short_run_rejected(self, run):
        s, _ = run
        with pytest.raises(ValueError):
            scattering_decay(solve(s, (0, 1), 1e-2), s, 6, [2.0])


class TestRegressor:
    def test_exact_power(self):
        t = np.geomspace(1, 100, 10)
        model = DecayRateRegressor().fit(t, 3 * t ** -0.4)
        assert model.beta_ == pytest.approx(0.4, abs=1e-12)
        np.testing.assert_allclose(model.predict(t), 3 * t ** -0.4, rtol=1e-12)
        assert model.score(t, 3 * t ** -0.4) == pytest.approx(1.0)

    def test_nonpositive(self):
        with pytest.raises(ValueError):
            DecayRateRegressor().fit([1, 2], [1, 0])
