import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnlw._validation import ExhaustedAttemptsError
from pnlw.harmonics import VOLUME, SphereGrid, build_reference_basis, degree_slice, n_modes
from pnlw.random_basis import (
    BasisRotation, RandomBasis, apply_rotations, bernstein_ratio, constant_mode_lq,
    coordinate_tail_check, degree_lq_norms, empirical_tail, estimate_median_lq,
    fit_gaussian_tail_rate, lq_moment, rotate_degree_block, rotated_basis_coefficients,
    sample_haar, sample_unit_norms, search_uniform_basis, tail_from_samples,
    wilson_interval)


class TestHaar:
    def test_dimension_one(self, rng):
        for _ in range(10):
            assert sample_haar(1, rng).Q[0, 0] in (-1.0, 1.0)

    @given(st.integers(1, 60), st.integers(0, 2**32 - 1))
    def test_orthogonal(self, N, seed):
        assert sample_haar(N, np.random.default_rng(seed)).orthogonality_error() < 1e-12

    def test_large(self, rng):
        assert sample_haar(400, rng).orthogonality_error() < 1e-12

    def test_exchangeable_entry(self):
        rng = np.random.default_rng(9)
        draws = np.array([sample_haar(9, rng).Q[0, 0] ** 2 for _ in range(100_000)])
        se = draws.std() / np.sqrt(draws.size)
        assert abs(draws.mean() - 1 / 9) < 3 * se

    def test_sign_fix_gives_haar_determinant(self):
        # Haar on O(N) puts equal mass on both components
        rng = np.random.default_rng(3)
        dets = [np.linalg.det(sample_haar(4, rng).Q) for _ in range(4000)]
        assert abs(np.mean(np.sign(dets))) < 0.06

    def test_invalid(self):
        with pytest.raises(ValueError):
            sample_haar(0)
        with pytest.raises(ValueError):
            BasisRotation(np.eye(3), n=2)


class TestRotations:
    def test_identity(self, rng):
        block = rng.standard_normal(9)
        np.testing.assert_array_equal(rotate_degree_block(BasisRotation(np.eye(9), n=3), block),
                                      block)

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_isometry(self, n, seed):
        rng = np.random.default_rng(seed)
        rot = sample_haar(n * n, rng)
        rot.n = n
        E = rotated_basis_coefficients(rot)
        grid = SphereGrid.for_bandlimit(n)
        basis = build_reference_basis(n)
        full = np.zeros((n * n, basis.n_modes))
        full[:, degree_slice(n)] = E
        vals = basis.synthesize(full, grid)
        gram = np.tensordot(vals * grid.weights, vals, axes=((1, 2, 3), (1, 2, 3)))
        np.testing.assert_allclose(gram, np.eye(n * n), atol=1e-10)

    def test_transformer_round_trip(self, rng):
        rb = RandomBasis(n_max=4, random_state=5).fit()
        x = rng.standard_normal((3, n_modes(4)))
        np.testing.assert_allclose(rb.inverse_transform(rb.transform(x)), x, atol=1e-13)
        assert rb.get_params()["n_max"] == 4

    def test_missing_degree(self, rng):
        with pytest.raises(KeyError):
            apply_rotations({1: BasisRotation(np.eye(1), n=1)}, np.zeros(n_modes(2)))


class TestMedian:
    @pytest.mark.parametrize("q", [3, 4, 8])
    def test_constant_degree(self, q, rng):
        m = estimate_median_lq(1, q, 200, rng, n_resamples=50)
        assert m.estimate == pytest.approx(VOLUME ** (1 / q - 0.5), rel=1e-12)
        assert constant_mode_lq(q) == pytest.approx(m.estimate, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 5])
    def test_q2_is_one(self, n, rng):
        m = estimate_median_lq(n, 2, 300, rng, n_resamples=100)
        assert m.ci_low <= 1.0 + 1e-9 and m.ci_high >= 1.0 - 1e-9
        assert m.estimate == pytest.approx(1.0, abs=1e-9)

    def test_sqrt_q_scaling_bounded(self):
        rng = np.random.default_rng(4)
        ratios = [estimate_median_lq(n, q, 200, rng, n_resamples=20).estimate / np.sqrt(q)
                  for n in (2, 5, 8) for q in (4, 8, 16)]
        assert max(ratios) < 1.0

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            estimate_median_lq(3, 4, 10)


class TestTails:
    def test_zero_level(self, rng):
        tail = empirical_tail(4, 4, [0.0, 0.01], 500, rng)
        assert tail.survival[0] == 1.0

    def test_deterministic_degree(self, rng):
        tail = empirical_tail(1, 4, [0.0, 1e-6, 0.1], 500, rng)
        np.testing.assert_array_equal(tail.survival, [1.0, 0.0, 0.0])

    def test_rate_negative_and_steepens(self):
        rates = []
        for n in (4, 8):
            norms = sample_unit_norms(n, 4, 8000, np.random.default_rng(n))
            dev = np.abs(norms - np.median(norms))
            tail = tail_from_samples(dev, np.linspace(0, dev.max(), 300))
            rate, _, r2 = fit_gaussian_tail_rate(tail, min_count=20, max_survival=0.5)
            rates.append(rate)
        assert rates[0] > 0 and rates[1] > rates[0]

    def test_wilson_contains_estimate(self):
        lo, hi = wilson_interval(np.array([0, 5, 100]), 100)
        assert lo[0] == 0.0 and hi[2] == pytest.approx(1.0)
        assert lo[1] < 0.05 < hi[1]

    @given(st.lists(st.floats(0, 10), min_size=5, max_size=50))
    def test_survival_monotone(self, samples):
        tail = tail_from_samples(np.array(samples), np.linspace(0, 10, 11))
        assert np.all(np.diff(tail.survival) <= 0)
        assert np.all(tail.ci_low <= tail.survival + 1e-15)
        assert np.all(tail.survival <= tail.ci_high + 1e-15)


class TestBernstein:
    def test_q2(self, rng):
        assert bernstein_ratio(4, 2, 50, rng) == pytest.approx(1.0, rel=1e-10)

    @pytest.mark.parametrize("n", [2, 5])
    def test_sup_norm_zonal(self, n, rng):
        assert bernstein_ratio(n, np.inf, 50, rng) == pytest.approx(VOLUME**-0.5, rel=1e-6)

    def test_uniform_in_n(self):
        rng = np.random.default_rng(11)
        vals = [bernstein_ratio(n, 6, 100, rng) for n in range(2, 13)]
        assert max(vals) / min(vals) < 2.0


class TestCoordinateTail:
    def test_values(self, rng):
        tail = coordinate_tail_check(10, [0.0, 1.0, 1.5], 20_000, rng)
        assert tail.survival[0] == 1.0 and tail.envelope[0] == 2.0
        assert tail.envelope[1] == pytest.approx(2 * np.exp(-4.5))
        assert tail.survival[1] <= tail.envelope[1]
        assert tail.survival[2] == 0.0

    @pytest.mark.parametrize("N", [10, 50])
    def test_dominated(self, N):
        tail = coordinate_tail_check(N, np.linspace(0, 1, 41), 100_000,
                                     np.random.default_rng(N))
        assert tail.dominated()


class TestMoments:
    def test_constant_degree(self, rng):
        assert lq_moment(1, 6, 100, rng) == pytest.approx(VOLUME ** (1 / 6 - 0.5), rel=1e-12)

    def test_q2(self, rng):
        assert lq_moment(6, 2, 100, rng) == pytest.approx(1.0, rel=1e-10)

    def test_sqrt_q_bounded(self):
        rng = np.random.default_rng(8)
        vals = [lq_moment(n, q, 200, rng) / np.sqrt(q) for n in (2, 6, 10) for q in (4, 8, 16)]
        assert max(vals) < 1.0

    def test_norm_matches_synthesis(self, rng):
        block = rng.standard_normal((2, 16))
        grid = SphereGrid.for_degree(4 * 3)
        basis = build_reference_basis(4)
        full = np.zeros((2, basis.n_modes))
        full[:, degree_slice(4)] = block
        vals = basis.synthesize(full, grid)
        direct = np.tensordot(vals**4, grid.weights, axes=3) ** 0.25
        np.testing.assert_allclose(degree_lq_norms(4, block, 4, grid), direct, rtol=1e-12)


class TestUniformBasis:
    def test_constant_degree_only(self, rng):
        res = search_uniform_basis(1, [4, 8], 1.0, rng=rng)
        assert res.attempts == {1: 1}

    def test_q2_always_accepts(self, rng):
        res = search_uniform_basis(5, [2], 1.0, rng=rng)
        assert all(a == 1 for a in res.attempts.values())

    def test_desk_scale_search(self):
        res = search_uniform_basis(8, [4, 6, 8], 1.5, 200, np.random.default_rng(0))
        assert set(res.rotations) == set(range(1, 9))
        assert all(r <= 1.0 for r in res.max_ratio.values())
        assert all(0 < a <= 1 for a in res.acceptance_rate.values())

    def test_exhausted(self, rng):
        with pytest.raises(ExhaustedAttemptsError):
            search_uniform_basis(3, [4], 0.01, max_attempts=2, rng=rng)
