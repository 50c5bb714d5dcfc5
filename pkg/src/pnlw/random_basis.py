"""Haar-random orthonormal bases of the eigenspaces ``E_n`` and Monte Carlo
checks of their concentration behaviour.

A uniform point on the unit sphere of ``E_n`` is ``u = sum_j x_j f_{n,j}``
with ``x`` uniform on ``S^{n**2 - 1}``; the first column of a Haar rotation
has that law, so single-vector statistics use normalised Gaussian vectors.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import harmonics
from ._validation import (ExhaustedAttemptsError, ResolutionError, check_exponent,
                          check_int, check_levels, check_real)
from .harmonics import VOLUME, SphereGrid, build_reference_basis, degree_slice
from .seeding import as_generator

_CHUNK_VALUES = 4_000_000


@dataclasses.dataclass
class BasisRotation:
    """Orthogonal ``Q`` with ``e_{n,k} = sum_j Q[j, k] f_{n,j}``."""

    Q: np.ndarray
    n: int | None = None
    seed: int | None = None
    draw_index: int | None = None

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        if self.Q.ndim != 2 or self.Q.shape[0] != self.Q.shape[1]:
            raise ValueError("Q must be a square matrix")
        if self.n is not None and self.Q.shape[0] != self.n**2:
            raise ValueError(f"Q has dimension {self.Q.shape[0]}, expected n**2={self.n**2}")

    @property
    def dim(self):
        return self.Q.shape[0]

    def orthogonality_error(self):
        return float(np.abs(self.Q.T @ self.Q - np.eye(self.dim)).max())


@dataclasses.dataclass
class TailEstimate:
    """Empirical exceedance probabilities with Wilson intervals."""

    levels: np.ndarray
    survival: np.ndarray
    n_samples: int
    ci_low: np.ndarray
    ci_high: np.ndarray
    envelope: np.ndarray | None = None
    confidence: float = 0.99

    @property
    def half_width(self):
        return np.maximum(self.survival - self.ci_low, self.ci_high - self.survival)

    def dominated(self):
        """True when the survival never exceeds the envelope beyond its CI."""
        if self.envelope is None:
            raise ValueError("no envelope attached")
        return bool(np.all(self.ci_low <= self.envelope))


@dataclasses.dataclass
class MedianEstimate:
    n: int
    q: float
    estimate: float
    n_samples: int
    ci_low: float
    ci_high: float


def wilson_interval(counts, n_samples, confidence=0.99):
    """Vectorised Wilson score interval for binomial proportions."""
    counts = np.asarray(counts, dtype=float)
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = counts / n_samples
    denom = 1 + z * z / n_samples
    centre = (p + z * z / (2 * n_samples)) / denom
    half = z * np.sqrt(p * (1 - p) / n_samples + z * z / (4 * n_samples**2)) / denom
    return np.clip(centre - half, 0, 1), np.clip(centre + half, 0, 1)


def tail_from_samples(samples, levels, confidence=0.99, envelope=None):
    """Survival ``P(X >= level)`` of a sample, with Wilson intervals."""
    samples = np.asarray(samples, dtype=float)
    levels = np.asarray(levels, dtype=float)
    ordered = np.sort(samples)
    counts = ordered.size - np.searchsorted(ordered, levels, side="left")
    low, high = wilson_interval(counts, ordered.size, confidence)
    return TailEstimate(levels, counts / ordered.size, ordered.size, low, high,
                        envelope=envelope, confidence=confidence)


def fit_gaussian_tail_rate(tail, min_count=5, max_survival=0.9):
    """Least-squares rate ``c`` in ``log P(X >= r) ~ a - c r**2``.

    Only levels with at least ``min_count`` exceedances and survival below
    ``max_survival`` take part.  Returns ``(c, a, r_squared)``.
    """
    counts = tail.survival * tail.n_samples
    keep = (counts >= min_count) & (tail.survival <= max_survival)
    if keep.sum() < 3:
        raise ValueError("fewer than three usable tail levels")
    x = tail.levels[keep] ** 2
    y = np.log(tail.survival[keep])
    fit = stats.linregress(x, y)
    return -fit.slope, fit.intercept, fit.rvalue**2


def sample_haar(N, rng=None):
    """Haar-distributed element of ``O(N)``.

    QR of a standard normal matrix, with columns flipped so that ``R`` has a
    positive diagonal; without the flip the law is not Haar.
    """
    N = check_int(N, "N", minimum=1)
    rng = as_generator(rng)
    Z = rng.standard_normal((N, N))
    Q, R = np.linalg.qr(Z)
    Q *= np.sign(np.diag(R))
    n = int(round(np.sqrt(N)))
    return BasisRotation(Q, n=n if n * n == N else None)


def uniform_sphere(dim, n_samples, rng=None):
    """``n_samples`` uniform points on ``S^{dim-1}``."""
    rng = as_generator(rng)
    x = rng.standard_normal((n_samples, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def rotate_degree_block(rotation, coeffs):
    """Map e-basis coefficients of degree ``rotation.n`` to reference ones."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != rotation.dim:
        raise ValueError(f"dimension mismatch: {coeffs.shape[-1]} vs {rotation.dim}")
    return coeffs @ rotation.Q.T


def rotated_basis_coefficients(rotation):
    """Reference coefficients of each ``e_{n,k}`` (rows indexed by ``k``)."""
    return rotation.Q.T.copy()


def lq_grid(n, q, extra=0):
    """Grid on which ``||u||_q`` of a degree-``n`` field is computed.

    For even integer ``q`` the rule is exact for ``|u|**q``.
    """
    if q == np.inf:
        return SphereGrid.for_degree(4 * (n - 1) + extra)
    return SphereGrid.for_degree(int(np.ceil(q)) * (n - 1) + extra)


def degree_lq_norms(n, block, q, grid=None):
    """``L^q`` norms of degree-``n`` fields given by rows of ``block``."""
    q = check_exponent(q, "q", minimum=1.0)
    grid = grid if grid is not None else lq_grid(n, q)
    if q != np.inf and grid.exactness_degree < 2 * (n - 1):
        raise ResolutionError(f"grid too coarse for degree {n}")
    basis = build_reference_basis(n)
    block = np.atleast_2d(np.asarray(block, dtype=float))
    chunk = max(1, _CHUNK_VALUES // grid.size)
    out = np.empty(block.shape[0])
    for start in range(0, block.shape[0], chunk):
        vals = basis.synthesize_degree(n, block[start:start + chunk], grid)
        out[start:start + chunk] = harmonics.lp_norm(vals, q, grid)
    return out


def sample_unit_norms(n, q, n_samples, rng=None, grid=None):
    """``||u||_q`` for ``n_samples`` uniform draws from the unit sphere of E_n."""
    n = check_int(n, "n", minimum=1)
    x = uniform_sphere(n * n, n_samples, rng)
    return degree_lq_norms(n, x, q, grid)


def bootstrap_median_ci(samples, n_resamples=1000, confidence=0.95, rng=None):
    rng = as_generator(rng)
    samples = np.asarray(samples)
    idx = rng.integers(0, samples.size, size=(n_resamples, samples.size))
    medians = np.median(samples[idx], axis=1)
    alpha = (1 - confidence) / 2
    return tuple(np.quantile(medians, [alpha, 1 - alpha]))


def estimate_median_lq(n, q, n_samples, rng=None, n_resamples=1000):
    """Median of ``||u||_q`` over the unit sphere of ``E_n``, with bootstrap CI."""
    n = check_int(n, "n", minimum=1)
    q = check_exponent(q, "q", minimum=2.0)
    n_samples = check_int(n_samples, "n_samples", minimum=100)
    rng = as_generator(rng)
    norms = sample_unit_norms(n, q, n_samples, rng)
    est = float(np.median(norms))
    lo, hi = bootstrap_median_ci(norms, n_resamples, rng=rng)
    return MedianEstimate(n, q, est, n_samples, min(lo, est), max(hi, est))


def empirical_tail(n, q, levels, n_samples, rng=None, median=None, confidence=0.99):
    """Survival of ``| ||u||_q - M_{n,q} |`` at the given levels.

    When ``median`` is omitted it is estimated from the same draws.
    """
    levels = check_levels(levels)
    rng = as_generator(rng)
    norms = sample_unit_norms(n, q, n_samples, rng)
    centre = float(np.median(norms)) if median is None else float(median)
    dev = np.abs(norms - centre)
    # the deviation of a constant-norm family is rounding noise
    dev[dev < 1e-12 * max(centre, 1.0)] = 0.0
    tail = tail_from_samples(dev, levels, confidence)
    if levels[0] == 0:
        tail.survival[0] = 1.0
    return tail


def bernstein_ratio(n, q, n_samples, rng=None):
    """``max ||u||_q / ||u||_2`` over draws and the zonal witness, over ``n**(1-2/q)``."""
    n = check_int(n, "n", minimum=1)
    q = check_exponent(q, "q", minimum=2.0)
    grid = lq_grid(n, q)
    norms = sample_unit_norms(n, q, n_samples, rng, grid)
    # zonal kernel centred on a grid node, so its sup-norm is seen exactly
    chi0, theta0, phi0 = grid.chi[0], grid.theta[0], grid.phi[0]
    zonal = harmonics.zonal_field(n, chi0, theta0, phi0).degree_block(n)
    z_ratio = degree_lq_norms(n, zonal, q, grid)[0] / np.linalg.norm(zonal)
    scale = n ** (1 - 2 / q) if q != np.inf else float(n)
    return float(max(norms.max(), z_ratio) / scale)


def coordinate_tail_check(N, t_levels, n_samples, rng=None, confidence=0.99,
                          chunk=20_000):
    """Survival of ``|x_1|`` for ``x`` uniform on ``S^{N-1}`` against ``2 exp(-(N-1) t**2 / 2)``."""
    N = check_int(N, "N", minimum=2)
    t_levels = check_levels(t_levels, "t_levels")
    rng = as_generator(rng)
    first = np.empty(n_samples)
    for start in range(0, n_samples, chunk):
        stop = min(n_samples, start + chunk)
        first[start:stop] = np.abs(uniform_sphere(N, stop - start, rng)[:, 0])
    envelope = 2 * np.exp(-(N - 1) * t_levels**2 / 2)
    return tail_from_samples(first, t_levels, confidence, envelope=envelope)


def lq_moment(n, q, n_samples, rng=None):
    """``(E ||u||_q**q)**(1/q)`` over the unit sphere of ``E_n``."""
    q = check_real(q, "q", minimum=2.0)
    norms = sample_unit_norms(n, q, n_samples, rng)
    return float(np.mean(norms**q) ** (1 / q))


@dataclasses.dataclass
class UniformBasisResult:
    rotations: dict
    attempts: dict
    max_ratio: dict

    @property
    def acceptance_rate(self):
        return {n: 1.0 / a for n, a in self.attempts.items()}


def basis_column_norms(rotation, q):
    """``||e_{n,k}||_q`` for every column of a degree-``n`` rotation."""
    return degree_lq_norms(rotation.n, rotated_basis_coefficients(rotation), q)


def search_uniform_basis(n_max, q_list, bound_constant, max_attempts=100, rng=None):
    """Rejection-sample, per degree, a rotation with ``||e_{n,k}||_q <= C sqrt(q)``.

    Raises :class:`ExhaustedAttemptsError` when some degree needs more than
    ``max_attempts`` draws; the partial result is attached as ``.result``.
    """
    n_max = check_int(n_max, "n_max", minimum=1)
    C = check_real(bound_constant, "bound_constant", minimum=0.0, strict_min=True)
    max_attempts = check_int(max_attempts, "max_attempts", minimum=1)
    q_list = [check_exponent(q, "q", minimum=2.0) for q in q_list]
    rng = as_generator(rng)
    result = UniformBasisResult({}, {}, {})
    for n in range(1, n_max + 1):
        for attempt in range(1, max_attempts + 1):
            rot = sample_haar(n * n, rng)
            rot.n, rot.draw_index = n, attempt - 1
            worst = max(float(np.max(basis_column_norms(rot, q)) / (C * np.sqrt(q)))
                        for q in q_list)
            if worst <= 1.0:
                result.rotations[n] = rot
                result.attempts[n] = attempt
                result.max_ratio[n] = worst
                break
        else:
            err = ExhaustedAttemptsError(
                f"no admissible rotation for n={n} after {max_attempts} attempts "
                f"(C={C} is too small at this truncation)")
            err.result = result
            raise err
    return result


class RandomBasis(TransformerMixin, BaseEstimator):
    """Per-degree Haar rotations of the reference harmonics.

    ``transform`` maps coefficients in the rotated basis ``e_{n,k}`` to
    reference coefficients; ``inverse_transform`` goes back.  With
    ``q_list`` set, rotations are rejection-sampled until every basis
    vector satisfies ``||e_{n,k}||_q <= bound_constant * sqrt(q)``.
    """

    def __init__(self, n_max=8, q_list=None, bound_constant=1.5, max_attempts=100,
                 random_state=None):
        self.n_max = n_max
        self.q_list = q_list
        self.bound_constant = bound_constant
        self.max_attempts = max_attempts
        self.random_state = random_state

    def fit(self, X=None, y=None):
        n_max = check_int(self.n_max, "n_max", minimum=1)
        rng = as_generator(self.random_state)
        if self.q_list:
            res = search_uniform_basis(n_max, self.q_list, self.bound_constant,
                                       self.max_attempts, rng)
            self.rotations_ = res.rotations
            self.attempts_ = res.attempts
        else:
            self.rotations_ = {}
            for n in range(1, n_max + 1):
                rot = sample_haar(n * n, rng)
                rot.n = n
                self.rotations_[n] = rot
        self.n_modes_ = harmonics.n_modes(n_max)
        return self

    def transform(self, X):
        check_is_fitted(self, "rotations_")
        return apply_rotations(self.rotations_, X)

    def inverse_transform(self, X):
        check_is_fitted(self, "rotations_")
        X = np.asarray(X, dtype=float)
        out = np.empty_like(X)
        for n, rot in self.rotations_.items():
            out[..., degree_slice(n)] = X[..., degree_slice(n)] @ rot.Q
        return out


def apply_rotations(rotations, coeffs):
    """Reference coefficients of ``sum c_{n,k} e_{n,k}`` for every degree block."""
    coeffs = np.asarray(coeffs, dtype=float)
    n_max = harmonics.SphereField(np.zeros(coeffs.shape[-1])).n_max
    out = np.empty_like(coeffs)
    for n in range(1, n_max + 1):
        if n not in rotations:
            raise KeyError(f"missing rotation for degree n={n}")
        out[..., degree_slice(n)] = rotate_degree_block(rotations[n],
                                                        coeffs[..., degree_slice(n)])
    return out


def constant_mode_lq(q):
    """``||f_{1,1}||_q = vol(S^3)**(1/q - 1/2)``."""
    return VOLUME ** (1 / q - 0.5) if q != np.inf else VOLUME**-0.5
