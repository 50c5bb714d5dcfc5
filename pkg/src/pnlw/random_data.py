"""Randomised initial data ``u0 = sum lambda a e``, ``u1 = sum mu b e`` and
their deterministic amplitude profiles."""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import stats

from . import harmonics
from ._validation import check_int, check_real
from .harmonics import SphereField, degrees, n_modes
from .random_basis import apply_rotations
from .seeding import as_generator

DISTRIBUTIONS = ("gaussian", "rademacher")


@dataclasses.dataclass
class CoefficientProfile:
    """Deterministic amplitudes ``u0[n,k]`` (``lambda``) and ``u1[n,k]`` (``mu``).

    ``S_M^N = sum_{N <= n <= M} n**(2 sigma) u0**2 + n**(2 (sigma - 1)) u1**2``
    is exposed through :meth:`partial_sum`; ``S_low(N) + S_high(N) == S``.
    """

    sigma: float
    u0: np.ndarray
    u1: np.ndarray
    alpha: float | None = None

    def __post_init__(self):
        self.u0 = np.asarray(self.u0, dtype=float)
        self.u1 = np.asarray(self.u1, dtype=float)
        if self.u0.shape != self.u1.shape:
            raise ValueError("u0 and u1 must have the same shape")
        self.n_max = SphereField(self.u0).n_max

    # lambda, mu notation for the same amplitudes
    @property
    def lam(self):
        return self.u0

    @property
    def mu(self):
        return self.u1

    def _terms(self):
        n = degrees(self.n_max)
        return n ** (2 * self.sigma) * self.u0**2 + n ** (2 * (self.sigma - 1)) * self.u1**2

    def partial_sum(self, low, high):
        """``S_high^low``: the sum over degrees ``low <= n <= high``."""
        n = degrees(self.n_max)
        mask = (n >= low) & (n <= high)
        return float(np.sum(self._terms()[mask]))

    def S_low(self, N):
        """``S_N``: degrees ``n <= N``."""
        return self.partial_sum(0, N)

    def S_high(self, N):
        """``S^N``: degrees ``n > N`` up to the truncation."""
        return self.partial_sum(N + 1, self.n_max)

    @property
    def S(self):
        return float(np.sum(self._terms()))

    def diverges_at(self, s):
        """Whether the untruncated ``H^s`` sum of a power-law profile diverges.

        Per degree there are ``n**2`` modes of size ``n**-alpha``, so the sum
        behaves like ``sum n**(2 + 2 s - 2 alpha)``.
        """
        if self.alpha is None:
            raise ValueError("divergence is only decided for power-law profiles")
        return bool(2 + 2 * s - 2 * self.alpha >= -1)

    @property
    def critical_divergent(self):
        """Flag for the ``H^{1/2} x H^{-1/2}`` level sum."""
        return self.diverges_at(0.5)

    def scaled(self, factor):
        return CoefficientProfile(self.sigma, self.u0 * factor, self.u1 * factor, self.alpha)


def make_profile(sigma, alpha, n_max, scale=1.0):
    """Power-law profile ``u0 = scale n**-alpha``, ``u1 = n u0`` on every mode.

    Raises ``ValueError`` when the ``sigma``-level sum would diverge
    (``alpha <= 3/2 + sigma``).
    """
    sigma = check_real(sigma, "sigma", minimum=0.0, maximum=0.5, strict_max=True)
    alpha = check_real(alpha, "alpha")
    n_max = check_int(n_max, "n_max", minimum=1)
    scale = check_real(scale, "scale", minimum=0.0)
    if alpha <= 1.5 + sigma:
        raise ValueError(
            f"alpha={alpha} makes the H^sigma sum diverge; need alpha > {1.5 + sigma}")
    n = degrees(n_max)
    u0 = scale * n ** (-alpha)
    return CoefficientProfile(sigma, u0, n * u0, alpha)


@dataclasses.dataclass
class RandomDraw:
    """Independent coefficient multipliers ``a[n,k]``, ``b[n,k]``."""

    a: np.ndarray
    b: np.ndarray
    distribution: str = "gaussian"
    subgaussian: float = 0.5


def draw_coefficients(n_max, distribution="gaussian", rng=None, size=None):
    """Sample ``a``, ``b``; both laws satisfy ``E exp(g a) <= exp(g**2 / 2)``.

    ``size`` adds leading batch axes.
    """
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
    rng = as_generator(rng)
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (n_modes(n_max),)
    if distribution == "gaussian":
        a, b = rng.standard_normal(shape), rng.standard_normal(shape)
    else:
        a = rng.choice([-1.0, 1.0], size=shape)
        b = rng.choice([-1.0, 1.0], size=shape)
    return RandomDraw(a, b, distribution, 0.5)


@dataclasses.dataclass
class StatePair:
    """Position and velocity fields ``(u, d_T u)`` sharing a band limit."""

    pos: SphereField
    vel: SphereField

    def __post_init__(self):
        if not isinstance(self.pos, SphereField):
            self.pos = SphereField(self.pos)
        if not isinstance(self.vel, SphereField):
            self.vel = SphereField(self.vel)
        if self.pos.n_max != self.vel.n_max:
            raise ValueError("pos and vel must share n_max")

    @property
    def n_max(self):
        return self.pos.n_max

    @classmethod
    def zeros(cls, n_max):
        return cls(SphereField.zeros(n_max), SphereField.zeros(n_max))

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        return cls(SphereField(arr[0].copy()), SphereField(arr[1].copy()))

    def as_array(self):
        return np.stack([self.pos.coeffs, self.vel.coeffs])

    def __add__(self, other):
        return StatePair(self.pos + other.pos, self.vel + other.vel)

    def __sub__(self, other):
        return StatePair(self.pos - other.pos, self.vel - other.vel)

    def __mul__(self, scalar):
        return StatePair(self.pos * scalar, self.vel * scalar)

    __rmul__ = __mul__


def draw_data(profile, rotations, draw):
    """Reference coefficients of ``(sum u0 a e_{n,k}, sum u1 b e_{n,k})``.

    ``rotations`` maps degree to :class:`BasisRotation`; ``None`` uses the
    reference basis itself.  Batched draws give batched coefficient arrays
    wrapped in a single :class:`StatePair`.
    """
    a = np.asarray(draw.a, dtype=float)
    b = np.asarray(draw.b, dtype=float)
    if a.shape[-1] != profile.u0.size or b.shape[-1] != profile.u1.size:
        raise ValueError("draw and profile dimensions differ")
    pos = profile.u0 * a
    vel = profile.u1 * b
    if rotations is not None:
        pos = apply_rotations(rotations, pos)
        vel = apply_rotations(rotations, vel)
    return StatePair(SphereField(pos), SphereField(vel))


def expected_sobolev_sq(profile, s, second_moment=1.0):
    """``E ||u0||_{H^s}**2 = sum n**(2s) u0**2 E a**2``."""
    n = degrees(profile.n_max)
    return float(np.sum(n ** (2 * s) * profile.u0**2) * second_moment)


def mgf_check(samples, gammas, c=0.5):
    """Empirical ``E exp(g a) <= exp(c g**2)`` on a grid of ``g``.

    Returns the empirical MGF and the bound.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    gammas = np.asarray(gammas, dtype=float)
    mgf = np.array([np.mean(np.exp(g * samples)) for g in gammas])
    return mgf, np.exp(c * gammas**2)


@dataclasses.dataclass
class GrowthReport:
    n_max_values: np.ndarray
    median_norm: np.ndarray
    exponent: float
    stderr: float


def sobolev_divergence_stat(profile, s, n_max_values, n_draws, rng=None,
                            distribution="gaussian"):
    """Median truncated ``||u0||_{H^s}`` versus truncation, with a log-log slope.

    Rotations are isometries on each degree block, so the norm is computed
    from the rotated-basis coefficients directly.  A clearly positive slope
    is the finite-truncation signature of almost-sure divergence.
    """
    s = check_real(s, "s")
    n_max_values = np.asarray(sorted(n_max_values), dtype=int)
    if n_max_values[-1] > profile.n_max:
        raise ValueError("sweep exceeds the profile truncation")
    rng = as_generator(rng)
    n = degrees(profile.n_max)
    draw = draw_coefficients(profile.n_max, distribution, rng, size=n_draws)
    weighted = (n**s * profile.u0 * draw.a) ** 2
    medians = np.array([
        np.median(np.sqrt(weighted[:, :harmonics.n_modes(m)].sum(axis=1)))
        for m in n_max_values])
    if np.all(medians == 0):
        return GrowthReport(n_max_values, medians, 0.0, 0.0)
    fit = stats.linregress(np.log(n_max_values), np.log(medians))
    return GrowthReport(n_max_values, medians, float(fit.slope), float(fit.stderr))


def series_growth_exponent(profile, s, n_max_values):
    """Log-log slope of ``sqrt(E ||u0||_{H^s}**2)`` from the exact partial sums."""
    n_max_values = np.asarray(sorted(n_max_values), dtype=int)
    n = degrees(profile.n_max)
    terms = n ** (2 * s) * profile.u0**2
    vals = [np.sqrt(terms[:harmonics.n_modes(m)].sum()) for m in n_max_values]
    return float(stats.linregress(np.log(n_max_values), np.log(vals)).slope)
