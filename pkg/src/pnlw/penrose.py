"""The Penrose chart between ``R x R^3`` and the Einstein cylinder, its trace
at ``t = 0``, the conjugated radial operators and the scattering decay.

Chart: ``T = atan(t + r) + atan(t - r)``, ``R = atan(t + r) - atan(t - r)``,
conformal factor ``Omega = cos T + cos R``.  At ``t = 0`` this is
``R = 2 atan r`` and ``Omega_0 = 2 / (1 + r**2)``.

Euclidean fields live on an :class:`EuclideanRadialGrid`, a tensor grid in
``(R, theta, phi)`` with ``r = tan(R / 2)``.  Radial derivatives are taken in
``R`` by cosine or sine series, which represent images of harmonics exactly.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np
from numpy.polynomial import legendre
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin

from . import harmonics
from ._validation import (
    OutOfImageError, RepresentationError, ResolutionError, check_exponent, check_int,
    check_real)
from .harmonics import SphereGrid, build_reference_basis
from .linear_flow import evolve_coeffs
from .random_data import StatePair


# chart --------------------------------------------------------------------

def chart_forward(t, r):
    """``(t, r) -> (T, R, Omega)``; ``R`` lies in ``[0, pi)`` and ``Omega > 0``."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    a, b = np.arctan(t + r), np.arctan(t - r)
    omega = 2.0 / np.sqrt((1.0 + (t + r) ** 2) * (1.0 + (t - r) ** 2))
    return a + b, a - b, omega


def chart_inverse(T, R):
    """``(T, R) -> (t, r)`` with ``t = sin T / Omega``, ``r = sin R / Omega``.

    Raises
    ------
    OutOfImageError
        If ``cos T + cos R <= 0`` anywhere.
    """
    T = np.asarray(T, dtype=float)
    R = np.asarray(R, dtype=float)
    omega = np.cos(T) + np.cos(R)
    if np.any(omega <= 0):
        raise OutOfImageError("cos T + cos R must be positive")
    return np.sin(T) / omega, np.sin(R) / omega


def conformal_factor0(r):
    """``Omega_0(r) = 2 / (1 + r**2)``."""
    r = np.asarray(r, dtype=float)
    return 2.0 / (1.0 + r * r)


def radius_at_time(t, R):
    """The ``r >= 0`` with ``R(t, r) = R`` (``R`` is increasing in ``r``).

    From ``tan R = 2 r / (1 + t**2 - r**2)``; the two algebraically equal
    forms are used where each is free of cancellation.
    """
    t = np.asarray(t, dtype=float)
    R = np.asarray(R, dtype=float)
    c, s = np.cos(R), np.sin(R)
    root = np.sqrt(c * c + (1.0 + t * t) * s * s)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = (1.0 + t * t) * s / (root + c)
        far = (root - c) / s
    return np.where(c >= 0, near, far)


@dataclasses.dataclass(frozen=True)
class PenroseChart:
    """Function object bundling the chart maps."""

    def forward(self, t, r):
        return chart_forward(t, r)

    def inverse(self, T, R):
        return chart_inverse(T, R)

    @staticmethod
    def dR_dr(t, r):
        """``dR/dr = Omega**2 (1 + t**2 + r**2) / 2``."""
        _, _, omega = chart_forward(t, r)
        return omega**2 * (1.0 + np.asarray(t) ** 2 + np.asarray(r) ** 2) / 2.0


# grids ---------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class EuclideanRadialGrid:
    """Midpoint nodes ``R_j = (j + 1/2) pi / n_r`` mapped by ``r = tan(R/2)``.

    The midpoint rule in ``R`` is exact for cosine polynomials of degree
    below ``2 n_r``, which covers every integrand built from images of
    band-limited harmonics.  Angular rules are those of :class:`SphereGrid`.
    """

    n_r: int
    n_theta: int
    n_phi: int

    def __post_init__(self):
        for name in ("n_r", "n_theta", "n_phi"):
            check_int(getattr(self, name), name, minimum=1)

    @classmethod
    def for_bandlimit(cls, n_max, power=2, extra=8):
        degree = power * (n_max - 1)
        return cls(degree + 2 * n_max + extra, degree // 2 + 1, degree + 1)

    @functools.cached_property
    def R(self):
        return (np.arange(self.n_r) + 0.5) * np.pi / self.n_r

    @functools.cached_property
    def r(self):
        return np.tan(self.R / 2)

    @functools.cached_property
    def s(self):
        """``(1 + r**2) / 2 = 1 / (1 + cos R)``."""
        return (1.0 + self.r**2) / 2.0

    @functools.cached_property
    def omega0(self):
        return 1.0 + np.cos(self.R)

    @functools.cached_property
    def _angular(self):
        return SphereGrid(1, self.n_theta, self.n_phi)

    @property
    def theta(self):
        return self._angular.theta

    @property
    def phi(self):
        return self._angular.phi

    @functools.cached_property
    def angular_weights(self):
        a = self._angular
        return a.theta_weights[:, None] * a.phi_weights[None, :]

    @functools.cached_property
    def r_weights(self):
        """Weights of ``int_0^inf f(r) r**2 dr``: ``(pi / n_r) r**2 dr/dR``."""
        return np.pi / self.n_r * self.r**2 * self.s

    @functools.cached_property
    def sphere_weights(self):
        """Weights of ``int_0^pi f(R) sin(R)**2 dR`` at the same nodes."""
        return np.pi / self.n_r * np.sin(self.R) ** 2

    @property
    def shape(self):
        return (self.n_r, self.n_theta, self.n_phi)

    @property
    def angular_bandlimit(self):
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)

    def integrate(self, values):
        """``int_{R^3} values dx`` over the trailing grid axes."""
        w = self.r_weights[:, None, None] * self.angular_weights[None]
        return np.tensordot(np.asarray(values, dtype=float), w, axes=3)

    def sphere_integrate(self, values):
        """``int_{S^3}`` of values given at the image nodes ``chi = R``."""
        w = self.sphere_weights[:, None, None] * self.angular_weights[None]
        return np.tensordot(np.asarray(values, dtype=float), w, axes=3)


@dataclasses.dataclass
class EuclideanPair:
    """Values of ``(g0, g1)`` on a Euclidean grid."""

    g0: np.ndarray
    g1: np.ndarray
    grid: EuclideanRadialGrid


def _tables(n_max, grid):
    basis = build_reference_basis(n_max)
    return (basis, basis.radial_table(grid.R), basis.polar_table(grid.theta),
            basis.azimuthal_table(grid.phi))


def sphere_values(coeffs, egrid):
    """Harmonic coefficients evaluated at ``(chi = R_j, theta, phi)``."""
    n_max = harmonics.SphereField(np.zeros(np.shape(coeffs)[-1])).n_max
    basis, A, B, F = _tables(n_max, egrid)
    return basis.synthesize_tensor(coeffs, None, None, None, tables=(A, B, F))


def sphere_coefficients(values, egrid, n_max):
    """Project values at the image nodes onto ``f_{n,k}``, ``n <= n_max``."""
    basis, A, B, F = _tables(n_max, egrid)
    w = egrid.sphere_weights[:, None, None] * egrid.angular_weights[None]
    fw = np.asarray(values, dtype=float) * w
    e = np.einsum("...ijk,mk->...mij", fw, F, optimize=True)
    d = np.einsum("...mij,lmj->...lmi", e, B, optimize=True)
    c = np.einsum("...lmi,nli->...nlm", d, A, optimize=True)
    return basis.unpad(c)


def pt0_inverse(state, egrid):
    """``(Omega_0 v0(2 atan r, w), Omega_0**2 v1(2 atan r, w))`` on the grid."""
    om = egrid.omega0[:, None, None]
    v0 = sphere_values(state.pos.coeffs, egrid)
    v1 = sphere_values(state.vel.coeffs, egrid)
    return EuclideanPair(om * v0, om**2 * v1, egrid)


def pt0(pair, n_max):
    """Inverse of :func:`pt0_inverse` by projection onto ``n <= n_max``."""
    om = pair.grid.omega0[:, None, None]
    return StatePair(sphere_coefficients(pair.g0 / om, pair.grid, n_max),
                     sphere_coefficients(pair.g1 / om**2, pair.grid, n_max))


# radial operators ----------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _radial_derivatives(n_r, parity):
    """First and second ``R``-derivative matrices on the midpoint nodes.

    ``parity`` 0 uses ``cos(k R)``, ``k < n_r``; parity 1 uses ``sin(k R)``,
    ``1 <= k <= n_r``.
    """
    R = (np.arange(n_r) + 0.5) * np.pi / n_r
    if parity == 0:
        k = np.arange(n_r)
        V, dV, d2V = np.cos(np.outer(R, k)), -k * np.sin(np.outer(R, k)), -k**2 * np.cos(np.outer(R, k))
    else:
        k = np.arange(1, n_r + 1)
        V, dV, d2V = np.sin(np.outer(R, k)), k * np.cos(np.outer(R, k)), -k**2 * np.sin(np.outer(R, k))
    inv = np.linalg.inv(V)
    return dV @ inv, d2V @ inv


def angular_coefficients(values, egrid, L=None):
    """2-sphere harmonic coefficients ``c[..., l, m + L, R]``."""
    L = egrid.angular_bandlimit if L is None else L
    basis = build_reference_basis(L + 1)
    B = basis.polar_table(egrid.theta)
    F = basis.azimuthal_table(egrid.phi)
    fw = np.asarray(values, dtype=float) * egrid.angular_weights
    e = np.einsum("...ijk,mk->...mij", fw, F, optimize=True)
    return np.einsum("...mij,lmj->...lmi", e, B, optimize=True), B, F


def _apply_radial(values, egrid, first_extra, zeroth):
    """``d_R^2 + (2 / sin R + first_extra) d_R + Lap_w / sin(R)**2 + zeroth``."""
    values = np.asarray(values, dtype=float)
    L = egrid.angular_bandlimit
    c, B, F = angular_coefficients(values, egrid, L)
    sinR = np.sin(egrid.R)
    first = 2.0 / sinR + first_extra
    out = np.zeros_like(c)
    for l in range(L + 1):
        D1, D2 = _radial_derivatives(egrid.n_r, l % 2)
        block = c[..., l, :, :]
        d1 = np.einsum("ij,...mj->...mi", D1, block)
        d2 = np.einsum("ij,...mj->...mi", D2, block)
        out[..., l, :, :] = d2 + first * d1 + (zeroth - l * (l + 1) / sinR**2) * block
    e = np.einsum("...lmi,lmj->...mij", out, B, optimize=True)
    return np.einsum("...mij,mk->...ijk", e, F, optimize=True)


def apply_H0(g, egrid):
    """``s**2 Lap g + s r d_r g + (1 + s) g`` with ``s = (1 + r**2) / 2``.

    In ``R`` this is ``g'' + (2 / sin R) g' + Lap_w g / sin(R)**2 + (1 + s) g``.
    """
    return _apply_radial(g, egrid, 0.0, 1.0 + egrid.s)


def apply_H1(h, egrid):
    """``s**2 Lap h + 3 s r d_r h + 6 s h``.

    In ``R`` this is ``h'' + (2 / sin R + 2 r) h' + Lap_w h / sin(R)**2 + 6 s h``.
    """
    return _apply_radial(h, egrid, 2.0 * egrid.r, 6.0 * egrid.s)


_OPERATOR_POWER = {"H0": 1, "H1": 2}


def euclid_weighted_norm(g, egrid, weight_exponent=0.5, operator="H0", s=0.0,
                         n_max=None, tol=1e-8):
    """``|| (2 / (1 + r**2))**weight_exponent (1 - H)**(s/2) g ||_{L^2(R^3)}``.

    For ``s != 0`` the field is expanded in the eigenfunctions of ``H``
    (images ``Omega_0 e`` for ``H0``, ``Omega_0**2 e`` for ``H1``, eigenvalue
    ``1 - n**2``) up to ``n_max``.

    Raises
    ------
    RepresentationError
        If the expansion misses more than ``tol`` of the field (relative).
    """
    g = np.asarray(g, dtype=float)
    om = egrid.omega0[:, None, None]
    weight = om ** (2 * weight_exponent)
    if s == 0:
        return float(np.sqrt(egrid.integrate(weight * g * g)))
    if operator not in _OPERATOR_POWER:
        raise ValueError("operator must be 'H0' or 'H1'")
    if n_max is None:
        raise ValueError("n_max is required for s != 0")
    a = _OPERATOR_POWER[operator]
    v = g / om**a
    coeffs = sphere_coefficients(v, egrid, n_max)
    back = sphere_values(coeffs, egrid)
    scale = np.sqrt(egrid.sphere_integrate(v * v))
    miss = np.sqrt(egrid.sphere_integrate((v - back) ** 2))
    if miss > tol * max(scale, np.finfo(float).tiny):
        raise RepresentationError(
            f"eigen-expansion up to n_max={n_max} misses {miss / scale:.2e} of the field")
    n = harmonics.degrees(n_max)
    scaled = sphere_values(coeffs * n**s, egrid) * om**a
    return float(np.sqrt(egrid.integrate(weight * scaled * scaled)))


def eigen_residual(operator, n, k, egrid, n_max=None):
    """Relative residual ``||H g - (1 - n**2) g|| / ||g||`` for the image of ``f_{n,k}``.

    The norm is the one making the image isometric to ``L^2(S^3)``.
    """
    n_max = n if n_max is None else n_max
    coeffs = harmonics.SphereField.from_modes(n_max, {(n, k): 1.0}).coeffs
    v = sphere_values(coeffs, egrid)
    om = egrid.omega0[:, None, None]
    a = _OPERATOR_POWER[operator]
    g = om**a * v
    Hg = apply_H0(g, egrid) if operator == "H0" else apply_H1(g, egrid)
    res = Hg - (1 - n * n) * g
    w = 0.5 if operator == "H0" else -0.5
    return (euclid_weighted_norm(res, egrid, w) / euclid_weighted_norm(g, egrid, w))


# space-time integrals ------------------------------------------------------

def _coefficient_source(w):
    """Normalise a trajectory-like input to ``T -> coefficients``."""
    if hasattr(w, "at") and hasattr(w, "times"):
        return w.at, harmonics.SphereField(w.pos[0]).n_max
    if isinstance(w, StatePair):
        g0, g1 = w.pos.coeffs, w.vel.coeffs
        return (lambda T: evolve_coeffs(g0, g1, np.asarray(T, dtype=float))[0]), w.n_max
    if isinstance(w, tuple) and callable(w[0]):
        return w
    raise TypeError("expected a Trajectory, a StatePair or a (callable, n_max) tuple")


def _values_at(coeff_fn, n_max, T, R, theta, phi):
    """Field values at scattered ``(T_s, R_s)`` times the angular grid."""
    T = np.asarray(T, dtype=float).ravel()
    R = np.asarray(R, dtype=float).ravel()
    basis = build_reference_basis(n_max)
    c = basis.pad(np.reshape(coeff_fn(T), (T.size, -1)))
    A = basis.radial_table(R)
    d = np.einsum("snlm,nls->slm", c, A, optimize=True)
    e = np.einsum("slm,lmj->smj", d, basis.polar_table(theta), optimize=True)
    return np.einsum("smj,mk->sjk", e, basis.azimuthal_table(phi), optimize=True)


@dataclasses.dataclass
class LqTransfer:
    q: float
    euclid: float
    sphere: float
    sphere_full: float

    @property
    def relative_gap(self):
        return abs(self.euclid - self.sphere) / max(abs(self.sphere), np.finfo(float).tiny)

    @property
    def euclid_norm(self):
        return self.euclid ** (1 / self.q)

    @property
    def cylinder_norm(self):
        """``||w||_{L^q([-pi, pi] x S^3)}``."""
        return self.sphere_full ** (1 / self.q)

    def bound_holds(self):
        """``||h||_{L^q} <= 2**((q - 4)/q) ||w||_{L^q}`` since ``Omega <= 2``."""
        return self.euclid_norm <= 2 ** ((self.q - 4) / self.q) * self.cylinder_norm * (1 + 1e-12)


def lq_transfer(w, q, n_nodes=64, angular=None):
    """Both sides of ``int |h|**q r**2 dr dt dw = int_{Omega>0} |w|**q Omega**(q-4) sin(R)**2``.

    ``h = Omega w`` is the Euclidean pull-back of the cylinder field ``w``.
    The Euclidean side is integrated in the null coordinates
    ``u = t - r = tan(beta)``, ``v = t + r = tan(alpha)``; the cylinder side
    over the triangle ``|T| < pi - R``.  ``w`` may be a :class:`Trajectory`
    on ``[-pi, pi]``, linear data (a :class:`StatePair`) or a
    ``(callable, n_max)`` pair.

    Returns
    -------
    LqTransfer
        The two integrals (``q``-th powers) and the full-cylinder integral.
    """
    q = check_exponent(q, "q", minimum=4.0)
    if not np.isfinite(q):
        raise ValueError("q must be finite")
    coeff_fn, n_max = _coefficient_source(w)
    if angular is None:
        deg = int(np.ceil(q)) * (n_max - 1) + 4
        angular = SphereGrid(1, deg // 2 + 1, deg + 1)
    aw = angular.theta_weights[:, None] * angular.phi_weights[None, :]
    x, wx = legendre.leggauss(n_nodes)

    def ang(vals):
        return np.tensordot(np.abs(vals) ** q, aw, axes=2)

    # cylinder side
    R = (x + 1) * np.pi / 2
    wR = wx * np.pi / 2
    half = (np.pi - R)[:, None] * x[None, :]
    wT = (np.pi - R)[:, None] * wx[None, :]
    RR = np.broadcast_to(R[:, None], half.shape)
    vals = _values_at(coeff_fn, n_max, half, RR, angular.theta, angular.phi)
    omega = np.cos(half) + np.cos(RR)
    integrand = ang(vals).reshape(half.shape) * omega ** (q - 4) * np.sin(RR) ** 2
    sphere = float(np.sum(wR[:, None] * wT * integrand))
    full_T = np.pi * x
    TT, RF = np.meshgrid(full_T, R, indexing="ij")
    vals = _values_at(coeff_fn, n_max, TT, RF, angular.theta, angular.phi)
    integrand = ang(vals).reshape(TT.shape) * np.sin(RF) ** 2
    sphere_full = float(np.sum(np.pi * wx[:, None] * wR[None, :] * integrand))

    # Euclidean side
    alpha = x * np.pi / 2
    w_alpha = wx * np.pi / 2
    beta = (x[None, :] + 1) / 2 * (alpha[:, None] + np.pi / 2) - np.pi / 2
    w_beta = wx[None, :] * (alpha[:, None] + np.pi / 2) / 2
    v = np.tan(alpha)[:, None]
    u = np.tan(beta)
    t, r = (u + v) / 2, (v - u) / 2
    T, Rn, omega = chart_forward(t, r)
    vals = _values_at(coeff_fn, n_max, T, Rn, angular.theta, angular.phi)
    jac = 0.5 / np.cos(alpha)[:, None] ** 2 / np.cos(beta) ** 2
    integrand = ang(vals).reshape(T.shape) * omega**q * r**2 * jac
    euclid = float(np.sum(w_alpha[:, None] * w_beta * integrand))
    return LqTransfer(q, euclid, sphere, sphere_full)


def fixed_time_norm(coeff_fn, n_max, t, q, n_nodes=96, angular=None):
    """``||Omega w(T(t, .), R(t, .), .)||_{L^q(R^3)}`` at one Euclidean time.

    Integrated in ``R`` using ``r**2 dr = 2 sin(R)**2 / (Omega**4 (1 + t**2 + r**2)) dR``.
    """
    if angular is None:
        deg = int(np.ceil(q)) * (n_max - 1) + 4
        angular = SphereGrid(1, deg // 2 + 1, deg + 1)
    aw = angular.theta_weights[:, None] * angular.phi_weights[None, :]
    x, wx = legendre.leggauss(n_nodes)
    R = (x + 1) * np.pi / 2
    wR = wx * np.pi / 2
    r = radius_at_time(t, R)
    T, _, omega = chart_forward(np.full_like(r, t), r)
    vals = _values_at(coeff_fn, n_max, T, R, angular.theta, angular.phi)
    ang = np.tensordot(np.abs(vals) ** q, aw, axes=2)
    jac = 2.0 * np.sin(R) ** 2 / (omega**4 * (1.0 + t * t + r * r))
    return float(np.sum(wR * ang * omega**q * jac)) ** (1.0 / q)


@dataclasses.dataclass
class ScatteringFit:
    t: np.ndarray
    norms: np.ndarray
    beta: float
    stderr: float
    intercept: float
    interpolation_error: float
    q: float


def _difference_source(u_traj, lin, stride=1):
    """Cubic Hermite interpolant of ``u - U(T)(v0, v1)`` built from snapshots.

    Subtracting before interpolating keeps the interpolation error relative
    to the (small) difference rather than to ``u``.
    """
    from scipy import interpolate

    times = u_traj.times[::stride]
    if isinstance(lin, StatePair):
        lp, lv = evolve_coeffs(lin.pos.coeffs, lin.vel.coeffs, times)
    elif hasattr(lin, "at"):
        lp, lv = lin.at(times), lin.velocity_at(times)
    else:
        raise TypeError("lin must be linear data or a linear trajectory")
    dp = u_traj.pos[::stride] - lp
    dv = u_traj.vel[::stride] - lv
    return interpolate.CubicHermiteSpline(times, dp, dv, axis=0)


def scattering_decay(u_traj, lin, q, t_list, n_nodes=96, max_interp_error=1e-4,
                     abs_floor=1e-10):
    """``||PT^{-1}(u - U(T)(v0, v1))(t)||_{L^q(R^3)}`` and its power-law fit.

    ``u_traj`` must cover ``T in [0, pi]``; ``lin`` is the linear data
    ``(v0, v1)`` or a linear trajectory.  The interpolation error is
    estimated by repeating the computation from every other snapshot
    (cubic Hermite error ratio 16), relative to the largest norm or
    ``abs_floor``, whichever is bigger.

    Raises
    ------
    ResolutionError
        If the interpolation error estimate exceeds ``max_interp_error``.
    """
    q = check_real(q, "q", minimum=18 / 5, maximum=6.0, strict_min=True)
    t_list = np.asarray(t_list, dtype=float)
    if np.any(t_list <= 0):
        raise ValueError("t_list must be positive")
    if u_traj.times[0] > 1e-12 or u_traj.times[-1] < np.pi - 1e-12:
        raise ValueError("the trajectory must cover [0, pi]")
    n_max = u_traj.n_max
    fine = _difference_source(u_traj, lin)
    coarse = _difference_source(u_traj, lin, stride=2)
    norms = np.array([fixed_time_norm(fine, n_max, t, q, n_nodes) for t in t_list])
    rough = np.array([fixed_time_norm(coarse, n_max, t, q, n_nodes) for t in t_list])
    scale = max(float(np.max(np.abs(norms))), abs_floor)
    err = float(np.max(np.abs(rough - norms)) / scale / 15.0)
    if err > max_interp_error:
        raise ResolutionError(f"interpolation error {err:.2e} too large; refine dt")
    model = DecayRateRegressor().fit(t_list, norms) if np.all(norms > 0) else None
    beta = model.beta_ if model else np.nan
    se = model.stderr_ if model else np.nan
    icpt = model.intercept_ if model else np.nan
    return ScatteringFit(t_list, norms, beta, se, icpt, err, q)


class DecayRateRegressor(RegressorMixin, BaseEstimator):
    """Least-squares power law ``y ~ exp(intercept) * t**(-beta)``."""

    def fit(self, X, y):
        t = np.asarray(X, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if np.any(t <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive t and y")
        res = stats.linregress(np.log(t), np.log(y))
        self.beta_ = -float(res.slope)
        self.stderr_ = float(res.stderr)
        self.intercept_ = float(res.intercept)
        return self

    def predict(self, X):
        t = np.asarray(X, dtype=float).ravel()
        return np.exp(self.intercept_) * t ** (-self.beta_)


__all__ = [
    "chart_forward", "chart_inverse", "conformal_factor0", "radius_at_time",
    "PenroseChart", "EuclideanRadialGrid", "EuclideanPair", "pt0_inverse", "pt0",
    "apply_H0", "apply_H1", "euclid_weighted_norm", "eigen_residual", "lq_transfer",
    "LqTransfer", "fixed_time_norm", "scattering_decay", "ScatteringFit",
    "DecayRateRegressor", "sphere_values", "sphere_coefficients",
]
