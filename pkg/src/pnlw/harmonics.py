"""Real hyperspherical harmonics on S^3 and their quadrature transforms.

Points of S^3 are written in hyperspherical coordinates ``(chi, theta, phi)``
with volume element ``sin(chi)**2 sin(theta) dchi dtheta dphi``.  The
eigenspace ``E_n`` of ``1 - Laplacian`` with eigenvalue ``n**2`` is spanned by

    f_{n,l,m} = A_{n,l}(chi) * B_{l,|m|}(theta) * F_m(phi),   0 <= l < n, |m| <= l,

with ``A`` a normalised ``sin(chi)**l * C^{(l+1)}_{n-1-l}(cos chi)`` Gegenbauer
factor, ``B`` a normalised associated Legendre function and ``F`` a real
Fourier mode.  Within a degree the index ``k = l**2 + l + m + 1`` runs over
``1..n**2``.  Coefficients are stored flat, degree by degree.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np
from numpy.polynomial import legendre
from scipy import special
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import ResolutionError, check_exponent, check_int, check_real

VOLUME = 2.0 * np.pi**2


def n_modes(n_max):
    """Number of modes with degree ``n <= n_max`` (sum of ``n**2``)."""
    return n_max * (n_max + 1) * (2 * n_max + 1) // 6


def degree_slice(n):
    """Slice of the flat coefficient vector holding degree ``n``."""
    start = n_modes(n - 1)
    return slice(start, start + n * n)


def mode_index(n, k):
    """Flat position of the mode ``(n, k)`` (``k`` is 1-based)."""
    if not 1 <= k <= n * n:
        raise ValueError(f"k must lie in [1, {n * n}] for n={n}, got {k}")
    return n_modes(n - 1) + k - 1


@dataclasses.dataclass(frozen=True)
class HarmonicIndex:
    n: int
    k: int

    def __post_init__(self):
        check_int(self.n, "n", minimum=1)
        if not 1 <= self.k <= self.n**2:
            raise ValueError(f"k must lie in [1, n**2], got {self.k}")

    @property
    def l(self):
        return int(np.sqrt(self.k - 1))

    @property
    def m(self):
        return self.k - 1 - self.l**2 - self.l

    @property
    def eigenvalue(self):
        """Eigenvalue of ``1 - Laplacian``."""
        return self.n**2


@functools.lru_cache(maxsize=None)
def mode_table(n_max):
    """Integer arrays ``(n, k, l, m)`` labelling the flat coefficient layout."""
    n, k, l, m = [], [], [], []
    for deg in range(1, n_max + 1):
        for ll in range(deg):
            for mm in range(-ll, ll + 1):
                n.append(deg)
                l.append(ll)
                m.append(mm)
                k.append(ll * ll + ll + mm + 1)
    out = tuple(np.array(a, dtype=int) for a in (n, k, l, m))
    for a in out:
        a.flags.writeable = False
    return out


def degrees(n_max):
    """Degree label ``n`` of every flat mode, as floats."""
    return mode_table(n_max)[0].astype(float)


@dataclasses.dataclass(frozen=True)
class SphereGrid:
    """Tensor-product quadrature on S^3.

    The chi rule is Gauss for the weight ``sqrt(1 - x**2)`` in ``x = cos chi``,
    the theta rule Gauss-Legendre in ``cos theta`` and the phi rule the
    uniform trapezoid.  Integrands built from harmonics of total degree at
    most ``exactness_degree`` are integrated exactly.
    """

    n_chi: int
    n_theta: int
    n_phi: int

    def __post_init__(self):
        for name in ("n_chi", "n_theta", "n_phi"):
            check_int(getattr(self, name), name, minimum=1)

    @classmethod
    def for_degree(cls, degree):
        """Smallest grid exact for integrands of total degree ``degree``."""
        degree = check_int(degree, "degree", minimum=0)
        half = degree // 2 + 1
        return cls(half, half, degree + 1)

    @classmethod
    def for_bandlimit(cls, n_max, power=2):
        """Grid exact for products of ``power`` fields band-limited to ``n_max``."""
        return cls.for_degree(power * (n_max - 1))

    @property
    def exactness_degree(self):
        return min(2 * self.n_chi - 1, 2 * self.n_theta - 1, self.n_phi - 1)

    @property
    def shape(self):
        return (self.n_chi, self.n_theta, self.n_phi)

    @property
    def size(self):
        return self.n_chi * self.n_theta * self.n_phi

    @functools.cached_property
    def chi(self):
        return np.arange(1, self.n_chi + 1) * np.pi / (self.n_chi + 1)

    @functools.cached_property
    def chi_weights(self):
        return np.pi / (self.n_chi + 1) * np.sin(self.chi) ** 2

    @functools.cached_property
    def _theta_rule(self):
        x, w = legendre.leggauss(self.n_theta)
        return np.arccos(x), w

    @property
    def theta(self):
        return self._theta_rule[0]

    @property
    def theta_weights(self):
        return self._theta_rule[1]

    @functools.cached_property
    def phi(self):
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @functools.cached_property
    def phi_weights(self):
        return np.full(self.n_phi, 2.0 * np.pi / self.n_phi)

    @functools.cached_property
    def weights(self):
        """Full nodal weights with shape ``self.shape``."""
        return (self.chi_weights[:, None, None] * self.theta_weights[None, :, None]
                * self.phi_weights[None, None, :])

    def nodes(self):
        """Broadcast coordinate arrays ``(chi, theta, phi)`` of shape ``self.shape``."""
        return np.meshgrid(self.chi, self.theta, self.phi, indexing="ij")

    def integrate(self, values):
        values = np.asarray(values)
        return np.tensordot(values, self.weights, axes=3)


def radial_factor(n, l, chi):
    """Normalised ``sin(chi)**l C^{(l+1)}_{n-1-l}(cos chi)``."""
    chi = np.asarray(chi, dtype=float)
    log_norm2 = (np.log(np.pi) - (1 + 2 * l) * np.log(2.0)
                 + special.gammaln(n + l + 1) - special.gammaln(n - l)
                 - np.log(n) - 2 * special.gammaln(l + 1))
    poly = special.eval_gegenbauer(n - 1 - l, l + 1.0, np.cos(chi))
    return np.exp(-0.5 * log_norm2) * np.sin(chi) ** l * poly


def polar_factor(l, m, theta):
    """Associated Legendre ``P_l^|m|(cos theta)`` normalised on ``[0, pi]``."""
    m = abs(m)
    theta = np.asarray(theta, dtype=float)
    log_norm = 0.5 * (np.log((2 * l + 1) / 2.0)
                      + special.gammaln(l - m + 1) - special.gammaln(l + m + 1))
    return np.exp(log_norm) * special.lpmv(m, l, np.cos(theta))


def azimuthal_factor(m, phi):
    phi = np.asarray(phi, dtype=float)
    if m == 0:
        return np.full_like(phi, 1.0 / np.sqrt(2.0 * np.pi))
    if m > 0:
        return np.cos(m * phi) / np.sqrt(np.pi)
    return np.sin(-m * phi) / np.sqrt(np.pi)


class ReferenceBasis:
    """Fixed orthonormal basis ``f_{n,k}`` of every ``E_n`` with ``n <= n_max``.

    Coefficient arrays are flat with trailing axis ``n_modes(n_max)``; any
    leading axes are treated as a batch.
    """

    def __init__(self, n_max):
        self.n_max = check_int(n_max, "n_max", minimum=1)
        self.n_modes = n_modes(self.n_max)
        n, _, l, m = mode_table(self.n_max)
        self._pad_index = (n - 1, l, m + self.n_max - 1)
        self.degrees = n.astype(float)

    def __repr__(self):
        return f"ReferenceBasis(n_max={self.n_max})"

    # tables --------------------------------------------------------------
    def radial_table(self, chi):
        """``A[n-1, l, i]``, zero where ``l >= n``."""
        chi = np.atleast_1d(np.asarray(chi, dtype=float))
        out = np.zeros((self.n_max, self.n_max, chi.size))
        for n in range(1, self.n_max + 1):
            for l in range(n):
                out[n - 1, l] = radial_factor(n, l, chi)
        return out

    def polar_table(self, theta):
        """``B[l, m + n_max - 1, j]``, zero where ``|m| > l``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        L = self.n_max - 1
        out = np.zeros((self.n_max, 2 * L + 1, theta.size))
        for l in range(self.n_max):
            for m in range(-l, l + 1):
                out[l, m + L] = polar_factor(l, m, theta)
        return out

    def azimuthal_table(self, phi):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        L = self.n_max - 1
        return np.stack([azimuthal_factor(m, phi) for m in range(-L, L + 1)])

    @functools.lru_cache(maxsize=16)
    def grid_tables(self, grid):
        return (self.radial_table(grid.chi), self.polar_table(grid.theta),
                self.azimuthal_table(grid.phi))

    # layout --------------------------------------------------------------
    def pad(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] != self.n_modes:
            raise ValueError(
                f"expected trailing axis of length {self.n_modes}, got {coeffs.shape[-1]}")
        L = self.n_max - 1
        out = np.zeros(coeffs.shape[:-1] + (self.n_max, self.n_max, 2 * L + 1))
        out[(...,) + self._pad_index] = coeffs
        return out

    def unpad(self, padded):
        return padded[(...,) + self._pad_index]

    # transforms ----------------------------------------------------------
    def synthesize_tensor(self, coeffs, chi, theta, phi, tables=None):
        """Values on the tensor product of arbitrary node sets.

        Returns an array of shape ``batch + (len(chi), len(theta), len(phi))``.
        """
        A, B, F = tables if tables is not None else (
            self.radial_table(chi), self.polar_table(theta), self.azimuthal_table(phi))
        c = self.pad(coeffs)
        d = np.einsum("...nlm,nli->...lmi", c, A, optimize=True)
        e = np.einsum("...lmi,lmj->...mij", d, B, optimize=True)
        return np.einsum("...mij,mk->...ijk", e, F, optimize=True)

    def synthesize(self, coeffs, grid):
        return self.synthesize_tensor(coeffs, None, None, None,
                                      tables=self.grid_tables(grid))

    def degree_partials(self, coeffs, grid):
        """Per-degree values after the ``chi`` and ``theta`` stages.

        Returns ``batch + (n_max, n_chi, n_theta, 2 n_max - 1)``; summing over
        the degree axis and applying :meth:`azimuthal_stage` gives
        :meth:`synthesize`.
        """
        A, B, _ = self.grid_tables(grid)
        c = self.pad(coeffs)
        return np.einsum("...nlm,nli,lmj->...nijm", c, A, B, optimize=True)

    def azimuthal_stage(self, partial, grid):
        """Contract the trailing ``m`` axis of ``batch + (i, j, m)`` with the Fourier table."""
        _, _, F = self.grid_tables(grid)
        return partial @ F

    def synthesize_degree(self, n, block, grid):
        """Synthesise coefficients of the single degree ``n``.

        ``block`` has trailing axis ``n**2`` in the ``k`` order of ``E_n``.
        """
        A, B, F = self.grid_tables(grid)
        block = np.asarray(block, dtype=float)
        L = self.n_max - 1
        cl = np.zeros(block.shape[:-1] + (n, 2 * L + 1))
        for l in range(n):
            cl[..., l, L - l:L + l + 1] = block[..., l * l:(l + 1) * (l + 1)]
        d = cl[..., :, :, None] * A[n - 1, :n][:, None, :]
        e = np.einsum("...lmi,lmj->...mij", d, B[:n], optimize=True)
        return np.einsum("...mij,mk->...ijk", e, F, optimize=True)

    def analyze(self, values, grid):
        A, B, F = self.grid_tables(grid)
        values = np.asarray(values, dtype=float)
        if values.shape[-3:] != grid.shape:
            raise ValueError(f"values shape {values.shape} does not end with {grid.shape}")
        fw = values * grid.weights
        e = np.einsum("...ijk,mk->...mij", fw, F, optimize=True)
        d = np.einsum("...mij,lmj->...lmi", e, B, optimize=True)
        c = np.einsum("...lmi,nli->...nlm", d, A, optimize=True)
        return self.unpad(c)

    def evaluate(self, coeffs, chi, theta, phi):
        """Pointwise values at matching arrays of coordinates."""
        chi, theta, phi = np.broadcast_arrays(
            *(np.asarray(a, dtype=float) for a in (chi, theta, phi)))
        design = self.design_matrix(chi.ravel(), theta.ravel(), phi.ravel())
        vals = np.asarray(coeffs, dtype=float) @ design.T
        return vals.reshape(np.shape(coeffs)[:-1] + chi.shape)

    def design_matrix(self, chi, theta, phi):
        """``(n_points, n_modes)`` matrix of ``f_{n,k}`` at scattered points."""
        n, _, l, m = mode_table(self.n_max)
        A = self.radial_table(chi)
        B = self.polar_table(theta)
        F = self.azimuthal_table(phi)
        L = self.n_max - 1
        return (A[n - 1, l] * B[l, m + L] * F[m + L]).T


@functools.lru_cache(maxsize=32)
def build_reference_basis(n_max):
    """Cached :class:`ReferenceBasis` for truncation ``n_max``."""
    return ReferenceBasis(n_max)


@dataclasses.dataclass
class SphereField:
    """Real spectral coefficients over the modes ``n <= n_max``."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        size = self.coeffs.shape[-1]
        n_max = int(round((3 * size) ** (1 / 3)))
        while n_modes(n_max) < size:
            n_max += 1
        while n_max > 1 and n_modes(n_max) > size:
            n_max -= 1
        if n_modes(n_max) != size:
            raise ValueError(f"{size} coefficients is not a full band-limit")
        self._n_max = n_max

    @property
    def n_max(self):
        return self._n_max

    @classmethod
    def zeros(cls, n_max):
        return cls(np.zeros(n_modes(check_int(n_max, "n_max", minimum=1))))

    @classmethod
    def from_modes(cls, n_max, modes):
        """Build from a mapping ``{(n, k): coeff}``."""
        out = np.zeros(n_modes(n_max))
        for (n, k), value in modes.items():
            if n > n_max:
                raise ValueError(f"mode degree {n} exceeds n_max={n_max}")
            out[mode_index(n, k)] = value
        return cls(out)

    def degree_block(self, n):
        return self.coeffs[..., degree_slice(n)]

    def __add__(self, other):
        return SphereField(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SphereField(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SphereField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SphereField(-self.coeffs)


def _check_resolution(grid, n_max, power=2):
    needed = power * (n_max - 1)
    if grid.exactness_degree < needed:
        raise ResolutionError(
            f"grid exact to degree {grid.exactness_degree}, need {needed} "
            f"for n_max={n_max}")


def synthesize(field, grid):
    """Values of ``sum coeffs * f_{n,k}`` at the grid nodes."""
    _check_resolution(grid, field.n_max)
    return build_reference_basis(field.n_max).synthesize(field.coeffs, grid)


def analyze(values, grid, n_max):
    """Quadrature projection of grid values onto the modes ``n <= n_max``."""
    n_max = check_int(n_max, "n_max", minimum=1)
    _check_resolution(grid, n_max)
    return SphereField(build_reference_basis(n_max).analyze(values, grid))


def lp_norm(values, p, grid):
    """Quadrature ``L^p(S^3)`` norm; ``p = inf`` takes the nodal maximum.

    Leading batch axes of ``values`` are preserved.
    """
    p = check_exponent(p)
    values = np.asarray(values, dtype=float)
    axes = (-3, -2, -1)
    if p == np.inf:
        return np.abs(values).max(axis=axes)
    if p == int(p) and p % 2 == 0 and p <= 16:
        # repeated multiplication is much cheaper than a float power
        sq = values * values
        powered = sq
        if p > 2:
            powered = sq * sq
            for _ in range(int(p) // 2 - 2):
                powered *= sq
    else:
        powered = np.abs(values) ** p
    total = np.tensordot(powered, grid.weights, axes=(axes, (0, 1, 2)))
    return total ** (1.0 / p)


def multiplier(field_or_coeffs, s):
    """Apply ``(1 - Laplacian)**(s/2)``, i.e. multiply degree ``n`` by ``n**s``."""
    if isinstance(field_or_coeffs, SphereField):
        n = degrees(field_or_coeffs.n_max)
        return SphereField(field_or_coeffs.coeffs * n**s)
    coeffs = np.asarray(field_or_coeffs, dtype=float)
    return coeffs * _degrees_for(coeffs) ** s


def laplacian(field):
    """Laplace-Beltrami operator, diagonal with eigenvalue ``1 - n**2``."""
    n = degrees(field.n_max)
    return SphereField(field.coeffs * (1.0 - n**2))


def _degrees_for(coeffs):
    return degrees(SphereField(np.zeros(coeffs.shape[-1])).n_max)


def sobolev_norm(field, s):
    """``(sum n**(2s) coeffs**2)**(1/2)``; ``s = 0`` is the L^2 norm."""
    s = check_real(s, "s")
    coeffs = field.coeffs if isinstance(field, SphereField) else np.asarray(field)
    n = _degrees_for(coeffs)
    return np.sqrt(np.sum(n ** (2 * s) * coeffs**2, axis=-1))


def projection_kernel_diag(n, grid, basis=None):
    """``sum_k f_{n,k}(x)**2`` at every node; equals ``n**2 / vol(S^3)``."""
    n = check_int(n, "n", minimum=1)
    basis = basis if basis is not None else build_reference_basis(n)
    if n > basis.n_max:
        raise ValueError(f"n={n} exceeds basis n_max={basis.n_max}")
    eye = np.zeros((n * n, basis.n_modes))
    eye[:, degree_slice(n)] = np.eye(n * n)
    vals = basis.synthesize(eye, grid)
    return np.sum(vals**2, axis=0)


def zonal_field(n, chi0, theta0, phi0):
    """Reproducing kernel of ``E_n`` centred at a point.

    ``Z(x) = sum_k f_{n,k}(x0) f_{n,k}(x)``; its sup-norm is attained at the
    centre and ``||Z||_inf / ||Z||_2`` equals ``n / sqrt(vol(S^3))``.
    """
    basis = build_reference_basis(n)
    design = basis.design_matrix(np.atleast_1d(chi0), np.atleast_1d(theta0),
                                 np.atleast_1d(phi0))[0]
    coeffs = np.zeros(basis.n_modes)
    coeffs[degree_slice(n)] = design[degree_slice(n)]
    return SphereField(coeffs)


class SphericalHarmonicTransform(TransformerMixin, BaseEstimator):
    """Grid-to-coefficient transform as a scikit-learn transformer.

    ``transform`` maps flattened grid samples ``(n_samples, grid.size)`` to
    coefficients ``(n_samples, n_modes)``; ``inverse_transform`` synthesises.

    Parameters
    ----------
    n_max : int
        Band limit.
    power : int
        Grid exactness is ``power * (n_max - 1)``; 2 suffices for the
        round trip, 4 dealiases cubic products.
    """

    def __init__(self, n_max=8, power=2):
        self.n_max = n_max
        self.power = power

    def fit(self, X=None, y=None):
        n_max = check_int(self.n_max, "n_max", minimum=1)
        power = check_int(self.power, "power", minimum=2)
        self.basis_ = build_reference_basis(n_max)
        self.grid_ = SphereGrid.for_bandlimit(n_max, power)
        self.n_features_in_ = self.grid_.size
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = check_array(X)
        if X.shape[1] != self.grid_.size:
            raise ValueError(f"expected {self.grid_.size} grid values, got {X.shape[1]}")
        return self.basis_.analyze(X.reshape((-1,) + self.grid_.shape), self.grid_)

    def inverse_transform(self, X):
        check_is_fitted(self, "basis_")
        X = check_array(X)
        vals = self.basis_.synthesize(X, self.grid_)
        return vals.reshape(X.shape[0], -1)
