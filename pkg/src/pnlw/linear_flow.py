"""The linear propagator ``U(T)`` on S^3, frequency cut-offs and weighted
space-time norms of linear evolutions.

``U(T)`` acts on degree ``n`` by ``(cos nT, sin(nT)/n)``; it is exactly
``2 pi``-periodic.  A weighted norm

    ( int_R (1 + |T|**delta)**(-r) ||U(T) u||_{L^p}**r dT )**(1/r)

is therefore the pairing of a periodic function with the folded weight.  It is
evaluated through Fourier coefficients: the periodic factor is sampled on a
uniform grid, the weight's cosine moments come from adaptive quadrature.
"""

from __future__ import annotations

import dataclasses
import functools
import warnings

import numpy as np
from scipy import integrate, stats

from . import harmonics
from ._validation import check_exponent, check_int, check_levels, check_real
from .harmonics import SphereGrid, build_reference_basis, degrees
from .random_basis import TailEstimate, fit_gaussian_tail_rate, tail_from_samples
from .random_data import StatePair, draw_coefficients, draw_data
from .seeding import as_generator


class WindowError(ValueError):
    """The time window drops more of the weight than the tolerance allows."""


def evolve_coeffs(pos, vel, T):
    """Apply ``U(T)`` to coefficient arrays.

    ``T`` may be an array; its shape is inserted before the mode axis.
    """
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    n = degrees(harmonics.SphereField(np.zeros(pos.shape[-1])).n_max)
    T = np.asarray(T, dtype=float)
    if T.ndim:
        pos = pos[..., None, :]
        vel = vel[..., None, :]
        T = T[..., None]
    c, s = np.cos(n * T), np.sin(n * T)
    return c * pos + s / n * vel, -n * s * pos + c * vel


def evolve_linear(state, T):
    """``U(T)`` applied to a :class:`StatePair`."""
    pos, vel = evolve_coeffs(state.pos.coeffs, state.vel.coeffs, check_real(T, "T"))
    return StatePair(pos, vel)


def projection_mask(n_max, N):
    return degrees(n_max) <= N


def apply_projection(state, N):
    """``Pi_N``: keep degrees ``n <= N`` (``Pi_0 = 0``)."""
    N = check_int(N, "N", minimum=0)
    keep = projection_mask(state.n_max, N)
    return StatePair(state.pos.coeffs * keep, state.vel.coeffs * keep)


def linear_energy(state):
    """``sum n**2 pos**2 + vel**2``, conserved by ``U(T)``."""
    n = degrees(state.n_max)
    return float(np.sum(n**2 * state.pos.coeffs**2 + state.vel.coeffs**2))


@dataclasses.dataclass(frozen=True)
class WeightedNormSpec:
    """``L^r_T L^p_x`` norm with time weight ``(1 + |T|**delta)**-1``.

    ``window=None`` integrates over the whole line.  A finite window is
    accepted only if the dropped tail of ``int (1 + |T|**delta)**-r`` is at
    most ``tail_tol`` of the total.
    """

    r: float
    p: float
    delta: float | None = None
    window: float | None = None
    tail_tol: float = 1e-6
    n_tau: int | None = None

    def __post_init__(self):
        check_real(self.r, "r", minimum=1.0)
        check_exponent(self.p, "p")
        if self.delta is None:
            object.__setattr__(self, "delta", 2.0 / self.r)
        check_real(self.delta, "delta", minimum=0.0, strict_min=True)
        if self.delta * self.r <= 1:
            raise ValueError("the weight must be integrable: need delta * r > 1")

    def weight(self, T):
        return (1.0 + np.abs(T) ** self.delta) ** (-self.r)

    def tail_fraction(self):
        if self.window is None:
            return 0.0
        total = _weight_moment(self.r, self.delta, None, 0)
        kept = _weight_moment(self.r, self.delta, self.window, 0)
        return (total - kept) / total

    def check_window(self):
        frac = self.tail_fraction()
        if frac > self.tail_tol:
            raise WindowError(
                f"window {self.window} drops {frac:.3g} of the weight "
                f"(tolerance {self.tail_tol})")
        return frac

    def tau_count(self, n_max):
        if self.n_tau is not None:
            return int(self.n_tau)
        # P = ||U(T)u||_p**p is a trig polynomial, but P**(r/p) has kinks where
        # P vanishes (single-mode data), so oversample with a floor
        degree = n_max * (self.p if np.isfinite(self.p) else 8)
        return max(256, int(2 ** np.ceil(np.log2(2 * degree + 2))) * 2)


@functools.lru_cache(maxsize=4096)
def _weight_moment(r, delta, window, k):
    """``int_{-W}^{W} (1 + |T|**delta)**(-r) cos(k T) dT`` (``W=None`` is the line)."""
    f = lambda T: (1.0 + T**delta) ** (-r)  # noqa: E731
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if k == 0:
            val = integrate.quad(f, 0, 1, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
            val += integrate.quad(f, 1, np.inf, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
            if window is not None:
                # long finite intervals defeat adaptive quadrature; drop the tail instead
                val -= integrate.quad(f, window, np.inf, limit=400, epsabs=1e-14,
                                      epsrel=1e-12)[0]
            return 2 * val
        head = integrate.quad(f, 0, 1, weight="cos", wvar=k, limit=200,
                              epsabs=1e-14)[0]
        if window is None:
            g = lambda s: f(1.0 + s)  # noqa: E731
            tail_c = integrate.quad(g, 0, np.inf, weight="cos", wvar=k, limlst=200)[0]
            tail_s = integrate.quad(g, 0, np.inf, weight="sin", wvar=k, limlst=200)[0]
            tail = np.cos(k) * tail_c - np.sin(k) * tail_s
        else:
            tail = integrate.quad(f, 1, window, weight="cos", wvar=k, limit=2000,
                                  epsabs=1e-14)[0]
        return 2 * (head + tail)


def weight_moments(spec, n_freq, step=1):
    """Cosine moments of the weight at frequencies ``0, step, 2 step, ...``."""
    return np.array([_weight_moment(float(spec.r), float(spec.delta), spec.window, step * k)
                     for k in range(n_freq)])


def pair_with_weight(periodic_samples, spec, fold=1):
    """``int w(T)**r F(T) dT`` for periodic ``F`` sampled uniformly.

    The samples cover one period ``2 pi / fold`` and the time axis is last.
    """
    F = np.asarray(periodic_samples, dtype=float)
    J = F.shape[-1]
    c = np.fft.rfft(F, axis=-1) / J
    W = weight_moments(spec, c.shape[-1], step=fold)
    factors = np.full(c.shape[-1], 2.0)
    factors[0] = 1.0
    if J % 2 == 0:
        factors[-1] = 1.0
    return np.sum(factors * c.real * W, axis=-1)


def space_norm_series(pos, vel, taus, p, grid, chunk_values=4_000_000):
    """``||U(tau) u||_{L^p}`` for batched coefficients at every ``tau``.

    Each degree is synthesised once up to the azimuthal stage; the time
    dependence ``cos(n tau)``, ``sin(n tau) / n`` is then a small matrix
    product.  Returns an array of shape ``batch + (len(taus),)``.
    """
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    n_max = harmonics.SphereField(np.zeros(pos.shape[-1])).n_max
    basis = build_reference_basis(n_max)
    n = degrees(n_max)
    batch = pos.shape[:-1]
    flat_pos = pos.reshape(-1, pos.shape[-1])
    flat_vel = vel.reshape(-1, vel.shape[-1]) / n
    taus = np.asarray(taus, dtype=float)
    nn = np.arange(1, n_max + 1)
    phase = np.concatenate([np.cos(np.outer(taus, nn)), np.sin(np.outer(taus, nn))], axis=1)
    out = np.empty((flat_pos.shape[0], taus.size))
    per = max(1, chunk_values // (grid.size * taus.size))
    for start in range(0, flat_pos.shape[0], per):
        sl = slice(start, start + per)
        parts = np.concatenate([basis.degree_partials(flat_pos[sl], grid),
                                basis.degree_partials(flat_vel[sl], grid)], axis=1)
        shape = parts.shape
        evolved = np.matmul(phase, parts.reshape(shape[0], shape[1], -1))
        evolved = evolved.reshape((shape[0], taus.size) + shape[2:])
        vals = basis.azimuthal_stage(evolved, grid)
        out[sl] = harmonics.lp_norm(vals, p, grid)
    return out.reshape(batch + (taus.size,))


def default_grid(n_max, p):
    """Grid exact for ``|u|**p`` when ``p`` is an even integer (capped at 8)."""
    power = 4 if not np.isfinite(p) else int(min(max(np.ceil(p), 2), 8))
    return SphereGrid.for_bandlimit(n_max, power)


def _antipodal_fold(p, grid, n_max):
    """2 when ``||U(tau) u||_p`` is computed exactly, else 1.

    ``E_n`` has parity ``(-1)**(n-1)`` under ``x -> -x``, so
    ``U(tau + pi) u (x) = -U(tau) u (-x)`` and the ``L^p`` norm is
    ``pi``-periodic.  The fold is used only when the quadrature is exact, so
    that the discrete norm inherits the symmetry.
    """
    if np.isfinite(p) and p == int(p) and int(p) % 2 == 0:
        if grid.exactness_degree >= int(p) * (n_max - 1):
            return 2
    return 1


def weighted_spacetime_norm(state, spec, grid=None):
    """Weighted ``L^r_T L^p_x`` norm of ``U(T) state`` over the window.

    Batched coefficient arrays inside ``state`` give batched results.
    """
    spec.check_window()
    n_max = state.n_max
    grid = grid if grid is not None else default_grid(n_max, spec.p)
    fold = _antipodal_fold(spec.p, grid, n_max)
    J = max(8, spec.tau_count(n_max) // fold)
    taus = 2 * np.pi / fold * np.arange(J) / J
    norms = space_norm_series(state.pos.coeffs, state.vel.coeffs, taus, spec.p, grid)
    integral = pair_with_weight(norms**spec.r, spec, fold)
    return np.maximum(integral, 0.0) ** (1.0 / spec.r)


REGIMES = {
    1: "high-frequency L^p_{T,x} with weight (1+|T|^(2/p))^-1",
    2: "L^3_T L^6_x with weight (1+|T|^(2/3))^-1",
    3: "low-frequency L^1_T L^inf_x with weight (1+T^2)^-1",
}


def regime_spec(regime, p=6.0):
    if regime == 1:
        return WeightedNormSpec(r=p, p=p, delta=2.0 / p)
    if regime == 2:
        return WeightedNormSpec(r=3.0, p=6.0, delta=2.0 / 3.0)
    if regime == 3:
        return WeightedNormSpec(r=1.0, p=np.inf, delta=2.0)
    raise ValueError(f"regime must be 1, 2 or 3, got {regime}")


def regime_norms(state, regime, N=0, M=None, p=6.0, grid=None, refine=False,
                 n_tau=None):
    """Per-draw norms entering each of the three tail bounds.

    Regime 1 uses ``(1 - Pi_N)``, regime 3 uses ``Pi_M``.  With ``refine``,
    regime 3 also returns the sup-norm on a finer grid (the nodal maximum is
    a lower bound for the true sup).  ``n_tau`` overrides the time sampling.
    """
    spec = regime_spec(regime, p)
    if n_tau is not None:
        spec = dataclasses.replace(spec, n_tau=n_tau)
    n = degrees(state.n_max)
    pos, vel = state.pos.coeffs, state.vel.coeffs
    if regime == 1:
        keep = n > N
        pos, vel = pos * keep, vel * keep
    elif regime == 3:
        M = state.n_max if M is None else M
        keep = n <= M
        pos, vel = pos * keep, vel * keep
    projected = StatePair(pos, vel)
    values = weighted_spacetime_norm(projected, spec, grid)
    if regime == 3 and refine:
        base = grid if grid is not None else default_grid(state.n_max, np.inf)
        fine = SphereGrid(2 * base.n_chi, 2 * base.n_theta, 2 * base.n_phi)
        return values, weighted_spacetime_norm(projected, spec, fine)
    return values


@dataclasses.dataclass
class TailExperiment:
    regime: int
    norms: np.ndarray
    tail: TailEstimate
    S: float
    S_high: float
    fit: dict


def tail_experiment(profile, rotations, regime, levels, n_draws, rng=None, N=0,
                    M=None, p=6.0, grid=None, distribution="gaussian",
                    chunk_draws=500, confidence=0.99, n_tau=64):
    """Empirical survival of the regime's weighted norm over random draws.

    The fit reported is the log-log slope (regime 1) or the ``lambda**2``
    rate (regimes 2 and 3), with R^2, over levels whose survival lies in
    ``[1e-3, 0.5]``.  The default ``n_tau`` trades about ``1e-6`` relative
    accuracy per norm for speed.
    """
    levels = check_levels(levels)
    rng = as_generator(rng)
    norms = np.empty(n_draws)
    for start in range(0, n_draws, chunk_draws):
        size = min(chunk_draws, n_draws - start)
        draw = draw_coefficients(profile.n_max, distribution, rng, size=size)
        state = draw_data(profile, rotations, draw)
        norms[start:start + size] = regime_norms(state, regime, N=N, M=M, p=p, grid=grid,
                                                     n_tau=n_tau)
    tail = tail_from_samples(norms, levels, confidence)
    fit = fit_tail_shape(tail, regime)
    return TailExperiment(regime, norms, tail, profile.S, profile.S_high(N), fit)


def fit_tail_shape(tail, regime, s_min=1e-3, s_max=0.5):
    """Regress log-survival on ``log lambda`` (regime 1) or ``lambda**2``."""
    keep = (tail.survival >= s_min) & (tail.survival <= s_max) & (tail.levels > 0)
    if keep.sum() < 3:
        return {"slope": np.nan, "intercept": np.nan, "r_squared": np.nan, "n_levels": int(keep.sum())}
    x = np.log(tail.levels[keep]) if regime == 1 else tail.levels[keep] ** 2
    y = np.log(tail.survival[keep])
    res = stats.linregress(x, y)
    return {"slope": float(res.slope), "intercept": float(res.intercept),
            "r_squared": float(res.rvalue**2), "n_levels": int(keep.sum())}


def moment_growth_exponent(norms, qs=(2, 4, 8)):
    """Log-log slope of ``(E X**q)**(1/q)`` in ``q``; at most ~1/2 for subgaussian ``X``."""
    norms = np.asarray(norms, dtype=float)
    scale = np.mean(norms)
    moments = [np.mean((norms / scale) ** q) ** (1 / q) for q in qs]
    return float(stats.linregress(np.log(qs), np.log(moments)).slope)


__all__ = [
    "WindowError", "WeightedNormSpec", "evolve_coeffs", "evolve_linear",
    "apply_projection", "linear_energy", "weighted_spacetime_norm", "regime_norms",
    "regime_spec", "tail_experiment", "fit_tail_shape", "moment_growth_exponent",
    "TailExperiment", "fit_gaussian_tail_rate", "pair_with_weight", "space_norm_series",
]
