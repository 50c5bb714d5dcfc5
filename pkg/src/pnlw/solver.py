"""Nonlinear Klein-Gordon dynamics on S^3.

Full mode integrates ``d_T^2 u + (1 - Laplacian) u + u**3 = 0``; perturbation
mode integrates ``d_T^2 v + (1 - Laplacian) v + (g + v)**3 = 0`` with
``v = d_T v = 0`` at ``T = 0`` and ``g`` the linear evolution of given data.

The stepper is a fourth-order Lawson scheme: the linear part is the exact
propagator ``U(h)``, the cubic term is evaluated on a grid exact to degree
``4 (n_max - 1)`` and projected back, so products are free of aliasing.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import integrate, interpolate
from sklearn.base import BaseEstimator

from . import harmonics
from ._validation import ContractionError, check_int, check_real
from .harmonics import SphereGrid, build_reference_basis, degrees
from .linear_flow import (
    evolve_coeffs, regime_spec, space_norm_series, weighted_spacetime_norm)
from .random_data import StatePair

MODES = ("full", "perturbation")


class PreconditionError(ValueError):
    """The hypotheses of the local existence statement do not hold."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class CubicTerm:
    """``Pi_{n_max}[(g + u)**3]`` through an exactly dealiased grid."""

    def __init__(self, n_max, grid=None, coupling=1.0):
        self.n_max = check_int(n_max, "n_max", minimum=1)
        self.coupling = float(coupling)
        self.grid = grid if grid is not None else SphereGrid.for_bandlimit(n_max, 4)
        if self.grid.exactness_degree < 4 * (n_max - 1):
            raise harmonics.ResolutionError("cubic term needs exactness 4 (n_max - 1)")
        self.basis = build_reference_basis(n_max)

    def __call__(self, pos, forcing=None):
        coeffs = pos if forcing is None else pos + forcing
        if self.coupling == 0.0:
            return np.zeros_like(coeffs)
        u = self.basis.synthesize(coeffs, self.grid)
        return self.coupling * self.basis.analyze(u * u * u, self.grid)

    def quartic_integral(self, pos):
        """``int u**4`` (exact on this grid)."""
        u = self.basis.synthesize(pos, self.grid)
        u2 = u * u
        return np.tensordot(u2 * u2, self.grid.weights, axes=((-3, -2, -1), (0, 1, 2)))


def _forcing_function(forcing, n_max):
    """Normalise the forcing to a callable ``T -> pos coefficients`` or ``None``."""
    if forcing is None:
        return None
    if isinstance(forcing, StatePair):
        if forcing.n_max != n_max:
            raise ValueError("forcing and state must share n_max")
        g0, g1 = forcing.pos.coeffs, forcing.vel.coeffs
        return lambda T: evolve_coeffs(g0, g1, T)[0]
    if callable(forcing):
        return forcing
    raise TypeError("forcing must be None, a StatePair or a callable of T")


@dataclasses.dataclass
class BlowUp:
    time: float
    reason: str


@dataclasses.dataclass
class Trajectory:
    """Snapshots ``(pos, vel)`` on a uniform time grid.

    ``forcing`` holds the linear data ``g`` in perturbation mode, so that the
    full field ``g + v`` can be rebuilt.
    """

    times: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    mode: str = "full"
    forcing: StatePair | None = None
    blowup: BlowUp | None = None
    interpolation_order: int = 3

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.pos = np.asarray(self.pos, dtype=float)
        self.vel = np.asarray(self.vel, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def n_max(self):
        return harmonics.SphereField(self.pos[0]).n_max

    def __len__(self):
        return self.times.size

    def state(self, j):
        return StatePair(self.pos[j].copy(), self.vel[j].copy())

    def at(self, T):
        """Cubic Hermite interpolation, using ``vel`` as the slope of ``pos``.

        Returns position coefficients of shape ``shape(T) + (n_modes,)``.
        """
        spline = interpolate.CubicHermiteSpline(self.times, self.pos, self.vel, axis=0)
        return spline(T)

    def velocity_at(self, T):
        return interpolate.CubicSpline(self.times, self.vel, axis=0)(T)

    def total_pos(self):
        """``g + v`` in perturbation mode, ``u`` itself in full mode."""
        if self.forcing is None:
            return self.pos
        g, _ = evolve_coeffs(self.forcing.pos.coeffs, self.forcing.vel.coeffs, self.times)
        return self.pos + g

    def energies(self, grid=None):
        return energy_E(StatePair(self.pos, self.vel), grid)

    def hamiltonians(self, grid=None):
        return hamiltonian(StatePair(self.pos, self.vel), grid)


def _lawson_step(pos, vel, t, h, cubic, force):
    """One step of the fourth-order Lawson integrating-factor scheme.

    Stages ``k = (0, f)`` only kick the velocity; ``E(tau)`` is ``U(tau)``.
    """
    zero = np.zeros_like(pos)

    def f(T, p):
        return -cubic(p, None if force is None else force(T))

    def kick(tau, force_coeffs):
        return evolve_coeffs(zero, force_coeffs, tau)

    f1 = f(t, pos)
    p2, _ = evolve_coeffs(pos, vel + h / 2 * f1, h / 2)
    f2 = f(t + h / 2, p2)
    p3, _ = evolve_coeffs(pos, vel, h / 2)
    f3 = f(t + h / 2, p3)
    fp, fv = evolve_coeffs(pos, vel, h)
    k3p, _ = kick(h / 2, f3)
    f4 = f(t + h, fp + h * k3p)
    a1p, a1v = kick(h, f1)
    a2p, a2v = kick(h / 2, f2 + f3)
    new_pos = fp + h / 6 * (a1p + 2 * a2p)
    new_vel = fv + h / 6 * (a1v + 2 * a2v + f4)
    return new_pos, new_vel


def _integrate(pos, vel, t0, t1, dt, cubic, force, save_every, blowup_threshold):
    span = t1 - t0
    n_steps = max(1, int(math.ceil(abs(span) / dt - 1e-9)))
    h = span / n_steps
    times, P, V = [t0], [pos.copy()], [vel.copy()]
    blowup = None
    t = t0
    for step in range(1, n_steps + 1):
        pos, vel = _lawson_step(pos, vel, t, h, cubic, force)
        t = t0 + step * h
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))) or \
                max(np.max(np.abs(pos)), np.max(np.abs(vel))) > blowup_threshold:
            blowup = BlowUp(times[-1], "non-finite or oversized coefficients")
            break
        if step % save_every == 0 or step == n_steps:
            times.append(t)
            P.append(pos.copy())
            V.append(vel.copy())
    return np.array(times), np.array(P), np.array(V), blowup


def solve(state0, T_span, dt, forcing=None, t0=None, save_every=1, grid=None,
          blowup_threshold=1e12, coupling=1.0):
    """Integrate from ``state0`` given at ``t0`` over ``T_span``.

    Parameters
    ----------
    state0 : StatePair
        Data at ``t0``.  In perturbation mode pass zeros.
    T_span : tuple of float
        ``(a, b)``; ``t0`` defaults to ``a``.  An interior ``t0`` integrates
        both ways and joins the pieces.
    dt : float
        Step bound; the actual step divides each leg evenly.
    forcing : StatePair or callable, optional
        Linear data ``g`` (evolved by ``U(T)``) or a map ``T -> coefficients``.
    coupling : float
        Factor in front of the cubic term; 0 gives the linear flow.

    Returns
    -------
    Trajectory
    """
    dt = check_real(dt, "dt", minimum=0.0, strict_min=True)
    save_every = check_int(save_every, "save_every", minimum=1)
    a, b = (float(x) for x in T_span)
    t0 = a if t0 is None else float(t0)
    if not a <= t0 <= b:
        raise ValueError("t0 must lie in T_span")
    n_max = state0.n_max
    cubic = CubicTerm(n_max, grid, coupling)
    force = _forcing_function(forcing, n_max)
    mode = "full" if forcing is None else "perturbation"
    pos0, vel0 = state0.pos.coeffs.astype(float), state0.vel.coeffs.astype(float)
    pieces = []
    if t0 > a:
        pieces.append(_integrate(pos0, vel0, t0, a, dt, cubic, force, save_every,
                                 blowup_threshold))
    if b > t0 or not pieces:
        pieces.append(_integrate(pos0, vel0, t0, b, dt, cubic, force, save_every,
                                 blowup_threshold))
    if len(pieces) == 2:
        (tb, pb, vb, bb), (tf, pf, vf, bf) = pieces
        times = np.concatenate([tb[::-1], tf[1:]])
        P = np.concatenate([pb[::-1], pf[1:]])
        V = np.concatenate([vb[::-1], vf[1:]])
        blowup = bb or bf
    else:
        times, P, V, blowup = pieces[0]
        if b < t0:
            times, P, V = times[::-1], P[::-1], V[::-1]
    forcing_pair = forcing if isinstance(forcing, StatePair) else None
    return Trajectory(times, P, V, mode, forcing_pair, blowup)


def hamiltonian(state, grid=None):
    """``1/2 int (d_T u)**2 + 1/2 int u (1 - Laplacian) u + 1/4 int u**4``.

    Conserved by the full equation; batched states give batched values.
    """
    n = degrees(state.n_max)
    pos, vel = state.pos.coeffs, state.vel.coeffs
    quartic = CubicTerm(state.n_max, grid).quartic_integral(pos)
    return 0.5 * np.sum(vel**2, axis=-1) + 0.5 * np.sum(n**2 * pos**2, axis=-1) + 0.25 * quartic


def energy_E(state, grid=None):
    """``sqrt(int (d_T v)**2 + int v (1 - Laplacian) v + 1/2 int v**4)``."""
    n = degrees(state.n_max)
    pos, vel = state.pos.coeffs, state.vel.coeffs
    quartic = CubicTerm(state.n_max, grid).quartic_integral(pos)
    return np.sqrt(np.sum(vel**2, axis=-1) + np.sum(n**2 * pos**2, axis=-1) + 0.5 * quartic)


def hamiltonian_drift(traj, grid=None):
    """Maximum relative deviation of the Hamiltonian from its initial value."""
    H = traj.hamiltonians(grid)
    return float(np.max(np.abs(H - H[0])) / max(abs(H[0]), np.finfo(float).tiny))


def convergence_order(errors, dts):
    """Least-squares slope of ``log error`` against ``log dt``."""
    from scipy import stats

    return float(stats.linregress(np.log(dts), np.log(errors)).slope)


# local theory ------------------------------------------------------------

@dataclasses.dataclass
class PicardResult:
    times: np.ndarray
    iterates: list
    distances: np.ndarray
    factors: np.ndarray
    T1: float
    C: float
    hypotheses: dict

    @property
    def limit(self):
        return self.iterates[-1]

    @property
    def contraction(self):
        """Largest successive-distance ratio after the second iterate."""
        tail = self.factors[1:] if self.factors.size > 1 else self.factors
        return float(np.max(tail)) if tail.size else 0.0


def local_time(C, Lambda, T0):
    """``T_1 = min(1, 1 / (C Lambda**2 (1 + T0**2)**3))``."""
    if Lambda == 0:
        return 1.0
    return float(min(1.0, 1.0 / (C * Lambda**2 * (1.0 + T0**2) ** 3)))


def local_hypotheses(g, v0, v1):
    """The three quantities bounded by ``Lambda`` in the local statement."""
    n = degrees(v0.n_max)
    gnorm = 0.0
    if g is not None:
        gnorm = float(weighted_spacetime_norm(g, regime_spec(2))) ** 3
    return {"g_L3L6_cubed": gnorm,
            "v0_H1": float(np.sqrt(np.sum(n**2 * v0.coeffs**2))),
            "v1_L2": float(np.sqrt(np.sum(v1.coeffs**2)))}


def _duhamel(times, T0, pos0, vel0, source):
    """``S(T - T0)(v0, v1) - int_{T0}^T sin((T - s) n) / n source(s) ds`` per mode.

    ``times`` is uniform and contains ``T0`` at index ``i0``; ``source`` has
    shape ``(len(times), n_modes)``.
    """
    n = degrees(harmonics.SphereField(pos0).n_max)
    s = times - T0
    i0 = int(np.argmin(np.abs(s)))
    h = times[1] - times[0]
    c, si = np.cos(np.outer(s, n)), np.sin(np.outer(s, n))
    Ic = np.zeros_like(source)
    Is = np.zeros_like(source)
    for integrand, out in ((c * source, Ic), (si * source, Is)):
        out[i0:] = integrate.cumulative_simpson(integrand[i0:], dx=h, axis=0, initial=0)
        out[:i0 + 1] = integrate.cumulative_simpson(
            integrand[i0::-1], dx=-h, axis=0, initial=0)[::-1]
    free_p = c * pos0 + si / n * vel0
    free_v = -n * si * pos0 + c * vel0
    pos = free_p - (si * Ic - c * Is) / n
    vel = free_v - (c * Ic + si * Is)
    return pos, vel


def picard_local(g, v0, v1, T0, Lambda, n_iter=8, C=1.0, n_time=801, grid=None,
                 check=True):
    """Picard iterates of the Duhamel map on ``[T0 - T1, T0 + T1]``.

    Iterate 0 is the free evolution of ``(v0, v1)``; distances are
    ``sup_T ||v_{k+1} - v_k||_{H^1}``.

    Raises
    ------
    PreconditionError
        When ``check`` is set and a hypothesis exceeds ``Lambda``.
    ContractionError
        When the measured factor is not below one.
    """
    Lambda = check_real(Lambda, "Lambda", minimum=0.0)
    n_iter = check_int(n_iter, "n_iter", minimum=1)
    n_time = check_int(n_time, "n_time", minimum=5)
    if n_time % 2 == 0:
        n_time += 1
    v0 = v0 if isinstance(v0, harmonics.SphereField) else harmonics.SphereField(v0)
    v1 = v1 if isinstance(v1, harmonics.SphereField) else harmonics.SphereField(v1)
    hyp = local_hypotheses(g, v0, v1)
    if check:
        bad = {k: v for k, v in hyp.items() if v > Lambda * (1 + 1e-12)}
        if bad:
            raise PreconditionError(f"hypotheses exceed Lambda={Lambda}: {bad}", hyp)
    T1 = local_time(C, Lambda, T0)
    times = T0 + np.linspace(-T1, T1, n_time)
    n_max = v0.n_max
    cubic = CubicTerm(n_max, grid)
    force = _forcing_function(g, n_max)
    gvals = 0.0 if force is None else force(times)
    n = degrees(n_max)
    pos, vel = _duhamel(times, T0, v0.coeffs, v1.coeffs, np.zeros((n_time, v0.coeffs.size)))
    iterates = [(pos, vel)]
    distances = []
    for _ in range(n_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            source = cubic(pos + gvals)
            new_pos, new_vel = _duhamel(times, T0, v0.coeffs, v1.coeffs, source)
            dist = float(np.max(np.sqrt(np.sum(n**2 * (new_pos - pos) ** 2, axis=-1))))
        if not np.isfinite(dist):
            err = ContractionError(f"Picard iterates diverge on T1={T1:.3g}")
            err.result = None
            raise err
        distances.append(dist)
        pos, vel = new_pos, new_vel
        iterates.append((pos, vel))
    distances = np.array(distances)
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(distances[:-1] > 0, distances[1:] / distances[:-1], 0.0)
    # ratios stop meaning anything once the iterates agree to rounding
    floor = 1e-13 * max(1.0, float(np.max(np.abs(pos))))
    factors = factors[distances[:-1] > floor]
    result = PicardResult(times, iterates, distances, factors, T1, C, hyp)
    if factors.size and result.contraction >= 1.0:
        err = ContractionError(
            f"no contraction on T1={T1:.3g}: measured factor {result.contraction:.3g}")
        err.result = result
        raise err
    return result


def calibrate_picard_constant(cases, n_iter=6, C0=1.0, max_doublings=30, n_time=401):
    """Smallest ``C = C0 * 2**j`` for which every calibration case contracts.

    ``cases`` is a sequence of ``(g, v0, v1, T0, Lambda)``.
    """
    C = float(C0)
    for _ in range(max_doublings + 1):
        try:
            for g, v0, v1, T0, Lambda in cases:
                picard_local(g, v0, v1, T0, Lambda, n_iter=n_iter, C=C, n_time=n_time)
            return C
        except ContractionError:
            C *= 2.0
    raise ContractionError(f"no contraction up to C={C}")


def duhamel_residual(traj, T0_index=0):
    """Relative mismatch between snapshots and the Duhamel formula built from them."""
    cubic = CubicTerm(traj.n_max)
    total = traj.total_pos()
    source = cubic(total)
    T0 = traj.times[T0_index]
    pos, vel = _duhamel(traj.times, T0, traj.pos[T0_index], traj.vel[T0_index], source)
    scale = max(1.0, float(np.max(np.abs(traj.pos))))
    return float(np.max(np.abs(pos - traj.pos)) / scale)


# global theory -----------------------------------------------------------

def forcing_space_norms(g, times, grid_inf=None):
    """``||g(T)||_{L^6}`` and ``||g(T)||_{L^inf}`` at ``times``."""
    n_max = g.n_max
    g6 = space_norm_series(g.pos.coeffs, g.vel.coeffs, times, 6.0,
                           SphereGrid.for_bandlimit(n_max, 6))
    grid_inf = grid_inf or SphereGrid.for_bandlimit(n_max, 8)
    ginf = space_norm_series(g.pos.coeffs, g.vel.coeffs, times, np.inf, grid_inf)
    return g6, ginf


def gronwall_envelope_case1(g, times, C=1.0, c=1.0):
    """``C int_0^T ||g||_6**3 * exp(c int_0^T (||g||_6**2 + ||g||_inf))``.

    ``times`` must be uniform and start at 0 (either sign of direction).
    """
    times = np.asarray(times, dtype=float)
    if g is None:
        return np.zeros_like(times)
    g6, ginf = forcing_space_norms(g, times)
    h = times[1] - times[0]
    cubic = np.abs(integrate.cumulative_simpson(g6**3, dx=h, initial=0))
    rate = np.abs(integrate.cumulative_simpson(g6**2 + ginf, dx=h, initial=0))
    return C * np.maximum.accumulate(cubic) * np.exp(c * np.maximum.accumulate(rate))


def calibrate_gronwall(trajectories, c=1.0, safety=2.0):
    """Fit ``C`` as ``safety`` times the worst ratio ``E(T) / envelope(T)``.

    ``c`` is held fixed; the resulting ``C`` is then frozen for fresh draws.
    """
    worst = 0.0
    for traj in trajectories:
        env = gronwall_envelope_case1(traj.forcing, traj.times, 1.0, c)
        E = traj.energies()
        ok = env > 0
        if np.any(ok):
            worst = max(worst, float(np.max(E[ok] / env[ok])))
    return safety * worst


@dataclasses.dataclass(frozen=True)
class GlobalizationBudget:
    """Thresholds of the ``sigma = 0`` globalisation argument.

    ``C(T0) = c_budget * (1 + T0**2)`` multiplies every norm.
    """

    theta: float
    T0: float
    N: int
    c_budget: float = 1.0

    def __post_init__(self):
        check_real(self.theta, "theta", minimum=0.0, maximum=1.0, strict_min=True)
        check_real(self.T0, "T0", minimum=0.0, strict_min=True)
        check_int(self.N, "N", minimum=0)

    @property
    def p(self):
        return 6.0 / self.theta

    @property
    def C_T0(self):
        return self.c_budget * (1.0 + self.T0**2)

    @property
    def cubic_threshold(self):
        return math.exp(self.p / 18)

    @property
    def combined_threshold(self):
        return self.p / 18

    @property
    def per_set_threshold(self):
        return self.p / 54

    @property
    def energy_ceiling(self):
        return math.exp(self.p / 6)

    @property
    def energy_bound(self):
        return math.exp(self.p / 9)


@dataclasses.dataclass
class BudgetReport:
    values: dict
    thresholds: dict
    membership: dict
    failure_amplitude: dict

    @property
    def J(self):
        return all(self.membership.values())

    @property
    def first_to_fail(self):
        """Set that fails at the smallest amplitude scaling of the data."""
        return min(self.failure_amplitude, key=self.failure_amplitude.get)


def check_globalization_budget(g, budget, grid_p=None):
    """Membership of the linear data ``g`` in ``F, G, H, I`` (and ``J``).

    All four norms carry the time weights of the probabilistic estimates:
    ``F``, ``G`` the weighted ``L^3_T L^6`` norm (cubed, squared), ``H`` the
    ``(1 + T**2)**-1`` weighted ``L^1_T L^inf`` norm of ``Pi_N g``, ``I`` the
    ``(1 + |T|**(2/p))**-1`` weighted ``L^p`` norm of ``(1 - Pi_N) g``.
    """
    n_max = g.n_max
    CT = budget.C_T0
    l3l6 = float(weighted_spacetime_norm(g, regime_spec(2)))
    from .linear_flow import regime_norms

    low = float(regime_norms(g, 3, M=min(budget.N, n_max)))
    if budget.N >= n_max:
        high = 0.0
    else:
        grid_p = grid_p or SphereGrid.for_bandlimit(n_max, int(math.ceil(budget.p)))
        high = float(regime_norms(g, 1, N=budget.N, p=budget.p, grid=grid_p))
    values = {"F": CT * l3l6**3, "G": CT * l3l6**2, "H": CT * low, "I": CT * high}
    thresholds = {"F": budget.cubic_threshold, "G": budget.per_set_threshold,
                  "H": budget.per_set_threshold, "I": budget.per_set_threshold}
    membership = {k: bool(values[k] <= thresholds[k]) for k in values}
    powers = {"F": 3, "G": 2, "H": 1, "I": 1}
    failure = {k: (math.inf if values[k] == 0 else (thresholds[k] / values[k]) ** (1 / powers[k]))
               for k in values}
    return BudgetReport(values, thresholds, membership, failure)


def validate_globalization(g, budget, dt=1e-2, grid=None):
    """Solve the perturbation equation on ``[-T0, T0]`` and compare ``max E``.

    Returns ``(max_energy, trajectory)``; the claim is ``max_energy < e**(p/6)``
    whenever the data lie in ``J``.
    """
    zero = StatePair.zeros(g.n_max)
    traj = solve(zero, (-budget.T0, budget.T0), dt, forcing=g, t0=0.0, grid=grid)
    return float(np.max(traj.energies())), traj


def uniqueness_energy(traj_a, traj_b):
    """``H(t) = sqrt(int (d_t h)**2 + int h (1 - Laplacian) h)`` for ``h = a - b``.

    ``traj_b`` is interpolated onto the times of ``traj_a`` unless they coincide.
    """
    n = degrees(traj_a.n_max)
    if traj_a.times.shape == traj_b.times.shape and np.allclose(traj_a.times, traj_b.times):
        bp, bv = traj_b.pos, traj_b.vel
    else:
        bp, bv = traj_b.at(traj_a.times), traj_b.velocity_at(traj_a.times)
    dp, dv = traj_a.pos - bp, traj_a.vel - bv
    return traj_a.times, np.sqrt(np.sum(dv**2 + n**2 * dp**2, axis=-1))


def constant_mode_oracle(c0, c1, times, rtol=1e-12, atol=1e-14):
    """Scalar ``y'' + y + y**3 / (2 pi**2) = 0`` by an adaptive 8th-order method."""
    def rhs(_, y):
        return [y[1], -y[0] - y[0] ** 3 / harmonics.VOLUME]

    times = np.asarray(times, dtype=float)
    sol = integrate.solve_ivp(rhs, (times[0], times[-1]), [c0, c1], method="DOP853",
                              t_eval=times, rtol=rtol, atol=atol)
    return sol.y[0], sol.y[1]


class KleinGordonSolver(BaseEstimator):
    """Estimator-style front end: ``fit`` integrates, ``predict`` interpolates.

    Parameters
    ----------
    dt : float
        Step bound.
    t_max : float
        The trajectory covers ``[0, t_max]``.
    save_every : int
        Keep every ``save_every``-th step.
    """

    def __init__(self, dt=1e-2, t_max=2 * np.pi, save_every=1):
        self.dt = dt
        self.t_max = t_max
        self.save_every = save_every

    def fit(self, X, y=None, forcing=None):
        """``X`` is a :class:`StatePair` or an array ``(2, n_modes)``."""
        state = X if isinstance(X, StatePair) else StatePair.from_array(X)
        self.trajectory_ = solve(state, (0.0, self.t_max), self.dt, forcing=forcing,
                                 save_every=self.save_every)
        self.n_max_ = state.n_max
        return self

    def predict(self, T):
        """Position and velocity coefficients, shape ``shape(T) + (2, n_modes)``."""
        traj = self.trajectory_
        return np.stack([traj.at(T), traj.velocity_at(T)], axis=-2)


__all__ = [
    "CubicTerm", "Trajectory", "BlowUp", "solve", "hamiltonian", "energy_E",
    "hamiltonian_drift", "picard_local", "PicardResult", "local_time",
    "calibrate_picard_constant", "gronwall_envelope_case1", "calibrate_gronwall",
    "GlobalizationBudget", "BudgetReport", "check_globalization_budget",
    "validate_globalization", "uniqueness_energy", "constant_mode_oracle",
    "KleinGordonSolver", "PreconditionError", "duhamel_residual", "local_hypotheses",
    "convergence_order", "forcing_space_norms",
]
