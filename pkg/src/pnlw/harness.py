"""Run manifests, the experiment catalog and orchestration.

Every experiment is a function of ``(params, seed)`` that returns named
checks, CSV tables and fitted constants.  :func:`run_experiment` validates
the manifest, runs the experiment and persists everything under a
directory named by the manifest's content hash.  Nothing written depends on
wall-clock time, so identical manifests give byte-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from pathlib import Path
from typing import Callable

import numpy as np

from . import io
from ._validation import ContractionError
from ._version import __version__
from .harmonics import (
    VOLUME, SphereGrid, build_reference_basis, degree_slice, lp_norm, n_modes,
    projection_kernel_diag, sobolev_norm, synthesize, zonal_field)
from .linear_flow import evolve_coeffs, fit_tail_shape, tail_experiment
from .random_basis import (
    coordinate_tail_check, estimate_median_lq, fit_gaussian_tail_rate, sample_haar,
    sample_unit_norms, search_uniform_basis, tail_from_samples)
from .random_data import StatePair, draw_coefficients, draw_data, make_profile
from .seeding import stream

MAX_SEED = 2**64 - 1


# results -------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Check:
    """One pass/fail verdict.  ``invariant`` identifies what was tested."""

    invariant: str
    passed: bool
    value: float
    threshold: float
    relation: str = "<"
    note: str = ""

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        text = f"{mark} {self.invariant}: {self.value:.6g} {self.relation} {self.threshold:.6g}"
        return f"{text} ({self.note})" if self.note else text


def _check(invariant, value, threshold, relation="<", note=""):
    value = float(value)
    ops = {"<": value < threshold, "<=": value <= threshold,
           ">": value > threshold, ">=": value >= threshold}
    passed = bool(ops[relation]) if np.isfinite(value) else False
    return Check(invariant, passed, value, float(threshold), relation, note)


def _within(invariant, value, low, high, note=""):
    value = float(value)
    passed = bool(np.isfinite(value) and low <= value <= high)
    return Check(invariant, passed, value, float(high), f"in [{low:g}, {high:g}], upper", note)


@dataclasses.dataclass
class Outcome:
    checks: list
    tables: dict = dataclasses.field(default_factory=dict)
    constants: dict = dataclasses.field(default_factory=dict)


@dataclasses.dataclass
class ExperimentResult:
    """Persisted outcome of one manifest.

    Attributes
    ----------
    experiment : str
    run_dir : Path
    paths : dict
        Table name to CSV path.
    checks : list of Check
    constants : dict
        Fitted constants and their intervals.
    """

    experiment: str
    run_dir: Path
    paths: dict
    checks: list
    constants: dict

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c.invariant for c in self.checks if not c.passed]

    def report(self):
        return "\n".join(c.line() for c in self.checks)


# manifests -----------------------------------------------------------------

class ManifestError(ValueError):
    """Manifest validation failure; ``fields`` lists every offending name."""

    def __init__(self, problems):
        self.problems = dict(problems)
        self.fields = sorted(self.problems)
        detail = "; ".join(f"{k}: {v}" for k, v in sorted(self.problems.items()))
        super().__init__(f"invalid manifest fields [{', '.join(self.fields)}]: {detail}")


def _positive_int(v):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
        raise ValueError(f"must be a positive integer, got {v!r}")


def _nonneg_int(v):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
        raise ValueError(f"must be a non-negative integer, got {v!r}")


def _real(low=None, high=None, low_open=False, high_open=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
            raise ValueError(f"must be a number, got {v!r}")
        v = float(v)
        if not np.isfinite(v):
            raise ValueError("must be finite")
        if low is not None and (v < low or (low_open and v == low)):
            raise ValueError(f"must be {'>' if low_open else '>='} {low}, got {v}")
        if high is not None and (v > high or (high_open and v == high)):
            raise ValueError(f"must be {'<' if high_open else '<='} {high}, got {v}")
    return check


def _list_of(item):
    def check(v):
        if not isinstance(v, (list, tuple)) or len(v) == 0:
            raise ValueError(f"must be a non-empty list, got {v!r}")
        for x in v:
            item(x)
    return check


def _levels(v):
    if v is None:
        return
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ValueError("must be [start, stop, count] or null")
    _real(0.0)(v[0])
    _real(0.0)(v[1])
    _positive_int(v[2])
    if v[1] <= v[0]:
        raise ValueError("stop must exceed start")


def _choice(*options):
    def check(v):
        if v not in options:
            raise ValueError(f"must be one of {options}, got {v!r}")
    return check


def _span(v):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ValueError("must be [start, stop]")
    _real()(v[0])
    _real()(v[1])
    if v[0] == v[1]:
        raise ValueError("start and stop coincide")


def _optional_manifest(v):
    if v is not None and not isinstance(v, dict):
        raise ValueError("must be a simulate manifest or null")


_FIELDS = {
    "sigma": _real(0.0, 0.5, high_open=True),
    "alpha": _real(),
    "scale": _real(0.0),
    "n_max": _positive_int,
    "dt": _real(0.0, low_open=True),
    "theta": _real(0.0, 1.0, low_open=True),
    "T0": _real(0.0, low_open=True),
    "T": _real(0.0, low_open=True),
    "q": _real(1.0),
    "q_list": _list_of(_real(1.0)),
    "n_list": _list_of(_positive_int),
    "N_list": _list_of(_positive_int),
    "N": _nonneg_int,
    "M": _nonneg_int,
    "regime": _choice(1, 2, 3),
    "mode": _choice("full", "perturbation"),
    "draws": _positive_int,
    "samples": _positive_int,
    "resamples": _positive_int,
    "trials": _positive_int,
    "levels": _levels,
    "t_min": _real(0.0, low_open=True),
    "t_max": _real(0.0, low_open=True),
    "t_count": _positive_int,
    "t_span": _span,
    "n_nodes": _positive_int,
    "n_iter": _positive_int,
    "points": _positive_int,
    "calibration_seeds": _positive_int,
    "fresh_seeds": _positive_int,
    "max_attempts": _positive_int,
    "bound_constant": _real(0.0, low_open=True),
    "c": _real(0.0, low_open=True),
    "c_budget": _real(0.0, low_open=True),
    "safety": _real(1.0),
    "amplitude": _real(),
    "tol": _real(0.0, low_open=True),
    "min_r2": _real(0.0, 1.0),
    "factor": _real(1.0),
    "beta_range": _span,
    "dt_list": _list_of(_real(0.0, low_open=True)),
    "calibration_boost": _list_of(_real(1.0)),
    "order_min": _real(0.0),
    "source": _optional_manifest,
    "ids": _list_of(lambda v: _choice(*CATALOG)(v)),
}


@dataclasses.dataclass
class RunManifest:
    """Everything that determines a run.

    Parameters
    ----------
    experiment : str
        Catalog id (or a tool name: ``simulate``, ``tail-experiment``).
    params : dict
        Overrides of the experiment defaults.
    seed : int
        Master seed; every task derives its own stream from it.
    version : str
        Code version tag recorded with the outputs.
    statement : str
        Tag of the claim the run verifies; defaults from the catalog.
    """

    experiment: str
    params: dict = dataclasses.field(default_factory=dict)
    seed: int = 0
    version: str = __version__
    statement: str = ""

    def __post_init__(self):
        if not self.statement and self.experiment in _REGISTRY:
            self.statement = _REGISTRY[self.experiment].statement

    @property
    def spec(self):
        return _REGISTRY[self.experiment]

    def resolved(self):
        """Defaults merged with overrides."""
        merged = dict(self.spec.defaults)
        merged.update(self.params)
        return merged

    def validate(self):
        """Raise :class:`ManifestError` naming every bad field."""
        problems = {}
        if self.experiment not in _REGISTRY:
            raise ManifestError({"experiment": f"unknown id {self.experiment!r}"})
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed <= MAX_SEED:
            problems["seed"] = f"must be an integer in [0, 2**64), got {self.seed!r}"
        allowed = set(self.spec.defaults)
        params = self.resolved()
        for name, value in params.items():
            if name not in allowed:
                problems[name] = "unknown parameter for this experiment"
                continue
            check = _FIELDS.get(name)
            if check is None:
                continue
            try:
                check(value)
            except (ValueError, TypeError) as exc:
                problems[name] = str(exc)
        if "alpha" in params and "alpha" not in problems and "sigma" not in problems:
            sigma = params.get("sigma", 0.0)
            if params["alpha"] <= 1.5 + sigma:
                problems["alpha"] = f"must exceed 3/2 + sigma = {1.5 + sigma}"
        if {"t_min", "t_max"} <= set(params) and not ({"t_min", "t_max"} & set(problems)):
            if params["t_max"] <= params["t_min"]:
                problems["t_max"] = "must exceed t_min"
        if problems:
            raise ManifestError(problems)
        return self

    def to_dict(self):
        return {"experiment": self.experiment, "params": self.resolved(),
                "seed": int(self.seed), "version": self.version,
                "statement": self.statement}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {"experiment", "params", "seed", "version", "statement"}
        if unknown:
            raise ManifestError({k: "unknown manifest key" for k in unknown})
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(io.read_json(path))

    def content_hash(self):
        return hashlib.sha256(io.dumps(self.to_dict()).encode()).hexdigest()[:16]


# helpers -------------------------------------------------------------------

def _draw_state(p, seed, *path, n_max=None, scale=None):
    n_max = p["n_max"] if n_max is None else n_max
    scale = p.get("scale", 1.0) if scale is None else scale
    profile = make_profile(p.get("sigma", 0.0), p["alpha"], n_max, scale=scale)
    draw = draw_coefficients(n_max, "gaussian", stream(seed, *path))
    return draw_data(profile, None, draw)


def _solver():
    from . import solver

    return solver


# spectral core -------------------------------------------------------------

def _parseval(p, seed):
    n_max = p["n_max"]
    basis = build_reference_basis(n_max)
    grid = SphereGrid.for_bandlimit(n_max)
    coeffs = stream(seed, "parseval").standard_normal((p["trials"], n_modes(n_max)))
    values = basis.synthesize(coeffs, grid)
    back = basis.analyze(values, grid)
    round_trip = np.max(np.abs(back - coeffs), axis=-1)
    energy = np.sum(coeffs**2, axis=-1)
    parseval = np.abs(lp_norm(values, 2, grid) ** 2 - energy) / energy
    rows = [(i, round_trip[i], parseval[i]) for i in range(len(energy))]
    return Outcome(
        [_check("parseval.round-trip", round_trip.max(), p["tol"]),
         _check("parseval.identity", parseval.max(), p["tol"])],
        {"parseval": (["trial", "round_trip_error", "parseval_error"], rows)})


def _kernel_constancy(p, seed):
    n_max = p["n_max"]
    basis = build_reference_basis(n_max)
    grid = SphereGrid.for_bandlimit(n_max)
    rows = []
    for n in range(1, n_max + 1):
        K = projection_kernel_diag(n, grid, basis)
        target = n * n / VOLUME
        rows.append((n, float(np.max(np.abs(K - target)) / target)))
    worst = max(r[1] for r in rows)
    return Outcome([_check("kernel-constancy.relative-deviation", worst, p["tol"])],
                   {"kernel": (["n", "relative_deviation"], rows)})


def _bernstein(p, seed):
    rows = []
    for n in range(1, p["n_max"] + 1):
        grid = SphereGrid.for_bandlimit(n)
        # centre on a node so the grid maximum is the true sup-norm
        z = zonal_field(n, grid.chi[0], grid.theta[0], grid.phi[0])
        ratio = float(np.abs(synthesize(z, grid)).max() / sobolev_norm(z, 0))
        target = n / math.sqrt(VOLUME)
        rows.append((n, ratio, target, abs(ratio - target) / target))
    worst = max(r[3] for r in rows)
    return Outcome([_check("bernstein.zonal-ratio", worst, p["tol"])],
                   {"bernstein": (["n", "ratio", "target", "relative_error"], rows)})


# Haar and concentration ----------------------------------------------------

def _haar(p, seed):
    rows = []
    for N in p["N_list"]:
        rows.append((N, sample_haar(N, stream(seed, "haar", N)).orthogonality_error()))
    worst = max(r[1] for r in rows)
    return Outcome([_check("haar-orthogonality.max-error", worst, p["tol"])],
                   {"haar": (["N", "max_abs_QtQ_minus_I"], rows)})


def _coordinate_tail(p, seed):
    checks, rows = [], []
    levels = np.linspace(*p["levels"][:2], p["levels"][2])
    for N in p["N_list"]:
        tail = coordinate_tail_check(N, levels, p["draws"], stream(seed, "coordinate", N))
        excess = float(np.max(tail.ci_low - tail.envelope))
        checks.append(_check(f"coordinate-tail.dominated-N{N}", excess, 0.0, "<=",
                             "Wilson lower bound minus envelope"))
        rows += [(N, t, s, lo, hi, e) for t, s, lo, hi, e in
                 zip(tail.levels, tail.survival, tail.ci_low, tail.ci_high, tail.envelope)]
    return Outcome(checks, {"coordinate_tail": (
        ["N", "level", "survival", "ci_low", "ci_high", "envelope"], rows)})


def _median_sqrtq(p, seed):
    rows = []
    for n in p["n_list"]:
        for q in p["q_list"]:
            m = estimate_median_lq(n, q, p["samples"], stream(seed, "median", n, q),
                                   n_resamples=p["resamples"])
            rows.append((n, q, m.estimate, m.ci_low, m.ci_high, m.estimate / math.sqrt(q)))
    ratios = np.array([r[5] for r in rows])
    spread = float(ratios.max() / ratios.min())
    # the same medians for the probability measure on S^3 with unit L^2 norm
    normalised = np.array([r[5] * VOLUME ** (0.5 - 1.0 / r[1]) for r in rows])
    return Outcome(
        [_check("median-sqrtq.factor-2-spread", spread, p["factor"], "<=")],
        {"median": (["n", "q", "median", "ci_low", "ci_high", "median_over_sqrt_q"], rows)},
        {"spread": spread,
         "spread_probability_measure": float(normalised.max() / normalised.min())})


def _tail_shape(p, seed):
    rows = []
    q = p["q"]
    for n in p["n_list"]:
        norms = sample_unit_norms(n, q, p["samples"], stream(seed, "tail-shape", n))
        dev = np.abs(norms - np.median(norms))
        tail = tail_from_samples(dev, np.linspace(0.0, dev.max(), 400))
        rate, _, r2 = fit_gaussian_tail_rate(tail, min_count=20, max_survival=0.5)
        rows.append((n, rate, r2))
    rates = np.array([r[1] for r in rows])
    steps = np.diff(rates)
    return Outcome([_check("tail-shape.rate-increasing-in-n", steps.min(), 0.0, ">",
                           "smallest increment of the fitted rate")],
                   {"tail_rate": (["n", "rate", "r_squared"], rows)})


# linear flow ---------------------------------------------------------------

def _linear_periodicity(p, seed):
    state = _draw_state(p, seed, "periodicity")
    pos, vel = state.pos.coeffs, state.vel.coeffs
    rng = stream(seed, "periodicity-times")
    rows = []
    for s, t in rng.uniform(-10, 10, size=(p["trials"], 2)):
        a = evolve_coeffs(*evolve_coeffs(pos, vel, s), t)
        b = evolve_coeffs(pos, vel, s + t)
        rows.append(("group", s, t, max(np.abs(a[0] - b[0]).max(), np.abs(a[1] - b[1]).max())))
    for k in (1, 2, 5):
        c = evolve_coeffs(pos, vel, 2 * np.pi * k)
        rows.append(("period", 2 * np.pi * k, 0.0,
                     max(np.abs(c[0] - pos).max(), np.abs(c[1] - vel).max())))
    scale = max(np.abs(pos).max(), np.abs(vel).max())
    group = max(r[3] for r in rows if r[0] == "group") / scale
    period = max(r[3] for r in rows if r[0] == "period") / scale
    return Outcome([_check("linear-periodicity.group-law", group, p["tol"]),
                    _check("linear-periodicity.2pi-period", period, p["tol"])],
                   {"periodicity": (["kind", "s", "t", "max_abs_error"], rows)})


def _proba(regime):
    def run(p, seed):
        profile = make_profile(p["sigma"], p["alpha"], p["n_max"], scale=p["scale"])
        basis = search_uniform_basis(p["n_max"], [4, 6, 8], p["bound_constant"],
                                     p["max_attempts"], stream(seed, "basis"))
        kwargs = {"N": p["N"]} if regime == 1 else {"M": p["M"]} if regime == 3 else {}
        probe = np.array([1.0])
        ex = tail_experiment(profile, basis.rotations, regime, probe, p["draws"],
                             stream(seed, "draws", regime), **kwargs)
        if p["levels"] is None:
            levels = np.linspace(0.0, float(ex.norms.max()), 80)[1:]
        else:
            levels = np.linspace(*p["levels"][:2], p["levels"][2])
        tail = tail_from_samples(ex.norms, levels)
        fit = fit_tail_shape(tail, regime)
        shape = "log-log" if regime == 1 else "lambda^2"
        return Outcome(
            [_check(f"prop-proba-{regime}.tail-shape-r2", fit["r_squared"], p["min_r2"], ">",
                    f"log-survival linear in {shape}, {fit['n_levels']} levels")],
            {"tail": (["level", "survival", "ci_low", "ci_high"],
                      list(zip(tail.levels, tail.survival, tail.ci_low, tail.ci_high)))},
            {"fit": fit, "S": ex.S, "S_high": ex.S_high, "attempts": basis.attempts})
    return run


# nonlinear solver ----------------------------------------------------------

def _duffing(p, seed):
    solver = _solver()
    n_max = p["n_max"]
    pos = np.zeros(n_modes(n_max))
    pos[0] = p["amplitude"]
    state = StatePair(pos, np.zeros_like(pos))
    traj = solver.solve(state, (0.0, p["T"]), p["dt"], save_every=p["save_every"])
    y, _ = solver.constant_mode_oracle(p["amplitude"], 0.0, traj.times)
    err = np.abs(traj.pos[:, 0] - y)
    leak = float(np.abs(traj.pos[:, 1:]).max()) if n_max > 1 else 0.0
    rows = list(zip(traj.times, traj.pos[:, 0], y, err))
    return Outcome([_check("duffing-oracle.max-error", err.max(), p["tol"]),
                    _check("duffing-oracle.no-leakage", leak, p["tol"])],
                   {"duffing": (["T", "solver", "oracle", "abs_error"], rows)})


def _hamiltonian_drift(p, seed):
    solver = _solver()
    state = _draw_state(p, seed, "drift")

    def drift(dt):
        traj = solver.solve(state, (0.0, p["T"]), dt, save_every=max(1, round(0.1 / dt)))
        return solver.hamiltonian_drift(traj)

    # the order is read off above the rounding floor, the tolerance at ``dt``
    dts = [float(d) for d in p["dt_list"]]
    drifts = [drift(dt) for dt in dts]
    order = solver.convergence_order(drifts, dts)
    at_dt = drift(p["dt"])
    rows = list(zip(dts, drifts)) + [(p["dt"], at_dt)]
    return Outcome(
        [_check("hamiltonian-drift.at-dt", at_dt, p["tol"]),
         _check("hamiltonian-drift.order", order, p["order_min"], ">=")],
        {"drift": (["dt", "relative_drift"], rows)},
        {"order": order})


def _picard(p, seed):
    solver = _solver()

    def case(tag, i, boost=1.0):
        d = _draw_state(p, seed, "picard", tag, i, scale=p["scale"] * boost)
        hyp = solver.local_hypotheses(None, d.pos, d.vel)
        return (None, d.pos, d.vel, p["T0"], max(hyp.values()))

    # calibrate on amplitudes at and above the test amplitude
    cal = [case("calibration", i, b) for b in p["calibration_boost"]
           for i in range(p["calibration_seeds"])]
    C = solver.calibrate_picard_constant(cal, C0=2.0**-14)
    C_used = p["safety"] * C
    rows, checks = [], []
    for i in range(p["fresh_seeds"]):
        g, v0, v1, T0, Lam = case("fresh", i)
        try:
            r = solver.picard_local(g, v0, v1, T0, Lam, n_iter=p["n_iter"], C=C_used)
            factor, T1 = r.contraction, r.T1
        except ContractionError as exc:
            factor = math.inf
            T1 = solver.local_time(C_used, Lam, T0)
            if getattr(exc, "result", None) is not None:
                factor = exc.result.contraction
        rows.append((i, Lam, T1, factor))
        checks.append(_check(f"picard-contraction.fresh-{i}", factor, 1.0))
    return Outcome(checks, {"picard": (["seed_index", "Lambda", "T1", "factor"], rows)},
                   {"C_calibrated": C, "C_used": C_used})


def _uniqueness(p, seed):
    solver = _solver()
    state = _draw_state(p, seed, "uniqueness")
    T = 2 * np.pi
    # snap dt to T / n so both runs save at identical times
    dt = T / math.ceil(T / p["dt"])
    every = max(1, round(0.05 / dt))
    a = solver.solve(state, (0.0, T), dt, save_every=every)
    b = solver.solve(state, (0.0, T), dt / 2, save_every=2 * every)
    times, H = solver.uniqueness_energy(a, b)
    return Outcome([_check("uniqueness-H.max", H.max(), p["tol"])],
                   {"uniqueness": (["T", "H"], list(zip(times, H)))})


# globalisation -------------------------------------------------------------

def _gronwall(p, seed):
    solver = _solver()
    zero_like = None

    def run(tag, i):
        g = _draw_state(p, seed, "gronwall", tag, i)
        nonlocal zero_like
        zero_like = StatePair.zeros(p["n_max"])
        return solver.solve(zero_like, (0.0, p["T0"]), p["dt"], forcing=g)

    cal = [run("calibration", i) for i in range(p["calibration_seeds"])]
    C = solver.calibrate_gronwall(cal, c=p["c"], safety=p["safety"])
    rows, checks = [], []
    for i in range(p["fresh_seeds"]):
        traj = run("fresh", i)
        env = solver.gronwall_envelope_case1(traj.forcing, traj.times, C, p["c"])
        E = traj.energies()
        ok = env > 0
        worst = float(np.max(E[ok] / env[ok])) if np.any(ok) else (0.0 if E.max() == 0 else math.inf)
        rows.append((i, float(E.max()), float(env[-1]), worst))
        checks.append(_check(f"gronwall-case1.fresh-{i}", worst, 1.0, "<=",
                             "max of energy over envelope"))
    return Outcome(checks, {"gronwall": (["seed_index", "max_energy", "envelope_end",
                                          "max_ratio"], rows)},
                   {"C": C, "c": p["c"]})


def _budget(p, seed):
    solver = _solver()
    budget = solver.GlobalizationBudget(p["theta"], p["T0"], p["N"], p["c_budget"])
    rows, checks = [], []
    accepted = attempt = 0
    while accepted < p["fresh_seeds"] and attempt < p["max_attempts"]:
        g = _draw_state(p, seed, "budget", attempt)
        report = solver.check_globalization_budget(g, budget)
        attempt += 1
        row = [attempt - 1, int(report.J)] + [report.values[k] for k in "FGHI"]
        if not report.J:
            rows.append(tuple(row + [math.nan]))
            continue
        E, _ = solver.validate_globalization(g, budget, dt=p["dt"])
        rows.append(tuple(row + [E]))
        checks.append(_check(f"budget-case2.seed-{attempt - 1}", E, budget.energy_ceiling, "<",
                             "max energy over [-T0, T0] against exp(p/6)"))
        accepted += 1
    checks.append(_check("budget-case2.accepted-seeds", accepted, p["fresh_seeds"], ">="))
    amplitude = {k: float(v) for k, v in report.failure_amplitude.items()}
    return Outcome(checks, {"budget": (["attempt", "in_J", "F", "G", "H", "I", "max_energy"],
                                       rows)},
                   {"thresholds": report.thresholds, "failure_amplitude_last": amplitude,
                    "first_to_fail_last": report.first_to_fail})


# Penrose -------------------------------------------------------------------

def _chart_roundtrip(p, seed):
    from . import penrose

    rng = stream(seed, "chart")
    t = rng.uniform(-p["T"], p["T"], p["points"])
    r = rng.uniform(0.0, p["T"], p["points"])
    T, R, _ = penrose.chart_forward(t, r)
    t2, r2 = penrose.chart_inverse(T, R)
    size = np.sqrt(1.0 + t * t + r * r)
    forward = float(np.max(np.maximum(np.abs(t2 - t), np.abs(r2 - r)) / size))
    R0 = rng.uniform(0.0, np.pi, p["points"])
    T0 = rng.uniform(-1.0, 1.0, p["points"]) * (np.pi - R0)
    # near Omega = 0 the inverse loses about eps / Omega to cancellation in t - r
    keep = np.cos(T0) + np.cos(R0) >= p["omega_min"]
    T0, R0 = T0[keep], R0[keep]
    t3, r3 = penrose.chart_inverse(T0, R0)
    T3, R3, _ = penrose.chart_forward(t3, r3)
    backward = float(np.max(np.maximum(np.abs(T3 - T0), np.abs(R3 - R0))))
    # pull-back of the measure at t = 0: dx = Omega0**-3 dvol
    state = _draw_state(p, seed, "pullback")
    egrid = penrose.EuclideanRadialGrid.for_bandlimit(p["n_max"])
    v = penrose.sphere_values(state.pos.coeffs, egrid)
    lhs = float(egrid.integrate(egrid.omega0[:, None, None] ** 3 * v * v))
    rhs = float(np.sum(state.pos.coeffs**2))
    pullback = abs(lhs - rhs) / rhs
    rows = [("forward-inverse", forward), ("inverse-forward", backward), ("pullback", pullback)]
    return Outcome([_check("chart-roundtrip.forward", forward, p["tol"]),
                    _check("chart-roundtrip.inverse", backward, p["tol"]),
                    _check("chart-roundtrip.measure-pullback", pullback, p["tol_pullback"])],
                   {"chart": (["check", "error"], rows)})


def _eigen(p, seed):
    from . import penrose

    n_max = p["n_max"]
    egrid = penrose.EuclideanRadialGrid.for_bandlimit(n_max)
    rows = []
    for op in ("H0", "H1"):
        for n in range(1, n_max + 1):
            res = max(penrose.eigen_residual(op, n, k, egrid, n_max) for k in range(1, n * n + 1))
            rows.append((op, n, res))
    return Outcome([_check(f"h0-h1-eigen.{op}", max(r[2] for r in rows if r[0] == op), p["tol"])
                    for op in ("H0", "H1")],
                   {"eigen": (["operator", "n", "max_residual"], rows)})


def _lq(p, seed):
    from . import penrose

    solver = _solver()
    state = _draw_state(p, seed, "lq")
    traj = solver.solve(state, (-np.pi, np.pi), p["dt"], t0=0.0)
    rows, checks = [], []
    for q in p["q_list"]:
        res = penrose.lq_transfer(traj, q, n_nodes=p["n_nodes"])
        rows.append(("trajectory", q, res.euclid, res.sphere, res.relative_gap))
        checks.append(_check(f"lq-transfer.identity-q{q:g}", res.relative_gap, p["tol"]))
        checks.append(_check(f"lq-transfer.omega-bound-q{q:g}",
                             res.euclid_norm / (2 ** ((q - 4) / q) * res.cylinder_norm),
                             1.0 + 1e-12, "<="))
    one = np.zeros(1)
    one[0] = math.sqrt(VOLUME)
    res = penrose.lq_transfer((lambda T: np.broadcast_to(one, np.shape(T) + (1,)), 1), 4.0,
                              n_nodes=p["n_nodes"])
    closed = 2 * np.pi**3
    gap = abs(res.euclid - closed) / closed
    rows.append(("constant", 4.0, res.euclid, closed, gap))
    checks.append(_check("lq-transfer.constant-q4-closed-form", gap, p["tol"]))
    return Outcome(checks, {"lq_transfer": (["field", "q", "euclid", "sphere", "relative_gap"],
                                            rows)})


def _source_run(source):
    """Trajectory and initial data of an embedded ``simulate`` manifest."""
    sim = RunManifest.from_dict(source).validate()
    params = sim.resolved()
    if sim.experiment != "simulate" or params["mode"] != "full":
        raise ManifestError({"source": "must be a full-mode simulate manifest"})
    if params["t_span"][0] != 0 or params["t_span"][1] < np.pi:
        raise ManifestError({"source": "simulation must cover [0, pi]"})
    traj = _simulate(params, int(sim.seed)).tables["trajectory"]
    return traj, StatePair(traj.pos[0].copy(), traj.vel[0].copy()), params["dt"]


def _scattering(p, seed):
    from . import penrose

    solver = _solver()
    if p["source"] is not None:
        traj, lin, dt = _source_run(p["source"])
    else:
        dt = p["dt"]
        lin = _draw_state(p, seed, "scattering")
        traj = solver.solve(lin, (0.0, np.pi), dt)
    control = solver.solve(lin, (traj.times[0], traj.times[-1]), dt, coupling=0.0)
    t_list = np.geomspace(p["t_min"], p["t_max"], p["t_count"])
    fit = penrose.scattering_decay(traj, lin, p["q"], t_list, n_nodes=p["n_nodes"])
    ctrl = penrose.scattering_decay(control, lin, p["q"], t_list, n_nodes=p["n_nodes"])
    lo, hi = p["beta_range"]
    checks = [_within("scattering-fit.beta", fit.beta, lo, hi,
                      f"stderr {fit.stderr:.3g}, window [{p['t_min']:g}, {p['t_max']:g}]"),
              _check("scattering-fit.control", float(np.max(ctrl.norms)), p["tol_control"])]
    return Outcome(checks,
                   {"decay": (["t", "norm", "control_norm"],
                              list(zip(fit.t, fit.norms, ctrl.norms)))},
                   {"beta": fit.beta, "stderr": fit.stderr, "intercept": fit.intercept,
                    "window": [p["t_min"], p["t_max"]],
                    "interpolation_error": fit.interpolation_error})


# tools ---------------------------------------------------------------------

def _simulate(p, seed):
    solver = _solver()
    data = _draw_state(p, seed, "simulate")
    t0, t1 = p["t_span"]
    save = max(1, p["save_every"])
    if p["mode"] == "full":
        traj = solver.solve(data, (t0, t1), p["dt"], save_every=save)
        drift = solver.hamiltonian_drift(traj)
        checks = [_check("simulate.no-blowup", 0.0 if traj.blowup is None else 1.0, 0.5),
                  _check("simulate.hamiltonian-drift", drift, p["tol"])]
    else:
        zero = StatePair.zeros(p["n_max"])
        traj = solver.solve(zero, (t0, t1), p["dt"], forcing=data, save_every=save)
        checks = [_check("simulate.no-blowup", 0.0 if traj.blowup is None else 1.0, 0.5)]
    return Outcome(checks, {"trajectory": traj}, {"final_time": float(traj.times[-1])})


def _tail_tool(p, seed):
    profile = make_profile(p["sigma"], p["alpha"], p["n_max"], scale=p["scale"])
    basis = search_uniform_basis(p["n_max"], [4, 6, 8], p["bound_constant"],
                                 p["max_attempts"], stream(seed, "basis"))
    regime = p["regime"]
    kwargs = {"N": p["N"]} if regime == 1 else {"M": p["M"]} if regime == 3 else {}
    levels = np.linspace(*p["levels"][:2], p["levels"][2])
    ex = tail_experiment(profile, basis.rotations, regime, levels, p["draws"],
                         stream(seed, "draws", regime), **kwargs)
    finite = float(np.mean(np.isfinite(ex.norms)))
    return Outcome([_check("tail-experiment.finite-norms", finite, 1.0, ">=")],
                   {"tail": ex.tail}, {"fit": ex.fit, "S": ex.S, "S_high": ex.S_high})


# catalog -------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Experiment:
    id: str
    statement: str
    op: str
    criterion: int | None
    defaults: dict
    runner: Callable


_BASE = {"sigma": 0.0, "alpha": 1.55, "scale": 1.0}

CATALOG = {e.id: e for e in [
    Experiment("parseval", "orthonormality of the harmonic basis", "harmonics.analyze",
               1, {"n_max": 12, "trials": 4, "tol": 1e-10}, _parseval),
    Experiment("kernel-constancy", "projection kernel equals n^2/vol", "harmonics.projection_kernel_diag",
               1, {"n_max": 12, "tol": 1e-9}, _kernel_constancy),
    Experiment("bernstein", "zonal extremiser of the sup-norm", "harmonics.zonal_field",
               1, {"n_max": 12, "tol": 1e-6}, _bernstein),
    Experiment("haar-orthogonality", "Haar sampling of O(N)", "random_basis.sample_haar",
               2, {"N_list": [2, 10, 50, 100, 400], "tol": 1e-12}, _haar),
    Experiment("coordinate-tail", "coordinate concentration on S^{N-1}",
               "random_basis.coordinate_tail_check", 2,
               {"N_list": [10, 50], "draws": 100_000, "levels": [0.0, 1.0, 51]},
               _coordinate_tail),
    Experiment("median-sqrtq", "median L^q norm grows like sqrt(q)",
               "random_basis.estimate_median_lq", 2,
               {"n_list": list(range(2, 11)), "q_list": [4, 8, 16], "samples": 400,
                "resamples": 200, "factor": 2.0}, _median_sqrtq),
    Experiment("tail-shape", "Gaussian concentration rate grows with n",
               "random_basis.fit_gaussian_tail_rate", 2,
               {"q": 4.0, "n_list": [4, 6, 8, 10, 12], "samples": 20_000}, _tail_shape),
    Experiment("linear-periodicity", "linear propagator group law and period",
               "linear_flow.evolve_coeffs", 3,
               {**_BASE, "n_max": 12, "trials": 20, "tol": 1e-12}, _linear_periodicity),
    *[Experiment(f"prop-proba-{r}", f"prop-proba-regime-{r}", "linear_flow.tail_experiment",
                 3 if r == 2 else None,
                 {**_BASE, "n_max": 8, "draws": 10_000 if r == 2 else 2000,
                  "N": 4, "M": 4, "levels": None, "min_r2": 0.9, "bound_constant": 1.5,
                  "max_attempts": 200}, _proba(r)) for r in (1, 2, 3)],
    Experiment("duffing-oracle", "constant mode reduces to a scalar oscillator",
               "solver.solve", 4,
               {"n_max": 2, "amplitude": 1.0, "T": 20.0, "dt": 1e-3, "save_every": 100,
                "tol": 1e-6}, _duffing),
    Experiment("hamiltonian-drift", "conservation of the Hamiltonian", "solver.hamiltonian_drift",
               4, {**_BASE, "n_max": 6, "T": 2 * np.pi, "dt": 1e-3,
                   "dt_list": [4e-2, 2e-2, 1e-2, 5e-3],
                   "tol": 1e-6, "order_min": 3.5}, _hamiltonian_drift),
    Experiment("picard-contraction", "local well-posedness by contraction",
               "solver.picard_local", 4,
               {**_BASE, "scale": 4.0, "n_max": 4, "T0": 0.5, "calibration_seeds": 6,
                "calibration_boost": [1.0, 1.25, 1.5],
                "fresh_seeds": 10, "n_iter": 8, "safety": 2.0}, _picard),
    Experiment("gronwall-case1", "energy envelope for the perturbation equation",
               "solver.gronwall_envelope_case1", 5,
               {**_BASE, "scale": 0.3, "n_max": 6, "T0": 2.0, "dt": 1e-2,
                "calibration_seeds": 5, "fresh_seeds": 20, "c": 1.0, "safety": 2.0},
               _gronwall),
    Experiment("budget-case2", "globalisation on the budget set J", "solver.check_globalization_budget",
               5, {**_BASE, "scale": 0.004, "n_max": 8, "theta": 0.5, "T0": 4.0, "N": 4,
                   "c_budget": 1.0, "dt": 1e-2, "fresh_seeds": 20, "max_attempts": 60},
               _budget),
    Experiment("chart-roundtrip", "Penrose chart and measure pull-back", "penrose.chart_forward",
               6, {**_BASE, "n_max": 6, "points": 100_000, "T": 50.0, "tol": 1e-12,
                   "tol_pullback": 1e-8, "omega_min": 1e-2}, _chart_roundtrip),
    Experiment("h0-h1-eigen", "conjugated radial operators have eigenvalues 1 - n^2",
               "penrose.eigen_residual", 6, {"n_max": 8, "tol": 1e-5}, _eigen),
    Experiment("lq-transfer", "L^q change of variables under the Penrose map",
               "penrose.lq_transfer", 6,
               {**_BASE, "scale": 0.5, "n_max": 4, "dt": 1e-2, "q_list": [4.0, 5.0, 6.0],
                "n_nodes": 64, "tol": 1e-5}, _lq),
    Experiment("scattering-fit", "scattering decay of the nonlinear remainder",
               "penrose.scattering_decay", 7,
               {**_BASE, "scale": 0.1, "n_max": 8, "dt": 1e-2, "q": 6.0, "t_min": 2.0,
                "t_max": 40.0, "t_count": 12, "n_nodes": 96, "beta_range": [0.30, 0.40],
                "tol_control": 1e-8, "source": None}, _scattering),
    Experiment("uniqueness-H", "uniqueness in the energy class", "solver.uniqueness_energy",
               8, {**_BASE, "n_max": 6, "dt": 1e-2, "tol": 1e-6}, _uniqueness),
]}

ACCEPTANCE = {}
for _e in CATALOG.values():
    if _e.criterion is not None:
        ACCEPTANCE.setdefault(_e.criterion, []).append(_e.id)


def _suite(p, seed):
    raise RuntimeError("the suite is run by run_experiment")


SUITE = Experiment("all-acceptance", "every acceptance criterion", "harness.run_experiment",
                   None, {"ids": [i for ids in ACCEPTANCE.values() for i in ids]}, _suite)

TOOLS = {e.id: e for e in [
    Experiment("simulate", "trajectory of the cubic equation", "solver.solve", None,
               {**_BASE, "mode": "full", "n_max": 6, "dt": 1e-2, "t_span": [0.0, np.pi],
                "save_every": 1, "tol": 1e-6}, _simulate),
    Experiment("tail-experiment", "tail of a weighted space-time norm",
               "linear_flow.tail_experiment", None,
               {**_BASE, "regime": 2, "n_max": 8, "N": 4, "M": 4, "draws": 2000,
                "levels": [0.05, 3.0, 60], "bound_constant": 1.5, "max_attempts": 200},
               _tail_tool),
]}

_REGISTRY = {**CATALOG, SUITE.id: SUITE, **TOOLS}


def list_experiments():
    """Catalog id to ``(statement, module op)``; the order is fixed."""
    return {e.id: (e.statement, e.op) for e in CATALOG.values()}


# orchestration ---------------------------------------------------------------

def _write_table(path, value):
    from .random_basis import TailEstimate
    from .solver import Trajectory

    if isinstance(value, Trajectory):
        io.write_trajectory(path, value)
    elif isinstance(value, TailEstimate):
        io.write_tail(path, value)
    else:
        header, rows = value
        io.write_rows(path, header, rows)


def _persist(manifest, outcome, out):
    run_dir = Path(out) / manifest.content_hash()
    run_dir.mkdir(parents=True, exist_ok=True)
    io.write_json(run_dir / "manifest.json", manifest.to_dict())
    paths = {}
    for name, value in outcome.tables.items():
        path = run_dir / f"{name}.csv"
        _write_table(path, value)
        paths[name] = path
    result = ExperimentResult(manifest.experiment, run_dir, paths, outcome.checks,
                              outcome.constants)
    io.write_json(run_dir / "result.json", {
        "experiment": manifest.experiment,
        "statement": manifest.statement,
        "passed": result.passed,
        "failures": result.failures,
        "checks": [dataclasses.asdict(c) for c in outcome.checks],
        "constants": outcome.constants,
        "tables": sorted(paths),
    })
    return result


def run_experiment(manifest, out="runs"):
    """Validate, run and persist one manifest.

    Returns
    -------
    ExperimentResult

    Raises
    ------
    ManifestError
        Listing every invalid field.
    RuntimeError
        Wrapping a module failure with the experiment id.
    """
    manifest.validate()
    params = manifest.resolved()
    if manifest.experiment == SUITE.id:
        return _run_suite(manifest, params, out)
    spec = manifest.spec
    try:
        outcome = spec.runner(params, int(manifest.seed))
    except ManifestError:
        raise
    except Exception as exc:
        raise RuntimeError(f"experiment {spec.id!r} failed: {exc}") from exc
    return _persist(manifest, outcome, out)


def _run_suite(manifest, params, out):
    checks, rows, constants = [], [], {}
    for eid in params["ids"]:
        sub = RunManifest(eid, seed=manifest.seed, version=manifest.version)
        res = run_experiment(sub, out)
        for c in res.checks:
            rows.append((CATALOG[eid].criterion, eid, c.invariant, int(c.passed), c.value,
                         c.threshold))
        checks.extend(res.checks)
        constants[eid] = {"run_dir": res.run_dir.name, "passed": res.passed}
    outcome = Outcome(checks, {"summary": (
        ["criterion", "experiment", "invariant", "passed", "value", "threshold"], rows)},
        constants)
    return _persist(manifest, outcome, out)


__all__ = ["RunManifest", "ManifestError", "ExperimentResult", "Check", "Experiment",
           "CATALOG", "ACCEPTANCE", "TOOLS", "list_experiments", "run_experiment"]
