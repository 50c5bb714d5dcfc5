"""CSV and JSON persistence for fields, tail estimates, rotations and trajectories."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .harmonics import SphereField, mode_table
from .random_basis import BasisRotation, TailEstimate


def _fmt(x):
    return repr(float(x))


def write_field(path, field):
    """Rows ``(n, k, coeff)``."""
    n, k, _, _ = mode_table(field.n_max)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "coeff"])
        for row in zip(n, k, field.coeffs):
            w.writerow([int(row[0]), int(row[1]), _fmt(row[2])])


def read_field(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n_max = max(int(r["n"]) for r in rows)
    return SphereField.from_modes(n_max, {(int(r["n"]), int(r["k"])): float(r["coeff"])
                                          for r in rows})


def write_tail(path, tail):
    """Columns ``level, survival, ci_low, ci_high``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "survival", "ci_low", "ci_high"])
        for row in zip(tail.levels, tail.survival, tail.ci_low, tail.ci_high):
            w.writerow([_fmt(x) for x in row])


def read_tail(path, n_samples=0):
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    return TailEstimate(levels=data[:, 0], survival=data[:, 1], n_samples=n_samples,
                        ci_low=data[:, 2], ci_high=data[:, 3])


def write_rotation(path, rotation):
    """Header ``n, seed`` then the matrix rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "seed"])
        w.writerow([rotation.n, "" if rotation.seed is None else rotation.seed])
        for row in rotation.Q:
            w.writerow([_fmt(x) for x in row])


def read_rotation(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    n = int(rows[1][0])
    seed = int(rows[1][1]) if rows[1][1] else None
    Q = np.array([[float(x) for x in row] for row in rows[2:]])
    return BasisRotation(Q=Q, n=n, seed=seed)


def write_trajectory(path, traj):
    """Column ``T`` then ``pos_<n>_<k>`` and ``vel_<n>_<k>`` per mode."""
    n, k, _, _ = mode_table(traj.n_max)
    header = ["T"] + [f"pos_{a}_{b}" for a, b in zip(n, k)] + [f"vel_{a}_{b}" for a, b in zip(n, k)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for T, p, v in zip(traj.times, traj.pos, traj.vel):
            w.writerow([_fmt(T)] + [_fmt(x) for x in p] + [_fmt(x) for x in v])


def read_trajectory(path, mode="full"):
    from .solver import Trajectory

    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    m = (data.shape[1] - 1) // 2
    return Trajectory(data[:, 0], data[:, 1:1 + m], data[:, 1 + m:], mode)


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(obj):
    """Canonical JSON (sorted keys) so equal content gives equal bytes."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default)


def write_json(path, obj):
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
