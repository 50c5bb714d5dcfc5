"""Spectral simulation and verification of the cubic wave equation on S^3
with randomised initial data.

Modules
-------
harmonics
    Hyperspherical harmonics, quadrature grids and the spectral transform.
random_basis
    Haar-random orthonormal bases of the eigenspaces and their concentration.
random_data
    Randomised initial data of prescribed Sobolev regularity.
linear_flow
    The linear propagator and weighted space-time norms.
solver
    The nonlinear integrator, local and global energy arguments.
penrose
    The Penrose chart, conjugated radial operators and scattering decay.
harness
    Run manifests, the experiment catalog and orchestration.
"""

from . import harmonics, linear_flow, penrose, random_basis, random_data, seeding, solver
from ._validation import (
    ContractionError, ExhaustedAttemptsError, OutOfImageError, RepresentationError,
    ResolutionError)
from ._version import __version__
from .harmonics import SphereField, SphereGrid, SphericalHarmonicTransform
from .harness import RunManifest, list_experiments, run_experiment
from .penrose import DecayRateRegressor
from .random_basis import RandomBasis
from .random_data import StatePair
from .solver import KleinGordonSolver, Trajectory, solve

__all__ = [
    "harmonics", "random_basis", "random_data", "linear_flow", "solver", "penrose",
    "seeding", "SphereField", "SphereGrid", "SphericalHarmonicTransform", "RandomBasis",
    "StatePair", "Trajectory", "solve", "KleinGordonSolver", "DecayRateRegressor",
    "RunManifest", "list_experiments", "run_experiment", "ResolutionError",
    "OutOfImageError", "ContractionError", "ExhaustedAttemptsError", "RepresentationError",
    "__version__",
]
