"""Input validation helpers shared by the estimators and module functions."""

import numbers

import numpy as np


class ResolutionError(ValueError):
    """A quadrature grid or time discretisation is too coarse for the request."""


class OutOfImageError(ValueError):
    """A point lies outside the image of the Penrose chart (Omega <= 0)."""


class ContractionError(RuntimeError):
    """Picard iteration did not contract on the requested interval."""


class ExhaustedAttemptsError(RuntimeError):
    """Rejection sampling ran out of attempts."""


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_real(value, name, minimum=None, maximum=None, strict_min=False,
               strict_max=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if np.isnan(value):
        raise ValueError(f"{name} must not be NaN")
    if minimum is not None:
        if value < minimum or (strict_min and value == minimum):
            op = ">" if strict_min else ">="
            raise ValueError(f"{name} must be {op} {minimum}, got {value}")
    if maximum is not None:
        if value > maximum or (strict_max and value == maximum):
            op = "<" if strict_max else "<="
            raise ValueError(f"{name} must be {op} {maximum}, got {value}")
    return value


def check_exponent(p, name="p", minimum=1.0):
    """Accept a real exponent >= ``minimum`` or ``np.inf``."""
    if p == np.inf or p == "inf":
        return np.inf
    return check_real(p, name, minimum=minimum)


def check_levels(levels, name="levels"):
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d array")
    if np.any(levels < 0) or np.any(np.diff(levels) <= 0):
        raise ValueError(f"{name} must be non-negative and strictly increasing")
    return levels


class RepresentationError(ValueError):
    """A field is not captured by the truncated eigen-expansion."""
