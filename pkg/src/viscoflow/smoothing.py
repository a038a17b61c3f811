"""C^2 smoothing of the absolute value.

The family is piecewise: exact |v| for |v| >= rho, and a cubic-in-|v| patch
inside, chosen so value, first and second derivative are continuous at the
junction.  The first derivative stays in [-1, 1], the second derivative in
[0, 2/rho], and |v| <= value <= |v| + rho for every v.
"""

import math
from dataclasses import dataclass

from . import backend


@dataclass(frozen=True)
class SmoothingParam:
    """Positive smoothing width rho."""

    rho: float

    def __post_init__(self):
        if not math.isfinite(self.rho) or self.rho <= 0.0:
            raise ValueError(f"rho must be positive and finite, got {self.rho}")


def _check_scalar(v):
    if not math.isfinite(v):
        raise ValueError(f"argument must be finite, got {v}")


def value(v, p):
    """Smoothed absolute value at v."""
    _check_scalar(v)
    if abs(v) >= p.rho:
        return abs(v)
    return p.rho / 3.0 + (v * v / (p.rho * p.rho)) * (p.rho - abs(v) / 3.0)


def deriv(v, p):
    """Derivative of the smoothed absolute value; lies in [-1, 1]."""
    _check_scalar(v)
    if abs(v) >= p.rho:
        return math.copysign(1.0, v) if v != 0.0 else 0.0
    s = 0.0 if v == 0.0 else math.copysign(1.0, v)
    return s * (2.0 * abs(v) / p.rho - v * v / (p.rho * p.rho))


def second(v, p):
    """Second derivative; lies in [0, 2/rho], zero outside [-rho, rho]."""
    _check_scalar(v)
    if abs(v) >= p.rho:
        return 0.0
    return 2.0 / p.rho - 2.0 * abs(v) / (p.rho * p.rho)


def value_vec(v, p):
    """Vectorized value over a nodal array."""
    return backend.abs_value(v, p.rho)


def deriv_vec(v, p):
    """Vectorized derivative over a nodal array."""
    return backend.abs_deriv(v, p.rho)


def second_vec(v, p):
    """Vectorized second derivative over a nodal array."""
    return backend.abs_second(v, p.rho)
