"""Pure-numpy implementations of the hot kernels.

Fallback backend used when the compiled extension is unavailable (or when
``VISCOFLOW_BACKEND=python`` is set).  Semantics must match
``viscoflow._ckernels`` bit-for-bit on well-posed inputs; the parity tests in
``tests/test_backend.py`` enforce agreement to machine precision.
"""

import numpy as np
from scipy.linalg import solve_banded

BACKEND_NAME = "python"


def thomas_solve(dl, d, du, rhs):
    """Solve a tridiagonal system T x = rhs.

    dl, du have length n-1 (sub/super diagonal), d has length n.  rhs may be
    (n,) or (n, m); the same matrix is applied to every column.
    """
    n = d.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = du
    ab[1, :] = d
    ab[2, :-1] = dl
    return solve_banded((1, 1), ab, rhs)


def abs_value(v, rho):
    """Smoothed absolute value, exact outside [-rho, rho]."""
    arr = np.asarray(v, dtype=float)
    a = np.abs(arr)
    inner = rho / 3.0 + (arr * arr / (rho * rho)) * (rho - a / 3.0)
    out = np.where(a >= rho, a, inner)
    return float(out) if out.ndim == 0 else out


def abs_deriv(v, rho):
    """First derivative of the smoothed absolute value."""
    arr = np.asarray(v, dtype=float)
    a = np.abs(arr)
    s = np.sign(arr)
    inner = s * (2.0 * a / rho - (arr * arr) / (rho * rho))
    out = np.where(a >= rho, s, inner)
    return float(out) if out.ndim == 0 else out


def abs_second(v, rho):
    """Second derivative of the smoothed absolute value."""
    arr = np.asarray(v, dtype=float)
    a = np.abs(arr)
    inner = 2.0 / rho - 2.0 * a / (rho * rho)
    out = np.where(a >= rho, 0.0, inner)
    return float(out) if out.ndim == 0 else out
