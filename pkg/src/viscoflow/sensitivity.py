"""Directional derivative of the smoothed forward map.

The linearized per-step system reuses the stored forward rates w_k: each step
is a single SPD tridiagonal solve with the frozen curvature coefficient
second(w_k), which is the exact derivative of the discrete scheme.
"""

from dataclasses import dataclass

import numpy as np

from . import smoothing
from .backend import thomas_solve


@dataclass
class SensitivityTrajectory:
    zeta: np.ndarray    # (n_t + 1, n), zeta[0] = 0
    omega: np.ndarray   # (n_t, n)


def solve_sensitivity(fwd, h_loads, cfg):
    """Solve the linearized system along ``fwd`` for direction loads h_k."""
    mesh, grid = cfg.mesh, cfg.grid
    tau, n_t = grid.tau, grid.n_t
    if fwd.w.shape != (n_t, mesh.n):
        raise ValueError("forward trajectory does not match the grid")
    if len(h_loads) != n_t:
        raise ValueError(f"expected {n_t} direction loads, got {len(h_loads)}")
    coef = cfg.sigma + tau
    zeta = np.zeros((n_t + 1, mesh.n))
    omega = np.zeros((n_t, mesh.n))
    for k in range(n_t):
        d = coef * mesh.K_diag + mesh.h * smoothing.second_vec(fwd.w[k], cfg.rho)
        rhs = h_loads[k] - mesh.K_mul(zeta[k])
        omega[k] = thomas_solve(coef * mesh.K_off, d, coef * mesh.K_off, rhs)
        zeta[k + 1] = zeta[k] + tau * omega[k]
    return SensitivityTrajectory(zeta=zeta, omega=omega)
