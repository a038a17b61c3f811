"""Discrete adjoint of the implicit-Euler forward scheme.

The adjoint is the exact transpose of the linearized forward step, so the
reduced gradient agrees with finite differences of the discrete objective up
to FD truncation.  Controls live in the H1-in-time / L2-in-space geometry;
the time-Riesz map turns the L2 pairing with xi into that geometry.
"""

from dataclasses import dataclass

import numpy as np

from . import smoothing
from .backend import thomas_solve
from .state import solve_regularized


@dataclass(frozen=True)
class CostConfig:
    """Quadratic tracking cost: alpha1/2 ||z - z_d||^2_{L2(I,H)} +
    alpha2/2 ||z(T) - z_T||^2_H."""

    z_d: np.ndarray      # (n_t + 1, n) nodal tracking target
    z_T: np.ndarray      # (n,) terminal target
    alpha1: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self):
        if self.alpha1 < 0.0 or self.alpha2 < 0.0:
            raise ValueError("cost weights must be nonnegative")


@dataclass
class AdjointTriple:
    """Adjoint loads u_k, functions xi_k and loads q_k = u_k - sigma*K xi_k,
    each stored for k = 1..n_t at index k-1."""

    u: np.ndarray
    xi: np.ndarray
    q: np.ndarray


def control_to_loads(g, cfg):
    """Nodal control history (n_t+1, n) -> list of load vectors M g_k, k>=1."""
    return [cfg.mesh.M_mul(g[k]) for k in range(1, cfg.grid.n_t + 1)]


def tracking_loads(traj, cost, cfg):
    """Derivative loads of the tracking terms along the trajectory.

    Returns (a, a_T): a[k-1] = alpha1 * M (z_k - z_d,k) for k = 1..n_t and
    the terminal load a_T = alpha2 * M (z_T_state - z_T).
    """
    mesh, n_t = cfg.mesh, cfg.grid.n_t
    a = np.zeros((n_t, mesh.n))
    for k in range(1, n_t + 1):
        a[k - 1] = cost.alpha1 * mesh.M_mul(traj.z[k] - cost.z_d[k])
    a_T = cost.alpha2 * mesh.M_mul(traj.z[n_t] - cost.z_T)
    return a, a_T


def solve_adjoint(fwd, cost, cfg):
    """Backward sweep producing the exact discrete-adjoint triple (u, xi, q)."""
    mesh, grid = cfg.mesh, cfg.grid
    tau, n_t = grid.tau, grid.n_t
    if fwd.w.shape != (n_t, mesh.n):
        raise ValueError("forward trajectory does not carry rates on this grid")
    a, a_T = tracking_loads(fwd, cost, cfg)
    coef = cfg.sigma + tau
    u = np.zeros((n_t, mesh.n))
    xi = np.zeros((n_t, mesh.n))
    q = np.zeros((n_t, mesh.n))
    u[n_t - 1] = a_T + tau * a[n_t - 1]
    for k in range(n_t, 0, -1):
        i = k - 1
        d = coef * mesh.K_diag + mesh.h * smoothing.second_vec(fwd.w[i], cfg.rho)
        xi[i] = thomas_solve(coef * mesh.K_off, d, coef * mesh.K_off, u[i])
        q[i] = u[i] - cfg.sigma * mesh.K_mul(xi[i])
        if i > 0:
            u[i - 1] = u[i] + tau * (a[i - 1] - mesh.K_mul(xi[i]))
    return AdjointTriple(u=u, xi=xi, q=q)


def _time_gram_diagonals(cfg):
    """Tridiagonal H1(0,T) Gram for trajectories vanishing at t = 0,
    sampled at k = 1..n_t (natural condition at T)."""
    n_t, tau = cfg.grid.n_t, cfg.grid.tau
    d = np.full(n_t, tau + 2.0 / tau)
    d[-1] = tau + 1.0 / tau
    off = np.full(max(n_t - 1, 0), -1.0 / tau)
    return off, d


def riesz_time(xi, cfg):
    """Per-node H1(0,T) Riesz map: returns r with (r,h)_H1 = (xi,h)_L2
    for all discrete h with h(0) = 0."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[0] != cfg.grid.n_t:
        raise ValueError(f"expected {cfg.grid.n_t} time slices, got {xi.shape[0]}")
    off, d = _time_gram_diagonals(cfg)
    return thomas_solve(off, d, off, cfg.grid.tau * xi)


def control_h1_inner(a, b, cfg):
    """H1(I,H) inner product of nodal control histories (n_t+1, n)."""
    mesh, tau = cfg.mesh, cfg.grid.tau
    total = 0.0
    for k in range(1, cfg.grid.n_t + 1):
        total += tau * (a[k] @ mesh.M_mul(b[k]))
        da = a[k] - a[k - 1]
        db = b[k] - b[k - 1]
        total += (da @ mesh.M_mul(db)) / tau
    return float(total)


def control_h1_norm(a, cfg):
    return float(np.sqrt(max(control_h1_inner(a, a, cfg), 0.0)))


def tracking_value(traj, cost, cfg):
    """j1 + j2 evaluated on a trajectory."""
    mesh, grid = cfg.mesh, cfg.grid
    tau, n_t = grid.tau, grid.n_t
    j1 = 0.0
    for k in range(1, n_t + 1):
        e = traj.z[k] - cost.z_d[k]
        j1 += 0.5 * cost.alpha1 * tau * (e @ mesh.M_mul(e))
    eT = traj.z[n_t] - cost.z_T
    j2 = 0.5 * cost.alpha2 * (eT @ mesh.M_mul(eT))
    return float(j1 + j2)


def reduced_objective(g, cost, cfg, traj=None):
    """J(S_rho(g), g) for a nodal control history g (n_t+1, n), g[0] = 0."""
    if traj is None:
        traj = solve_regularized(control_to_loads(g, cfg), cfg)
    return tracking_value(traj, cost, cfg) + 0.5 * control_h1_inner(g, g, cfg)


def reduced_gradient(g, cost, cfg, fwd=None, adj=None):
    """H1(I,H)-Riesz representative of the derivative of the reduced cost.

    Returns a control-shaped array r with r[0] = 0 and
    (r, h)_H1 = (xi, h)_{L2(I,H)} + (g, h)_H1 for all h with h[0] = 0.
    """
    g = np.asarray(g, dtype=float)
    if np.any(g[0] != 0.0):
        raise ValueError("control must vanish at t = 0")
    if fwd is None:
        fwd = solve_regularized(control_to_loads(g, cfg), cfg)
    if adj is None:
        adj = solve_adjoint(fwd, cost, cfg)
    r = np.zeros_like(g)
    r[1:] = g[1:] + riesz_time(adj.xi, cfg)
    return r
