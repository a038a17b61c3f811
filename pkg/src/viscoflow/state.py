"""Forward solvers for the viscous stick-slip evolution.

Two routes for the same control-to-state map:

* the smoothed route: implicit Euler on dz/dt = T_rho(g + Lap z), with a
  damped-Newton solve of the strongly convex per-step problem;
* the genuinely non-smooth route: per-step minimization of a strongly convex
  energy with an L1 term, solved by ADMM with nodal shrinkage (mass lumping
  makes the shrinkage exact) followed by an active-set polish.

Both are deterministic: identical inputs give bit-identical trajectories.
"""

from dataclasses import dataclass, field

import numpy as np

from . import smoothing
from .backend import thomas_solve
from .fem1d import Mesh
from .smoothing import SmoothingParam

TOL_NEWTON = 1e-11
MAX_NEWTON = 50
TOL_ADMM = 1e-10
MAX_ADMM = 500_000
TOL_ACTIVE = 1e-8


class SolverError(RuntimeError):
    """Inner iteration failed to converge; carries the last residual."""

    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class TimeGrid:
    T: float
    n_t: int

    def __post_init__(self):
        if self.T <= 0.0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.n_t < 1:
            raise ValueError(f"n_t must be >= 1, got {self.n_t}")

    @property
    def tau(self):
        return self.T / self.n_t

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.n_t + 1)


@dataclass(frozen=True)
class ProblemConfig:
    sigma: float
    mesh: Mesh
    grid: TimeGrid
    rho: SmoothingParam

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass
class Trajectory:
    """Time-indexed nodal fields: states z (k=0..n_t) and rates w (k=1..n_t).

    z[k] = z[k-1] + tau * w[k-1-th entry]; the optional dual carries the
    nodal selection from the subdifferential of |.| for the non-smooth route.
    """

    z: np.ndarray          # (n_t + 1, n)
    w: np.ndarray          # (n_t, n)
    dual: np.ndarray | None = None   # (n_t, n)
    newton_iters: list = field(default_factory=list)


def _newton_solve(a_off, a_diag, lin, rhs, w0, cfg):
    """Minimize 0.5 w'Aw + h*sum(value(w)) + w'lin - w'rhs by damped Newton.

    A is the tridiagonal SPD matrix given by (a_off, a_diag); returns w with
    gradient inf-norm <= TOL_NEWTON.
    """
    mesh, rho = cfg.mesh, cfg.rho
    h = mesh.h

    def grad(w):
        out = a_diag * w
        out[:-1] += a_off * w[1:]
        out[1:] += a_off * w[:-1]
        return out + h * smoothing.deriv_vec(w, rho) + lin - rhs

    def energy(w):
        aw = a_diag * w
        aw[:-1] += a_off * w[1:]
        aw[1:] += a_off * w[:-1]
        return 0.5 * w @ aw + h * np.sum(smoothing.value_vec(w, rho)) + w @ (lin - rhs)

    w = w0.copy()
    g = grad(w)
    res = float(np.max(np.abs(g)))
    e = energy(w)
    for it in range(MAX_NEWTON):
        if res <= TOL_NEWTON:
            return w, it
        jd = a_diag + h * smoothing.second_vec(w, rho)
        step = thomas_solve(a_off, jd, a_off, g)
        # Armijo backtracking on the convex energy; the strict decrease
        # requirement keeps the iteration from cycling
        t = 1.0
        descent = g @ step
        accepted = False
        for _ in range(60):
            w_new = w - t * step
            e_new = energy(w_new)
            if e_new <= e - 1e-4 * t * descent and e_new < e:
                accepted = True
                break
            t *= 0.5
        if accepted:
            w, e = w_new, e_new
            g = grad(w)
            res = float(np.max(np.abs(g)))
            continue
        # energy differences are below rounding: finish with pure Newton
        # steps as long as they shrink the residual
        w_full = w - step
        g_full = grad(w_full)
        res_full = float(np.max(np.abs(g_full)))
        if res_full >= res:
            break
        w, g, res = w_full, g_full, res_full
        e = energy(w)
    if res <= TOL_NEWTON:
        return w, MAX_NEWTON
    raise SolverError("Newton iteration did not converge", res)


def t_rho_apply(v, cfg):
    """Solve sigma*K w + M_L deriv(w) = v for the load vector v."""
    mesh = cfg.mesh
    v = mesh._check(v)
    a_diag = cfg.sigma * mesh.K_diag
    a_off = cfg.sigma * mesh.K_off
    w, _ = _newton_solve(a_off, a_diag, np.zeros(mesh.n), v, np.zeros(mesh.n), cfg)
    return w


def step_regularized(z_prev, g_k, cfg, w_init=None):
    """One implicit-Euler step: solve for the rate w, return (z, w, iters)."""
    mesh, tau = cfg.mesh, cfg.grid.tau
    z_prev = mesh._check(z_prev)
    g_k = mesh._check(g_k)
    coef = cfg.sigma + tau
    a_diag = coef * mesh.K_diag
    a_off = coef * mesh.K_off
    lin = mesh.K_mul(z_prev)
    w0 = np.zeros(mesh.n) if w_init is None else w_init.copy()
    w, iters = _newton_solve(a_off, a_diag, lin, g_k, w0, cfg)
    return z_prev + tau * w, w, iters


def solve_regularized(g_loads, cfg):
    """Discrete smoothed solution operator: loads g_k (k=1..n_t) -> Trajectory."""
    mesh, n_t = cfg.mesh, cfg.grid.n_t
    if len(g_loads) != n_t:
        raise ValueError(f"expected {n_t} load vectors, got {len(g_loads)}")
    z = np.zeros((n_t + 1, mesh.n))
    w = np.zeros((n_t, mesh.n))
    iters = []
    w_prev = None
    for k in range(n_t):
        z[k + 1], w[k], it = step_regularized(z[k], g_loads[k], cfg, w_init=w_prev)
        w_prev = w[k]
        iters.append(it)
    return Trajectory(z=z, w=w, newton_iters=iters)


def _admm_step(a_off, a_diag, b, cfg, w_init=None):
    """Minimize 0.5 w'Aw + w'b + h*||w||_1 by ADMM with nodal shrinkage."""
    mesh = cfg.mesh
    n, h = mesh.n, mesh.h
    beta = cfg.sigma / h
    d_aug = a_diag + beta
    y = np.zeros(n) if w_init is None else w_init.copy()
    u = np.zeros(n)
    thresh = h / beta
    for it in range(MAX_ADMM):
        w = thomas_solve(a_off, d_aug, a_off, -b + beta * (y - u))
        y_old = y
        y = w + u
        y = np.sign(y) * np.maximum(np.abs(y) - thresh, 0.0)
        u = u + w - y
        r_prim = float(np.max(np.abs(w - y)))
        r_dual = float(beta * np.max(np.abs(y - y_old)))
        if max(r_prim, r_dual) <= TOL_ADMM:
            break
    else:
        raise SolverError("ADMM did not converge", max(r_prim, r_dual))
    return y, beta * u / h


def _polish(a_off, a_diag, b, y, cfg):
    """Active-set refinement: pin y==0 nodes, solve the rest exactly.

    Returns (w, f) satisfying the per-step stationarity to solver precision,
    or None if the polished point violates the dual constraints.
    """
    mesh = cfg.mesh
    n, h = mesh.n, mesh.h
    active = np.abs(y) > 0.0
    sgn = np.sign(y)
    # Tridiagonal system with identity rows at inactive (pinned) nodes.
    d = np.where(active, a_diag, 1.0)
    rhs = np.where(active, -b - h * sgn, 0.0)
    lo = a_off.copy()
    up = a_off.copy()
    if n > 1:
        lo[~active[1:]] = 0.0    # pinned row i: no coupling to i-1
        up[~active[:-1]] = 0.0   # pinned row i: no coupling to i+1
    w = thomas_solve(lo, d, up, rhs)
    w[~active] = 0.0
    if np.any(np.sign(w[active]) * sgn[active] < 0.0):
        return None
    aw = a_diag * w
    if n > 1:
        aw[:-1] += a_off * w[1:]
        aw[1:] += a_off * w[:-1]
    f = np.where(active, sgn, -(aw + b) / h)
    if np.max(np.abs(f)) > 1.0 + 1e-12:
        return None
    return w, f


def step_nonsmooth(z_prev, g_k, cfg, w_init=None):
    """One implicit-Euler step of the non-smooth inclusion.

    Returns (z, w, f) with f the nodal dual selection, f_i in [-1, 1] and
    f_i = sign(w_i) where w_i != 0.
    """
    mesh, tau = cfg.mesh, cfg.grid.tau
    z_prev = mesh._check(z_prev)
    g_k = mesh._check(g_k)
    coef = cfg.sigma + tau
    a_diag = coef * mesh.K_diag
    a_off = coef * mesh.K_off
    b = mesh.K_mul(z_prev) - g_k
    y, f = _admm_step(a_off, a_diag, b, cfg, w_init=w_init)
    polished = _polish(a_off, a_diag, b, y, cfg)
    if polished is not None:
        y, f = polished
    f = np.clip(f, -1.0, 1.0)
    return z_prev + tau * y, y, f


def solve_nonsmooth(g_loads, cfg):
    """Non-smooth oracle: loops step_nonsmooth; Trajectory carries the dual."""
    mesh, n_t = cfg.mesh, cfg.grid.n_t
    if len(g_loads) != n_t:
        raise ValueError(f"expected {n_t} load vectors, got {len(g_loads)}")
    z = np.zeros((n_t + 1, mesh.n))
    w = np.zeros((n_t, mesh.n))
    dual = np.zeros((n_t, mesh.n))
    w_prev = None
    for k in range(n_t):
        z[k + 1], w[k], dual[k] = step_nonsmooth(z[k], g_loads[k], cfg, w_init=w_prev)
        w_prev = w[k]
    return Trajectory(z=z, w=w, dual=dual)


@dataclass
class InclusionReport:
    """Worst-case violations of the per-step inclusion conditions."""

    dual_range: float        # max over steps of max(0, |f| - 1)
    sign_consistency: float  # max |f - sign(w)| where |w| > TOL_ACTIVE
    force_balance: float     # max inf-norm of sigma*K w + M_L f + K z - g

    def max_violation(self):
        return max(self.dual_range, self.sign_consistency, self.force_balance)


def residual_inclusion(traj, g_loads, cfg):
    """Verify the discrete inclusion for a trajectory with stored dual."""
    if traj.dual is None:
        raise ValueError("trajectory has no dual; run solve_nonsmooth")
    mesh = cfg.mesh
    tau = cfg.grid.tau
    r_range = 0.0
    r_sign = 0.0
    r_force = 0.0
    for k in range(cfg.grid.n_t):
        w, f, z = traj.w[k], traj.dual[k], traj.z[k + 1]
        r_range = max(r_range, float(np.max(np.abs(f)) - 1.0), 0.0)
        act = np.abs(w) > TOL_ACTIVE
        if np.any(act):
            r_sign = max(r_sign, float(np.max(np.abs(f[act] - np.sign(w[act])))))
        res = cfg.sigma * mesh.K_mul(w) + mesh.h * f + mesh.K_mul(z) - g_loads[k]
        r_force = max(r_force, float(np.max(np.abs(res))))
    return InclusionReport(r_range, r_sign, r_force)
