"""Quantitative checks of the non-smooth optimality system.

Evaluates, on computed solutions, the integrated adjoint identity, the weak
gradient identity, the complementarity pairing against nodal hat functions,
the two sign conditions, and the pointwise stick/slip regime classification.
"""

from dataclasses import dataclass

import numpy as np

from . import smoothing
from .adjoint import control_h1_norm, riesz_time, tracking_loads
from .fem1d import norm_Vstar
from .state import TOL_ACTIVE, residual_inclusion

STICK_INTERIOR = 0
STICK_BOUNDARY_PLUS = 1
STICK_BOUNDARY_MINUS = 2
SLIP_PLUS = 3
SLIP_MINUS = 4
UNCLASSIFIED = 5

REGIME_NAMES = {
    STICK_INTERIOR: "stick_interior",
    STICK_BOUNDARY_PLUS: "stick_boundary_plus",
    STICK_BOUNDARY_MINUS: "stick_boundary_minus",
    SLIP_PLUS: "slip_plus",
    SLIP_MINUS: "slip_minus",
    UNCLASSIFIED: "unclassified",
}


@dataclass
class RegimeTable:
    labels: np.ndarray          # (n_t, n) integer labels
    counts: dict                # regime name -> count
    max_abs_dual: float         # max |d| over all (k, i)
    eps: float

    @property
    def total(self):
        return int(self.labels.size)

    @property
    def unclassified_fraction(self):
        if self.total == 0:
            return 0.0
        return self.counts["unclassified"] / self.total


@dataclass
class KktReport:
    r_state: float
    r_adjoint: float
    r_gradient: float
    r_comp: float
    sign_u_xi: float
    sign_q_xi: float
    regime_table: RegimeTable

    def as_dict(self):
        d = {
            "r_state": self.r_state,
            "r_adjoint": self.r_adjoint,
            "r_gradient": self.r_gradient,
            "r_comp": self.r_comp,
            "sign_u_xi": self.sign_u_xi,
            "sign_q_xi": self.sign_q_xi,
            "unclassified_fraction": self.regime_table.unclassified_fraction,
        }
        for name, cnt in self.regime_table.counts.items():
            d[f"count_{name}"] = cnt
        return d


def nodal_laplacian(v, cfg):
    """Lumped discrete Laplacian as a nodal H-function: -M_L^{-1} K v."""
    return -cfg.mesh.K_mul(v) / cfg.mesh.h


def classify_regimes(traj, g, cfg, eps=0.05):
    """Label every (step, node) pair by its stick/slip regime.

    The dual argument is d = g + Lap z + sigma * Lap w evaluated nodally.
    Pairs with |d| > 1 + eps land in the 'unclassified' bucket.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must be in (0, 1/2)")
    n_t, n = cfg.grid.n_t, cfg.mesh.n
    labels = np.empty((n_t, n), dtype=int)
    max_d = 0.0
    for k in range(n_t):
        d = g[k + 1] + nodal_laplacian(traj.z[k + 1], cfg) + cfg.sigma * nodal_laplacian(
            traj.w[k], cfg
        )
        max_d = max(max_d, float(np.max(np.abs(d))))
        w = traj.w[k]
        lab = np.full(n, STICK_INTERIOR)
        lab[(np.abs(w) <= TOL_ACTIVE) & (d >= 1.0 - eps) & (np.abs(d) <= 1.0 + eps)] = (
            STICK_BOUNDARY_PLUS
        )
        lab[(np.abs(w) <= TOL_ACTIVE) & (d <= -(1.0 - eps)) & (np.abs(d) <= 1.0 + eps)] = (
            STICK_BOUNDARY_MINUS
        )
        lab[(np.abs(w) <= TOL_ACTIVE) & (np.abs(d) > 1.0 + eps)] = UNCLASSIFIED
        lab[w > TOL_ACTIVE] = SLIP_PLUS
        lab[w < -TOL_ACTIVE] = SLIP_MINUS
        labels[k] = lab
    counts = {name: int(np.sum(labels == code)) for code, name in REGIME_NAMES.items()}
    return RegimeTable(labels=labels, counts=counts, max_abs_dual=max_d, eps=eps)


def check_nonsmooth_kkt(traj, g, adj, cost, cfg, g_loads=None):
    """Evaluate all residuals of the optimality system on computed data.

    ``g`` is the nodal control history (n_t+1, n).  ``adj`` comes from
    solve_adjoint at small rho; ``traj`` from the matching forward solve (or
    from the non-smooth oracle, in which case it carries a dual).
    """
    mesh, grid = cfg.mesh, cfg.grid
    tau, n_t = grid.tau, grid.n_t

    if g_loads is None:
        g_loads = [mesh.M_mul(g[k]) for k in range(1, n_t + 1)]
    if traj.dual is not None:
        r_state = residual_inclusion(traj, g_loads, cfg).max_violation()
    else:
        # smoothed route: the smoothing derivative is the dual candidate
        r_state = 0.0
        for k in range(n_t):
            f = smoothing.deriv_vec(traj.w[k], cfg.rho)
            res = (
                cfg.sigma * mesh.K_mul(traj.w[k])
                + mesh.h * f
                + mesh.K_mul(traj.z[k + 1])
                - g_loads[k]
            )
            r_state = max(r_state, float(np.max(np.abs(res))))

    # integrated adjoint identity, marched top-down and compared in V*
    a, a_T = tracking_loads(traj, cost, cfg)
    acc = a_T + tau * a[n_t - 1]
    r_adjoint = norm_Vstar(adj.u[n_t - 1] - acc, mesh)
    for k in range(n_t - 1, 0, -1):
        acc = acc + tau * (a[k - 1] - mesh.K_mul(adj.xi[k]))
        r_adjoint = max(r_adjoint, norm_Vstar(adj.u[k - 1] - acc, mesh))

    # weak gradient identity in the control geometry
    r_ctrl = np.zeros_like(np.asarray(g, dtype=float))
    r_ctrl[1:] = g[1:] + riesz_time(adj.xi, cfg)
    r_gradient = control_h1_norm(r_ctrl, cfg)

    # complementarity pairing against hat functions and the sign conditions
    r_comp = 0.0
    sign_u_xi = 0.0
    sign_q_xi = 0.0
    for k in range(n_t):
        r_comp += tau * float(np.sum(np.abs(adj.q[k] * np.abs(traj.w[k]))))
        uxi = float(adj.u[k] @ adj.xi[k])
        xikxi = float(adj.xi[k] @ mesh.K_mul(adj.xi[k]))
        sign_u_xi = max(sign_u_xi, cfg.sigma * xikxi - uxi)
        sign_q_xi = max(sign_q_xi, -float(adj.q[k] @ adj.xi[k]))

    regimes = classify_regimes(traj, g, cfg)
    return KktReport(
        r_state=r_state,
        r_adjoint=r_adjoint,
        r_gradient=r_gradient,
        r_comp=r_comp,
        sign_u_xi=max(sign_u_xi, 0.0),
        sign_q_xi=max(sign_q_xi, 0.0),
        regime_table=regimes,
    )


def comp_proxy_bound(traj, adj, cfg):
    """Bound for the complementarity pairing implied by the smoothing:
    sqrt(2 rho) * T * max_k ||sqrt(second(w_k)) xi_k||_{L1} plus the
    time-discretization contribution of the q load."""
    mesh, grid = cfg.mesh, cfg.grid
    tau, rho = grid.tau, cfg.rho.rho
    main = 0.0
    tau_term = 0.0
    for k in range(grid.n_t):
        sec = smoothing.second_vec(traj.w[k], cfg.rho)
        main = max(main, float(np.sum(mesh.h * np.sqrt(sec) * np.abs(adj.xi[k]))))
        tau_term += tau * tau * float(
            np.sum(np.abs(mesh.K_mul(adj.xi[k]) * traj.w[k]))
        )
    return np.sqrt(2.0 * rho) * grid.T * main + tau_term


def check_cone_c(traj, adj, regimes):
    """Relative L2(I,H)-mass of xi on the strict-stick set (0 by convention
    when the set or xi vanishes)."""
    stick = regimes.labels == STICK_INTERIOR
    total = float(np.sum(adj.xi**2))
    if total == 0.0 or not np.any(stick):
        return 0.0
    return float(np.sqrt(np.sum(adj.xi[stick] ** 2) / total))
