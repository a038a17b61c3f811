"""Projected gradient descent with Armijo line search in the H1(I,H)
geometry, plus warm-started continuation over a decreasing smoothing
schedule."""

from dataclasses import dataclass, field, replace

import numpy as np

from .adjoint import (
    control_h1_inner,
    control_h1_norm,
    control_to_loads,
    reduced_gradient,
    reduced_objective,
)
from .smoothing import SmoothingParam
from .state import solve_regularized


class LineSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizeOptions:
    max_outer: int = 500
    opt_tol: float = 1e-8
    armijo_c: float = 1e-4
    shrink: float = 0.5
    prox_center: np.ndarray | None = None   # localization center g-bar
    delta: float | None = None              # trust radius around prox_center
    rho_schedule: tuple = tuple(1e-1 * 0.5 ** i for i in range(10))

    def __post_init__(self):
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must be in (0, 1)")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must be in (0, 1)")
        sched = tuple(self.rho_schedule)
        if any(r <= 0 for r in sched) or any(
            a <= b for a, b in zip(sched, sched[1:])
        ):
            raise ValueError("rho schedule must be strictly decreasing and positive")
        if self.prox_center is not None and (self.delta is None or self.delta <= 0):
            raise ValueError("delta must be positive when prox_center is set")


@dataclass
class OptimizeReport:
    objective_history: list = field(default_factory=list)
    gradient_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _objective(g, cost, cfg, opts):
    val = reduced_objective(g, cost, cfg)
    if opts.prox_center is not None:
        diff = g - opts.prox_center
        val += 0.5 * control_h1_inner(diff, diff, cfg)
    return val


def _project(g, cfg, opts):
    """Radial scaling onto the H1 ball of radius delta around prox_center."""
    if opts.delta is None or opts.prox_center is None:
        return g
    diff = g - opts.prox_center
    nrm = control_h1_norm(diff, cfg)
    if nrm <= opts.delta:
        return g
    return opts.prox_center + (opts.delta / nrm) * diff


def minimize_smoothed(rho, g0, cost, cfg, opts):
    """Descend on g -> J(S_rho(g), g) (plus prox term if configured)."""
    cfg = replace(cfg, rho=rho if isinstance(rho, SmoothingParam) else SmoothingParam(rho))
    g = np.array(g0, dtype=float)
    if np.any(g[0] != 0.0):
        raise ValueError("initial control must vanish at t = 0")
    report = OptimizeReport()
    obj = _objective(g, cost, cfg, opts)
    report.objective_history.append(obj)
    step = 1.0
    for _ in range(opts.max_outer):
        grad = reduced_gradient(g, cost, cfg)
        if opts.prox_center is not None:
            grad = grad + (g - opts.prox_center)
        gnorm = control_h1_norm(grad, cfg)
        report.gradient_history.append(gnorm)
        if gnorm <= opts.opt_tol:
            report.converged = True
            break
        accepted = False
        for _ in range(60):
            cand = _project(g - step * grad, cfg, opts)
            cand_obj = _objective(cand, cost, cfg, opts)
            move2 = control_h1_inner(cand - g, cand - g, cfg)
            if cand_obj <= obj - opts.armijo_c * move2 / step:
                accepted = True
                break
            step *= opts.shrink
        if not accepted:
            raise LineSearchError(
                f"no Armijo step after 60 reductions (|grad|={gnorm:.3e}, "
                f"step={step:.3e})"
            )
        g, obj = cand, cand_obj
        report.objective_history.append(obj)
        report.iterations += 1
        step /= opts.shrink   # tentative growth for the next iteration
    else:
        grad = reduced_gradient(g, cost, cfg)
        if opts.prox_center is not None:
            grad = grad + (g - opts.prox_center)
        gnorm = control_h1_norm(grad, cfg)
        report.gradient_history.append(gnorm)
        report.converged = gnorm <= opts.opt_tol
    return g, report


def continuation(cost, cfg, opts, g0=None):
    """Warm-started sweep along the rho schedule; returns the path."""
    if not opts.rho_schedule:
        raise ValueError("rho schedule must be nonempty")
    g = (
        np.zeros((cfg.grid.n_t + 1, cfg.mesh.n))
        if g0 is None
        else np.array(g0, dtype=float)
    )
    path = []
    for rho in opts.rho_schedule:
        g, report = minimize_smoothed(rho, g, cost, cfg, opts)
        path.append((rho, g, report))
    return path


def final_state(path, cfg):
    """Smoothed state trajectory of the last continuation entry."""
    rho, g, _ = path[-1]
    cfg = replace(cfg, rho=SmoothingParam(rho))
    return solve_regularized(control_to_loads(g, cfg), cfg), cfg
