"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
captured output) before asserting, so a failed criterion still reports its
measured numbers.
"""

import dataclasses
import time

import numpy as np
import pytest

from viscoflow import adjoint, kkt, optimizer, smoothing, state
from viscoflow.adjoint import CostConfig, control_to_loads, solve_adjoint
from viscoflow.backend import abs_deriv, abs_second, abs_value
from viscoflow.fem1d import build_mesh, norm_H, norm_V, norm_Vstar
from viscoflow.presets import preset_history
from viscoflow.smoothing import SmoothingParam
from viscoflow.state import ProblemConfig, TimeGrid

RHO_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4)


def report(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} — {detail}")
    return ok


def reference_cfg(rho=1e-2):
    return ProblemConfig(
        sigma=1.0, mesh=build_mesh(16), grid=TimeGrid(1.0, 16), rho=SmoothingParam(rho)
    )


@pytest.fixture(scope="module")
def big_sweep():
    """Fine-grid sweep shared by criteria 4 and 5: oracle plus six levels."""
    cfg = ProblemConfig(
        sigma=1.0, mesh=build_mesh(64), grid=TimeGrid(1.0, 256), rho=SmoothingParam(1e-2)
    )
    g = preset_history("sine", cfg.grid, cfg.mesh, 1.5)
    loads = control_to_loads(g, cfg)
    t0 = time.perf_counter()
    oracle = state.solve_nonsmooth(loads, cfg)
    solves = {
        rho: state.solve_regularized(loads, dataclasses.replace(cfg, rho=SmoothingParam(rho)))
        for rho in RHO_SCHEDULE
    }
    return cfg, oracle, solves, time.perf_counter() - t0


@pytest.fixture(scope="module")
def reference_continuation():
    """Continuation on the reference tracking instance (criteria 7 and 9)."""
    cfg = reference_cfg()
    z_d = preset_history("sine", cfg.grid, cfg.mesh)
    cost = CostConfig(z_d=z_d, z_T=z_d[-1])
    opts = optimizer.OptimizeOptions()
    t0 = time.perf_counter()
    path = optimizer.continuation(cost, cfg, opts)
    elapsed = time.perf_counter() - t0
    levels = []
    for rho, g, rep in path:
        c = dataclasses.replace(cfg, rho=SmoothingParam(rho))
        traj = state.solve_regularized(control_to_loads(g, c), c)
        adj = solve_adjoint(traj, cost, c)
        levels.append((c, g, rep, traj, adj))
    return cfg, cost, levels, elapsed


def test_criterion_1_smoothing_properties():
    """Pointwise inequalities of the smoothing family on 1e6 random pairs."""
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for rho in np.exp(rng.uniform(np.log(1e-6), 0.0, 100)):
        v = rng.uniform(-10.0, 10.0, 10_000)
        w = rng.uniform(-10.0, 10.0, 10_000)
        val = abs_value(v, rho)
        der = abs_deriv(v, rho)
        sec = abs_second(v, rho)
        checks = [
            np.abs(v) - val,                                    # |v| <= value
            val - np.abs(v) - rho,                              # value <= |v| + rho
            np.abs(der) - 1.0,                                  # derivative range
            -sec,                                               # curvature >= 0
            sec - 2.0 / rho,                                    # curvature <= 2/rho
            np.abs(v) - rho - der * v,                          # coercivity of deriv
            sec * v * v - 2.0 * rho,                            # curvature mass
            np.abs(abs_value(-v, rho) - val),                   # evenness
            np.abs(abs_deriv(-v, rho) + der),                   # odd derivative
            abs_value(v, rho * 0.5) - val,                      # monotone in rho
            np.abs(abs_value(v, rho * 0.5) - val) - 0.5 * rho,  # Lipschitz in rho
            abs_value(0.5 * (v + w), rho)
            - 0.5 * (val + abs_value(w, rho)),                  # midpoint convexity
            np.abs(sec - abs_second(w, rho))
            - (2.0 / rho**2) * np.abs(v - w),                   # curvature Lipschitz
            -(der - abs_deriv(w, rho)) * (v - w),               # monotone derivative
        ]
        worst = max(worst, max(float(np.max(c)) for c in checks))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 5.0
    assert report(1, ok, f"max violation {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_solver_lipschitz():
    """T_rho contracts loads with constant 1/sigma in the V/V* pairing."""
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    mesh = build_mesh(64)
    for sigma in (0.1, 1.0, 10.0):
        cfg = ProblemConfig(
            sigma=sigma, mesh=mesh, grid=TimeGrid(1.0, 1), rho=SmoothingParam(1e-2)
        )
        for _ in range(100):
            v1 = rng.standard_normal(mesh.n)
            v2 = rng.standard_normal(mesh.n)
            num = norm_V(state.t_rho_apply(v1, cfg) - state.t_rho_apply(v2, cfg), mesh)
            den = norm_Vstar(v1 - v2, mesh)
            worst = max(worst, num / den - 1.0 / sigma)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    assert report(2, ok, f"max excess over 1/sigma {worst:.2e}, {elapsed:.2f}s")


def test_criterion_3_gradient_check():
    """Reduced gradient vs central differences, ten random directions."""
    t0 = time.perf_counter()
    cfg = reference_cfg()
    z_d = preset_history("sine", cfg.grid, cfg.mesh)
    cost = CostConfig(z_d=z_d, z_T=z_d[-1])
    g = preset_history("sine", cfg.grid, cfg.mesh)
    grad = adjoint.reduced_gradient(g, cost, cfg)
    rng = np.random.default_rng(0)
    dirs = []
    for _ in range(10):
        h = rng.standard_normal(g.shape)
        h[0] = 0.0
        dirs.append(h / adjoint.control_h1_norm(h, cfg))
    best = np.inf
    for eps in (1e-3, 1e-4, 1e-5):
        worst = 0.0
        for h in dirs:
            jp = adjoint.reduced_objective(g + eps * h, cost, cfg)
            jm = adjoint.reduced_objective(g - eps * h, cost, cfg)
            exact = adjoint.control_h1_inner(grad, h, cfg)
            worst = max(worst, abs((jp - jm) / (2 * eps) - exact) / abs(exact))
        best = min(best, worst)
    elapsed = time.perf_counter() - t0
    ok = best <= 1e-6 and elapsed < 30.0
    assert report(3, ok, f"best relative FD error {best:.2e}, {elapsed:.2f}s")


def test_criterion_4_sqrt_rho_convergence(big_sweep):
    """Error to the non-smooth oracle: pointwise bound plus log-log slope."""
    cfg, oracle, solves, build_time = big_sweep
    tau = cfg.grid.tau
    errs = []
    bound_ok = True
    for rho in RHO_SCHEDULE:
        traj = solves[rho]
        err = np.sqrt(
            sum(
                tau * norm_V(traj.w[k] - oracle.w[k], cfg.mesh) ** 2
                for k in range(cfg.grid.n_t)
            )
        )
        errs.append(err)
        bound_ok &= err <= np.sqrt(4.0 * cfg.grid.T * rho / cfg.sigma) * 1.1
    slope = float(np.polyfit(np.log(RHO_SCHEDULE), np.log(errs), 1)[0])
    ok = bound_ok and 0.4 <= slope <= 0.6 and build_time < 180.0
    assert report(
        4,
        ok,
        f"bound {'ok' if bound_ok else 'violated'}, fitted slope {slope:.3f}, "
        f"{build_time:.1f}s",
    )


def test_criterion_5_initial_rate_bound(big_sweep):
    cfg, _, solves, _ = big_sweep
    tau = cfg.grid.tau
    worst = -np.inf
    for rho in RHO_SCHEDULE:
        w1 = norm_V(solves[rho].w[0], cfg.mesh)
        worst = max(worst, w1 - (rho / cfg.sigma + 5.0 * tau))
    ok = worst <= 0.0
    assert report(5, ok, f"max excess over rho/sigma + 5 tau: {worst:.2e}")


def test_criterion_6_space_regularity_bound():
    cfg = reference_cfg()
    g = preset_history("sine", cfg.grid, cfg.mesh)
    traj = state.solve_regularized(control_to_loads(g, cfg), cfg)
    mesh, tau = cfg.mesh, cfg.grid.tau
    lap = max(
        norm_H(-mesh.K_mul(traj.z[k]) / mesh.h, mesh)
        for k in range(1, cfg.grid.n_t + 1)
    )
    rhs = np.sqrt(
        sum(
            tau
            * norm_H(g[k] - smoothing.deriv_vec(traj.w[k - 1], cfg.rho), mesh) ** 2
            for k in range(1, cfg.grid.n_t + 1)
        )
    )
    bound = np.sqrt(1.0 / (2.0 * cfg.sigma)) * rhs * 1.05
    ok = lap <= bound
    assert report(6, ok, f"max |lap z|_H {lap:.4e} vs bound {bound:.4e}")


def test_criterion_7_adjoint_bounds(reference_continuation):
    cfg, cost, levels, _ = reference_continuation
    tau = cfg.grid.tau
    worst_u = -np.inf
    worst_sign = np.inf
    for c, _, _, traj, adj in levels:
        a, a_T = adjoint.tracking_loads(traj, cost, c)
        j1 = sum(tau * norm_Vstar(a[k], c.mesh) for k in range(c.grid.n_t))
        bound = np.exp(c.grid.T / c.sigma) * (j1 + norm_Vstar(a_T, c.mesh)) * 1.05
        umax = max(norm_Vstar(adj.u[k], c.mesh) for k in range(c.grid.n_t))
        worst_u = max(worst_u, umax - bound)
        for k in range(c.grid.n_t):
            xi = adj.xi[k]
            worst_sign = min(
                worst_sign, adj.u[k] @ xi - c.sigma * (xi @ c.mesh.K_mul(xi))
            )
    ok = worst_u <= 0.0 and worst_sign >= -1e-10
    assert report(
        7, ok, f"u-bound slack {-worst_u:.3e}, min sign identity {worst_sign:.3e}"
    )


def test_criterion_8_nonsmooth_oracle():
    cfg = reference_cfg()
    g = preset_history("sine", cfg.grid, cfg.mesh)
    loads = control_to_loads(g, cfg)
    oracle = state.solve_nonsmooth(loads, cfg)
    rep = state.residual_inclusion(oracle, loads, cfg)
    tiny = state.solve_regularized(
        loads, dataclasses.replace(cfg, rho=SmoothingParam(1e-8))
    )
    tau = cfg.grid.tau
    cross = np.sqrt(
        sum(
            tau * norm_V(tiny.w[k] - oracle.w[k], cfg.mesh) ** 2
            for k in range(cfg.grid.n_t)
        )
    )
    ok = rep.max_violation() <= 1e-8 and cross <= 1e-4
    assert report(
        8, ok, f"inclusion violation {rep.max_violation():.2e}, cross-check {cross:.2e}"
    )


def test_criterion_9_optimization_end_to_end(reference_continuation):
    cfg, cost, levels, elapsed = reference_continuation
    final_cfg, g_star, _, traj, adj = levels[-1]
    kreport = kkt.check_nonsmooth_kkt(traj, g_star, adj, cost, final_cfg)
    monotone = all(
        b <= a + 1e-14
        for _, _, rep, _, _ in levels
        for a, b in zip(rep.objective_history, rep.objective_history[1:])
    )
    r_comps = []
    tau = cfg.grid.tau
    for c, _, _, tr, ad in levels:
        r_comps.append(
            sum(
                tau * float(np.sum(np.abs(ad.q[k] * np.abs(tr.w[k]))))
                for k in range(c.grid.n_t)
            )
        )
    decreasing = all(b <= a for a, b in zip(r_comps, r_comps[1:]))
    proxy = kkt.comp_proxy_bound(traj, adj, final_cfg)
    ok = (
        kreport.r_gradient <= 1e-7
        and monotone
        and decreasing
        and r_comps[-1] <= 10.0 * proxy
        and elapsed < 300.0
    )
    assert report(
        9,
        ok,
        f"r_gradient {kreport.r_gradient:.2e}, monotone {monotone}, r_comp "
        f"decreasing {decreasing}, final {r_comps[-1]:.2e} vs 10x proxy "
        f"{10 * proxy:.2e}, {elapsed:.1f}s",
    )
