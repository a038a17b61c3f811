"""Command-line experiment drivers.

``viscoflow <command> --config <path> [--assert] [--out <dir>]`` with the
commands solve, grad-check, rho-sweep, optimize and check-kkt.  Every run
writes deterministic CSV files (header row plus a trailing ``# key=value``
metadata block echoing the config) and one JSON summary.

Exit codes: 0 success, 2 solver error, 3 threshold failure under --assert,
4 IO failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import adjoint as adj_mod
from . import kkt as kkt_mod
from . import optimizer as opt_mod
from . import state
from .config import ConfigError, parse_config
from .fem1d import norm_V
from .presets import preset_history
from .smoothing import SmoothingParam

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_ASSERT = 3
EXIT_IO = 4


def _metadata_lines(econf):
    return [f"# {section}.{key}={value}" for (section, key), value in econf.items()]


def _write_csv(path, header, rows, econf):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    lines.extend(_metadata_lines(econf))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_json(path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _control(econf, cfg):
    return preset_history(
        econf.get("control", "preset"), cfg.grid, cfg.mesh, econf.get("control", "scale")
    )


def _cost(econf, cfg):
    z_d = preset_history(econf.get("cost", "preset"), cfg.grid, cfg.mesh)
    return adj_mod.CostConfig(
        z_d=z_d,
        z_T=z_d[-1],
        alpha1=econf.get("cost", "alpha1"),
        alpha2=econf.get("cost", "alpha2"),
    )


def cmd_solve(econf, out, do_assert):
    cfg = econf.problem()
    g = _control(econf, cfg)
    loads = adj_mod.control_to_loads(g, cfg)
    method = econf.get("solve", "method")
    if method == "nonsmooth":
        traj = state.solve_nonsmooth(loads, cfg)
    else:
        traj = state.solve_regularized(loads, cfg)
    header = ["k", "t", "node", "x", "z", "w"]
    if traj.dual is not None:
        header.append("dual")
    rows = []
    times = cfg.grid.times
    for k in range(1, cfg.grid.n_t + 1):
        for i in range(cfg.mesh.n):
            row = [k, times[k], i, cfg.mesh.x[i], traj.z[k][i], traj.w[k - 1][i]]
            if traj.dual is not None:
                row.append(traj.dual[k - 1][i])
            rows.append(row)
    _write_csv(out / "solve.csv", header, rows, econf)
    summary = {"method": method, "max_abs_z": float(np.max(np.abs(traj.z)))}
    if traj.dual is not None:
        rep = state.residual_inclusion(traj, loads, cfg)
        summary["inclusion_violation"] = rep.max_violation()
        if do_assert and rep.max_violation() > 1e-8:
            _write_json(out / "summary.json", summary)
            return EXIT_ASSERT
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_rho_sweep(econf, out, do_assert):
    from dataclasses import replace

    cfg = econf.problem()
    g = _control(econf, cfg)
    loads = adj_mod.control_to_loads(g, cfg)
    oracle = state.solve_nonsmooth(loads, cfg)
    tau = cfg.grid.tau
    rows = []
    errs = []
    schedule = econf.schedule()
    for rho in schedule:
        c = replace(cfg, rho=SmoothingParam(rho))
        traj = state.solve_regularized(loads, c)
        err2 = sum(
            tau * norm_V(traj.w[k] - oracle.w[k], cfg.mesh) ** 2
            for k in range(cfg.grid.n_t)
        )
        err_l2iv = float(np.sqrt(err2))
        err_civ = max(
            norm_V(traj.z[k] - oracle.z[k], cfg.mesh) for k in range(cfg.grid.n_t + 1)
        )
        bound = float(np.sqrt(4.0 * cfg.grid.T * rho / cfg.sigma))
        errs.append((rho, err_l2iv, err_civ, bound))
    for idx, (rho, err_l2iv, err_civ, bound) in enumerate(errs):
        if idx == 0:
            slope = float("nan")
        else:
            r0, e0 = errs[idx - 1][0], errs[idx - 1][1]
            slope = float(np.log(e0 / err_l2iv) / np.log(r0 / rho))
        rows.append([rho, err_l2iv, err_civ, bound, slope])
    _write_csv(out / "rho_sweep.csv", ["rho", "err_L2IV", "err_CIV", "bound_sqrt", "slope_local"], rows, econf)
    ok = all(e <= b * 1.1 for _, e, _, b in errs)
    fit = np.polyfit(np.log([r for r, *_ in errs]), np.log([e for _, e, *_ in errs]), 1)
    summary = {
        "bound_satisfied": bool(ok),
        "fitted_slope": float(fit[0]),
        "schedule": schedule,
    }
    _write_json(out / "summary.json", summary)
    if do_assert and not ok:
        return EXIT_ASSERT
    return EXIT_OK


def cmd_grad_check(econf, out, do_assert):
    cfg = econf.problem()
    cost = _cost(econf, cfg)
    g = _control(econf, cfg)
    grad = adj_mod.reduced_gradient(g, cost, cfg)
    rng = np.random.default_rng(econf.get("gradcheck", "seed"))
    dirs = []
    for _ in range(econf.get("gradcheck", "directions")):
        h = rng.standard_normal(g.shape)
        h[0] = 0.0
        dirs.append(h / adj_mod.control_h1_norm(h, cfg))
    rows = []
    best = float("inf")
    for eps in econf.epsilons():
        worst = 0.0
        for h in dirs:
            jp = adj_mod.reduced_objective(g + eps * h, cost, cfg)
            jm = adj_mod.reduced_objective(g - eps * h, cost, cfg)
            fd = (jp - jm) / (2.0 * eps)
            exact = adj_mod.control_h1_inner(grad, h, cfg)
            rel = abs(fd - exact) / max(abs(exact), 1e-300)
            worst = max(worst, rel)
        rows.append([eps, worst])
        best = min(best, worst)
    _write_csv(out / "grad_check.csv", ["epsilon", "rel_error"], rows, econf)
    _write_json(out / "summary.json", {"min_rel_error": best})
    if do_assert and best > 1e-6:
        return EXIT_ASSERT
    return EXIT_OK


def cmd_optimize(econf, out, do_assert):
    cfg = econf.problem()
    cost = _cost(econf, cfg)
    levels = econf.get("optimizer", "rho_levels")
    rho0 = econf.get("optimizer", "rho_init")
    opts = opt_mod.OptimizeOptions(
        max_outer=econf.get("optimizer", "max_outer"),
        opt_tol=econf.get("optimizer", "opt_tol"),
        armijo_c=econf.get("optimizer", "armijo_c"),
        shrink=econf.get("optimizer", "shrink"),
        rho_schedule=tuple(rho0 * 0.5**i for i in range(levels)),
    )
    path = opt_mod.continuation(cost, cfg, opts)
    rows = [
        [rho, rep.iterations, rep.objective_history[-1], rep.gradient_history[-1]]
        for rho, _, rep in path
    ]
    _write_csv(out / "optimize.csv", ["rho", "iterations", "objective", "grad_norm"], rows, econf)
    traj, final_cfg = opt_mod.final_state(path, cfg)
    g_star = path[-1][1]
    adj = adj_mod.solve_adjoint(traj, cost, final_cfg)
    report = kkt_mod.check_nonsmooth_kkt(traj, g_star, adj, cost, final_cfg)
    ctrl_rows = []
    for k in range(cfg.grid.n_t + 1):
        for i in range(cfg.mesh.n):
            ctrl_rows.append([k, cfg.grid.times[k], i, cfg.mesh.x[i], g_star[k][i]])
    _write_csv(out / "control.csv", ["k", "t", "node", "x", "g"], ctrl_rows, econf)
    summary = {
        "final_rho": path[-1][0],
        "converged": bool(path[-1][2].converged),
        "objective": path[-1][2].objective_history[-1],
        "kkt": report.as_dict(),
    }
    _write_json(out / "summary.json", summary)
    if do_assert and not (path[-1][2].converged and report.r_gradient <= 1e-7):
        return EXIT_ASSERT
    return EXIT_OK


def cmd_check_kkt(econf, out, do_assert):
    cfg = econf.problem()
    cost = _cost(econf, cfg)
    g = _control(econf, cfg)
    loads = adj_mod.control_to_loads(g, cfg)
    traj = state.solve_regularized(loads, cfg)
    adj = adj_mod.solve_adjoint(traj, cost, cfg)
    report = kkt_mod.check_nonsmooth_kkt(traj, g, adj, cost, cfg, g_loads=loads)
    rows = [[key, value] for key, value in sorted(report.as_dict().items())]
    _write_csv(out / "kkt.csv", ["field", "value"], rows, econf)
    _write_json(out / "summary.json", report.as_dict())
    if do_assert and report.sign_u_xi > 1e-8:
        return EXIT_ASSERT
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "grad-check": cmd_grad_check,
    "rho-sweep": cmd_rho_sweep,
    "optimize": cmd_optimize,
    "check-kkt": cmd_check_kkt,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="viscoflow")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--assert", dest="do_assert", action="store_true")
    parser.add_argument("--out", default=".")
    args = parser.parse_args(argv)
    try:
        econf = parse_config(args.config)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_IO if "cannot read" in exc.problems[0] else 1
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return _COMMANDS[args.command](econf, out, args.do_assert)
    except state.SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except opt_mod.LineSearchError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
