"""Timing comparison of the compiled kernels against the pure-Python fallback.

Run as ``python benchmarks/bench_kernels.py``.  Exercises the two hot paths:
tridiagonal solves and the pointwise smoothing evaluations, over a range of
problem sizes, and a full forward solve under each backend via subprocess.
"""

import subprocess
import sys
import time

import numpy as np

from viscoflow import _pykernels

try:
    from viscoflow import _ckernels
except ImportError:
    _ckernels = None

SIZES = (15, 63, 255, 1023)
REPS = 2000


def timeit(fn, *args, reps=REPS):
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / reps)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("c", _ckernels))
    print(f"{'kernel':<12}{'n':>6}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for n in SIZES:
        off = rng.uniform(-1.0, 0.0, n - 1)
        diag = 2.5 + rng.uniform(0.0, 1.0, n)
        b = rng.standard_normal(n)
        v = rng.uniform(-3.0, 3.0, n)
        rows = {
            "thomas": [timeit(mod.thomas_solve, off, diag, off, b) for _, mod in backends],
            "abs_value": [timeit(mod.abs_value, v, 1e-2) for _, mod in backends],
            "abs_deriv": [timeit(mod.abs_deriv, v, 1e-2) for _, mod in backends],
            "abs_second": [timeit(mod.abs_second, v, 1e-2) for _, mod in backends],
        }
        for kernel, times in rows.items():
            cells = "".join(f"{t * 1e6:>12.2f}us" for t in times)
            speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) == 2 else f"{'-':>10}"
            print(f"{kernel:<12}{n:>6}{cells}{speed}")


FORWARD_SNIPPET = """
import time
import numpy as np
from viscoflow import backend, build_mesh, SmoothingParam, TimeGrid, ProblemConfig
from viscoflow import adjoint, state
from viscoflow.presets import preset_history

cfg = ProblemConfig(sigma=1.0, mesh=build_mesh(64), grid=TimeGrid(1.0, 256),
                    rho=SmoothingParam(1e-2))
g = preset_history("sine", cfg.grid, cfg.mesh, 1.5)
loads = adjoint.control_to_loads(g, cfg)
state.solve_regularized(loads, cfg)  # warm up
t0 = time.perf_counter()
for _ in range(5):
    state.solve_regularized(loads, cfg)
print(f"{backend.BACKEND}: {(time.perf_counter() - t0) / 5:.4f} s per forward solve")
"""


def bench_forward():
    print("\nforward solve (n_el=64, n_t=256):")
    for env_backend in ("python", None):
        import os

        env = dict(os.environ)
        if env_backend:
            env["VISCOFLOW_BACKEND"] = env_backend
        else:
            env.pop("VISCOFLOW_BACKEND", None)
        subprocess.run([sys.executable, "-c", FORWARD_SNIPPET], env=env, check=True)


if __name__ == "__main__":
    bench_kernels()
    bench_forward()
