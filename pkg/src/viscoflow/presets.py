"""Analytic space-time presets used for controls and tracking targets."""

import numpy as np

PRESET_NAMES = ("sine", "pulse", "zero")


def preset_history(name, grid, mesh, scale=1.0):
    """Nodal history (n_t+1, n) of a named preset, zero at t = 0."""
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}")
    t = grid.times[:, None]
    x = mesh.x[None, :]
    if name == "sine":
        field = t * np.sin(np.pi * x)
    elif name == "pulse":
        field = t * np.exp(-50.0 * (x - 0.5) ** 2)
    else:
        field = np.zeros((grid.n_t + 1, mesh.n))
    return scale * field
