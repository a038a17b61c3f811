"""viscoflow: viscous stick-slip evolution, adjoints and optimal control on
a 1-D finite-element mesh."""

from .backend import BACKEND
from .fem1d import Mesh, build_mesh, norm_H, norm_V, norm_Vstar, poisson_solve
from .smoothing import SmoothingParam
from .state import ProblemConfig, TimeGrid, Trajectory

__all__ = [
    "BACKEND",
    "Mesh",
    "build_mesh",
    "norm_H",
    "norm_V",
    "norm_Vstar",
    "poisson_solve",
    "SmoothingParam",
    "ProblemConfig",
    "TimeGrid",
    "Trajectory",
]

__version__ = "0.1.0"
