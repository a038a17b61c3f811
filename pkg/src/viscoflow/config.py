"""Experiment configuration: strict sectioned key = value files.

Unknown keys and range violations are all collected and reported together,
not one at a time.
"""

import configparser
from dataclasses import dataclass, field

from .fem1d import build_mesh
from .presets import PRESET_NAMES
from .smoothing import SmoothingParam
from .state import ProblemConfig, TimeGrid


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(self.problems))


_SCHEMA = {
    "problem": {
        "sigma": (float, lambda v: v > 0, "sigma must be positive"),
        "t": (float, lambda v: v > 0, "T must be positive"),
        "n_el": (int, lambda v: v >= 2, "n_el must be >= 2"),
        "n_t": (int, lambda v: v >= 1, "n_t must be >= 1"),
        "rho": (float, lambda v: v > 0, "rho must be positive"),
    },
    "cost": {
        "preset": (str, lambda v: v in PRESET_NAMES, f"preset must be one of {PRESET_NAMES}"),
        "alpha1": (float, lambda v: v >= 0, "alpha1 must be nonnegative"),
        "alpha2": (float, lambda v: v >= 0, "alpha2 must be nonnegative"),
    },
    "control": {
        "preset": (str, lambda v: v in PRESET_NAMES, f"preset must be one of {PRESET_NAMES}"),
        "scale": (float, lambda v: True, ""),
    },
    "solve": {
        "method": (
            str,
            lambda v: v in ("regularized", "nonsmooth"),
            "method must be 'regularized' or 'nonsmooth'",
        ),
    },
    "optimizer": {
        "max_outer": (int, lambda v: v >= 1, "max_outer must be >= 1"),
        "opt_tol": (float, lambda v: v > 0, "opt_tol must be positive"),
        "armijo_c": (float, lambda v: 0 < v < 1, "armijo_c must be in (0, 1)"),
        "shrink": (float, lambda v: 0 < v < 1, "shrink must be in (0, 1)"),
        "rho_levels": (int, lambda v: v >= 1, "rho_levels must be >= 1"),
        "rho_init": (float, lambda v: v > 0, "rho_init must be positive"),
        "delta": (float, lambda v: v > 0, "delta must be positive"),
    },
    "sweep": {
        "schedule": (str, lambda v: True, ""),
    },
    "gradcheck": {
        "epsilons": (str, lambda v: True, ""),
        "directions": (int, lambda v: v >= 1, "directions must be >= 1"),
        "seed": (int, lambda v: True, ""),
    },
}

_DEFAULTS = {
    ("problem", "sigma"): 1.0,
    ("problem", "t"): 1.0,
    ("problem", "n_el"): 16,
    ("problem", "n_t"): 16,
    ("problem", "rho"): 1e-2,
    ("cost", "preset"): "sine",
    ("cost", "alpha1"): 1.0,
    ("cost", "alpha2"): 1.0,
    ("control", "preset"): "sine",
    ("control", "scale"): 1.0,
    ("solve", "method"): "regularized",
    ("optimizer", "max_outer"): 500,
    ("optimizer", "opt_tol"): 1e-8,
    ("optimizer", "armijo_c"): 1e-4,
    ("optimizer", "shrink"): 0.5,
    ("optimizer", "rho_levels"): 10,
    ("optimizer", "rho_init"): 1e-1,
    ("optimizer", "delta"): None,
    ("sweep", "schedule"): "1e-1,3e-2,1e-2,3e-3,1e-3,3e-4",
    ("gradcheck", "epsilons"): "1e-3,1e-4,1e-5",
    ("gradcheck", "directions"): 5,
    ("gradcheck", "seed"): 0,
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def get(self, section, key):
        return self.values[(section, key.lower())]

    def items(self):
        return sorted(self.values.items())

    def problem(self):
        """Build the solver-level configuration from the parsed values."""
        mesh = build_mesh(self.get("problem", "n_el"))
        grid = TimeGrid(T=self.get("problem", "t"), n_t=self.get("problem", "n_t"))
        rho = SmoothingParam(self.get("problem", "rho"))
        return ProblemConfig(
            sigma=self.get("problem", "sigma"), mesh=mesh, grid=grid, rho=rho
        )

    def schedule(self):
        return [float(s) for s in self.get("sweep", "schedule").split(",") if s.strip()]

    def epsilons(self):
        return [float(s) for s in self.get("gradcheck", "epsilons").split(",") if s.strip()]


def parse_config(path):
    """Parse and validate a config file; raises ConfigError listing every
    violation found."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    except configparser.Error as exc:
        raise ConfigError([f"malformed config: {exc}"]) from exc

    problems = []
    values = dict(_DEFAULTS)
    for section in parser.sections():
        if section not in _SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                problems.append(f"unknown key '{key}' in section [{section}]")
                continue
            typ, check, msg = _SCHEMA[section][key]
            try:
                val = typ(raw)
            except ValueError:
                problems.append(
                    f"key '{key}' in [{section}]: cannot parse {raw!r} as {typ.__name__}"
                )
                continue
            if not check(val):
                problems.append(f"key '{key}' in [{section}]: {msg}")
                continue
            values[(section, key)] = val
    # list-valued keys get their entries validated too
    for section, key in (("sweep", "schedule"), ("gradcheck", "epsilons")):
        raw = values[(section, key)]
        try:
            entries = [float(s) for s in raw.split(",") if s.strip()]
        except ValueError:
            problems.append(f"key '{key}' in [{section}]: not a comma-separated float list")
            entries = []
        if any(e <= 0 for e in entries):
            problems.append(f"key '{key}' in [{section}]: entries must be positive")
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(values=values)
