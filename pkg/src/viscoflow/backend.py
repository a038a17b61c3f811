"""Backend selection for the hot kernels.

The compiled extension is preferred; the pure-numpy fallback is used when it
is missing or when ``VISCOFLOW_BACKEND=python`` is set in the environment.
Both expose ``thomas_solve``, ``abs_value``, ``abs_deriv``, ``abs_second``.
"""

import os

from . import _pykernels

if os.environ.get("VISCOFLOW_BACKEND", "").lower() == "python":
    kernels = _pykernels
else:
    try:
        from . import _ckernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _pykernels

BACKEND = kernels.BACKEND_NAME

thomas_solve = kernels.thomas_solve
abs_value = kernels.abs_value
abs_deriv = kernels.abs_deriv
abs_second = kernels.abs_second
