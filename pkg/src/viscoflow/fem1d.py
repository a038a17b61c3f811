"""P1 finite elements on (0, 1) with homogeneous Dirichlet conditions.

Interior nodal vectors represent either functions (V-elements) or load
vectors (V*-elements); the duality pairing is the plain dot product.  The
stiffness matrix realizes the V inner product, the consistent mass matrix the
L2 product, and the V* norm is sqrt(f^T K^{-1} f).
"""

import numpy as np

from .backend import thomas_solve


class MeshError(ValueError):
    pass


class Mesh:
    """Uniform 1-D mesh with assembled stiffness and mass matrices.

    Matrices are stored as (sub, diag, super) diagonals; the lumped mass is
    h * identity.  Immutable after construction.
    """

    def __init__(self, n_el):
        if n_el < 2:
            raise MeshError(f"n_el must be >= 2 (need an interior node), got {n_el}")
        self.n_el = int(n_el)
        self.h = 1.0 / n_el
        self.n = n_el - 1
        n, h = self.n, self.h
        self.K_diag = np.full(n, 2.0 / h)
        self.K_off = np.full(max(n - 1, 0), -1.0 / h)
        self.M_diag = np.full(n, 4.0 * h / 6.0)
        self.M_off = np.full(max(n - 1, 0), h / 6.0)
        self.ML_diag = np.full(n, h)
        self.x = (np.arange(1, n + 1)) * h

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise MeshError(f"expected vector of length {self.n}, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise MeshError("vector has non-finite entries")
        return u

    def K_mul(self, u):
        u = self._check(u)
        out = self.K_diag * u
        out[:-1] += self.K_off * u[1:]
        out[1:] += self.K_off * u[:-1]
        return out

    def M_mul(self, u):
        u = self._check(u)
        out = self.M_diag * u
        out[:-1] += self.M_off * u[1:]
        out[1:] += self.M_off * u[:-1]
        return out

    def K_solve(self, f):
        f = np.asarray(f, dtype=float)
        return thomas_solve(self.K_off, self.K_diag, self.K_off, f)


def build_mesh(n_el):
    return Mesh(n_el)


def norm_V(u, m):
    u = m._check(u)
    return float(np.sqrt(max(u @ m.K_mul(u), 0.0)))


def norm_H(u, m):
    u = m._check(u)
    return float(np.sqrt(max(u @ m.M_mul(u), 0.0)))


def norm_Vstar(f, m):
    f = m._check(f)
    return float(np.sqrt(max(f @ m.K_solve(f), 0.0)))


def poisson_solve(f, m):
    """Return u with K u = f (discrete -Laplace(u) = f)."""
    f = m._check(f)
    return m.K_solve(f)
