"""Shared finite-difference and fitting helpers for the cylinder grid.

Grid fields are arrays of shape ``(n_t, n_theta)``: ``t`` varies along axis 0
(Dirichlet ends), ``theta`` along axis 1 (periodic).  Unknowns of the sparse
operators live on the interior rows ``1 .. n_t - 2`` in row-major order.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class ConvergenceError(RuntimeError):
    """A nonlinear or eigenvalue iteration failed to converge."""


def second_difference(n: int, h: float, periodic: bool) -> sp.csr_matrix:
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    m = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
    if periodic:
        m[0, n - 1] = 1.0
        m[n - 1, 0] = 1.0
    return (m / (h * h)).tocsr()


def centered_difference(n: int, h: float, periodic: bool) -> sp.csr_matrix:
    off = np.ones(n - 1)
    m = sp.diags([-off, off], [-1, 1], shape=(n, n), format="lil")
    if periodic:
        m[0, n - 1] = -1.0
        m[n - 1, 0] = 1.0
    return (m / (2.0 * h)).tocsr()


def _full_grid_ops(n_t: int, n_theta: int, h_t: float, h_theta: float):
    # t-direction operator on all rows; rows 0 and n_t-1 are sliced away later
    dtt = second_difference(n_t, h_t, False)
    dthth = second_difference(n_theta, h_theta, True)
    return sp.kron(dtt, sp.identity(n_theta)), sp.kron(sp.identity(n_t), dthth)


class DirichletOperator:
    """Full-grid stencil split into interior and Dirichlet-row parts."""

    def __init__(self, full: sp.spmatrix, n_t: int, n_theta: int):
        self.n_t, self.n_theta = n_t, n_theta
        full = full.tocsr()
        idx = np.arange(n_t * n_theta).reshape(n_t, n_theta)
        rows = idx[1:-1].ravel()
        bcols = np.concatenate([idx[0], idx[-1]])
        self.interior = full[rows][:, rows].tocsc()
        self._boundary = full[rows][:, bcols].tocsr()

    def boundary_part(self, field: np.ndarray) -> np.ndarray:
        """Contribution of the first and last rows of ``field`` to interior rows."""
        return self._boundary @ np.concatenate([field[0], field[-1]])

    def apply(self, field: np.ndarray) -> np.ndarray:
        """Apply to a full-grid field; returns the interior rows."""
        out = self.interior @ field[1:-1].ravel() + self.boundary_part(field)
        return out.reshape(self.n_t - 2, self.n_theta)


def laplacian_2d(n_t: int, n_theta: int, h_t: float, h_theta: float) -> DirichletOperator:
    """Five-point Laplacian."""
    dtt, dthth = _full_grid_ops(n_t, n_theta, h_t, h_theta)
    return DirichletOperator(dtt + dthth, n_t, n_theta)


def compact_laplacian_2d(n_t: int, n_theta: int, h_t: float, h_theta: float):
    """Fourth-order compact (nine-point) discretization of ``Lap u = g``.

    Returns ``(L, B)`` such that ``L u = B g`` is fourth-order accurate:
    ``L = Dtt + Dthth + (h_t^2 + h_theta^2)/12 Dtt Dthth`` and
    ``B = I + h_t^2/12 Dtt + h_theta^2/12 Dthth``.
    """
    dtt, dthth = _full_grid_ops(n_t, n_theta, h_t, h_theta)
    lap = dtt + dthth + ((h_t**2 + h_theta**2) / 12.0) * (dtt @ dthth)
    smooth = sp.identity(n_t * n_theta) + (h_t**2 / 12.0) * dtt + (h_theta**2 / 12.0) * dthth
    return DirichletOperator(lap, n_t, n_theta), DirichletOperator(smooth, n_t, n_theta)


def interior_derivatives(n_t: int, n_theta: int, h_t: float, h_theta: float):
    """Centered ``d/dt`` and ``d/dtheta`` on interior unknowns (zero Dirichlet data).

    Both are real antisymmetric matrices, so ``D^T = -D`` exactly.
    """
    m = n_t - 2
    d_t = sp.kron(centered_difference(m, h_t, False), sp.identity(n_theta))
    d_th = sp.kron(sp.identity(m), centered_difference(n_theta, h_theta, True))
    return d_t.tocsr(), d_th.tocsr()


def interior_second_differences(n_t: int, n_theta: int, h_t: float, h_theta: float):
    m = n_t - 2
    l_t = sp.kron(second_difference(m, h_t, False), sp.identity(n_theta))
    l_th = sp.kron(sp.identity(m), second_difference(n_theta, h_theta, True))
    return l_t.tocsr(), l_th.tocsr()


def fit_exponential(t: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares fit ``values ~ A exp(-rate t)``; returns ``(rate, A)``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if np.any(y <= 0):
        raise ValueError("exponential fit needs positive samples")
    slope, intercept = np.polyfit(t, np.log(y), 1)
    return float(-slope), float(np.exp(intercept))


def fit_fixed_rate(t: np.ndarray, values: np.ndarray, rate: float) -> float:
    """Best ``A`` (in log space) for ``values ~ A exp(-rate t)`` with ``rate`` fixed."""
    y = np.asarray(values, dtype=float)
    if np.any(y <= 0):
        raise ValueError("exponential fit needs positive samples")
    return float(np.exp(np.mean(np.log(y) + rate * np.asarray(t, dtype=float))))
