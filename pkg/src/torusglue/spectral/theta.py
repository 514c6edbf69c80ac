"""Discretized linearization at a vortex background.

With ``d = 1/2 (d_t - i d_th)`` and ``dbar = 1/2 (d_t + i d_th)``:

    Theta (a, lam)   = (d a + r/2 conj(tau) lam,  dbar_v lam + tau a)
    Theta^+ (b, eta) = (-dbar b + conj(tau) eta,  -d_v eta + r/2 tau b)

where ``dbar_v = dbar + dbar(u)`` and ``d_v = d - d(u)``.  Sections vanish
on the two Dirichlet rows ``t = +-T``; derivatives are centered differences
on the interior rows, so the assembled ``Theta^+`` is exactly the conjugate
transpose of ``Theta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .._numerics import (
    ConvergenceError,
    fit_exponential,
    interior_derivatives,
    interior_second_differences,
    laplacian_2d,
)
from ..vortex import CylinderGrid, VortexData, VortexSolution, solve_vortex, tail_window


class SpectralError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Section2D:
    """A pair of complex fields on the full grid; the first and last rows are ignored."""

    grid: CylinderGrid
    first: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        shape = (self.grid.n_t, self.grid.n_theta)
        for name in ("first", "second"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise SpectralError(f"{name} has shape {arr.shape}, grid needs {shape}")
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, grid: CylinderGrid) -> "Section2D":
        z = np.zeros((grid.n_t, grid.n_theta), dtype=complex)
        return cls(grid, z, z.copy())

    def interior_vector(self) -> np.ndarray:
        return np.concatenate([self.first[1:-1].ravel(), self.second[1:-1].ravel()])

    @classmethod
    def from_interior(cls, grid: CylinderGrid, vec: np.ndarray) -> "Section2D":
        n = (grid.n_t - 2) * grid.n_theta
        out = []
        for part in (vec[:n], vec[n:]):
            f = np.zeros((grid.n_t, grid.n_theta), dtype=complex)
            f[1:-1] = part.reshape(grid.n_t - 2, grid.n_theta)
            out.append(f)
        return cls(grid, *out)

    def norm(self) -> float:
        """Grid L2 norm (area weights included)."""
        g = self.grid
        v = self.interior_vector()
        return float(math.sqrt(np.vdot(v, v).real * g.h_t * g.h_theta))

    def pointwise_norm(self) -> np.ndarray:
        return np.sqrt(np.abs(self.first) ** 2 + np.abs(self.second) ** 2)

    def circle_norms(self) -> np.ndarray:
        """L2 norm over each circle ``{t} x S^1`` (normalized to unit length)."""
        return np.sqrt((self.pointwise_norm() ** 2).mean(axis=1))


def inner(w: Section2D, x: Section2D) -> complex:
    """Weighted inner product ``sum conj(w) x h_t h_theta`` over the interior."""
    g = w.grid
    return complex(np.vdot(w.interior_vector(), x.interior_vector()) * g.h_t * g.h_theta)


class ThetaOperator:
    """Sparse ``Theta`` and ``Theta^+`` at a vortex background.

    ``balanced=True`` conjugates by ``diag(s, 1)`` with ``s = sqrt(r/2)``,
    which puts ``sqrt(r/2)`` on both zeroth-order couplings.  That form
    satisfies the Weitzenbock identity with ``r/2 |tau|^2`` on both
    components for every ``r``; the unbalanced form does so only at ``r = 2``.
    """

    def __init__(self, background: VortexSolution, balanced: bool = False):
        self.background = background
        self.grid = background.grid
        self.balanced = balanced
        g = self.grid
        if g.n_t < 4:
            raise SpectralError("grid too small for an interior operator")
        r = background.r
        d_t, d_th = interior_derivatives(g.n_t, g.n_theta, g.h_t, g.h_theta)
        self._d = 0.5 * (d_t - 1j * d_th)
        self._dbar = 0.5 * (d_t + 1j * d_th)
        tau = background.tau[1:-1].ravel()
        dbar_u = background.dbar_u[1:-1].ravel()
        self._tau, self._dbar_u = tau, dbar_u
        if balanced:
            c_lam = c_a = math.sqrt(r / 2.0)
        else:
            c_lam, c_a = r / 2.0, 1.0
        self._c_lam, self._c_a = c_lam, c_a
        diag = sp.diags
        self.matrix = sp.bmat(
            [
                [self._d, diag(c_lam * np.conj(tau))],
                [diag(c_a * tau), self._dbar + diag(dbar_u)],
            ],
            format="csr",
        )
        # Theta^+ written out from its formula rather than by transposition
        d_u = np.conj(dbar_u)
        self.adjoint_matrix = sp.bmat(
            [
                [-self._dbar, diag(c_a * np.conj(tau))],
                [diag(c_lam * tau), -self._d + diag(d_u)],
            ],
            format="csr",
        )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def regularizer(self) -> sp.csr_matrix:
        """``h_t^2 L_t^2 + h_th^2 L_th^2`` on both components.

        Centered differences annihilate the grid-scale checkerboard modes; this
        O(h^2)-small term lifts them without touching smooth sections.
        """
        g = self.grid
        l_t, l_th = interior_second_differences(g.n_t, g.n_theta, g.h_t, g.h_theta)
        w = g.h_t**2 * (l_t @ l_t) + g.h_theta**2 * (l_th @ l_th)
        return sp.block_diag([w, w], format="csr")


def theta_apply(op: ThetaOperator, w: Section2D) -> Section2D:
    _check_grid(op, w)
    return Section2D.from_interior(op.grid, op.matrix @ w.interior_vector())


def theta_adjoint_apply(op: ThetaOperator, x: Section2D) -> Section2D:
    _check_grid(op, x)
    return Section2D.from_interior(op.grid, op.adjoint_matrix @ x.interior_vector())


def _check_grid(op: ThetaOperator, w: Section2D) -> None:
    if w.grid != op.grid:
        raise SpectralError("section and operator live on different grids")


def weitzenbock_rhs(op: ThetaOperator, x: Section2D) -> Section2D:
    """Right side of the Weitzenbock identity for the balanced operator.

    ``(-1/4 Lap b + r/2 |tau|^2 b,
       -1/4 Lap eta + 1/4 (Lap u) eta + du dbar(eta) - dbar(u) d(eta) + |du|^2 eta + r/2 |tau|^2 eta)``

    assembled from the five-point Laplacian, with ``Lap u`` taken from the
    vortex equation, so no composition of first-order stencils enters.
    """
    _check_grid(op, x)
    s, g = op.background, op.grid
    lap = laplacian_2d(g.n_t, g.n_theta, g.h_t, g.h_theta).interior
    b = x.first[1:-1].ravel()
    eta = x.second[1:-1].ravel()
    dbar_u = op._dbar_u
    d_u = np.conj(dbar_u)
    mass = 0.5 * s.r * np.abs(op._tau) ** 2
    lap_u = s.r * s.one_minus_abs_tau_sq[1:-1].ravel()
    rb = -0.25 * (lap @ b) + mass * b
    reta = (
        -0.25 * (lap @ eta)
        + 0.25 * lap_u * eta
        + d_u * (op._dbar @ eta)
        - dbar_u * (op._d @ eta)
        + np.abs(d_u) ** 2 * eta
        + mass * eta
    )
    return Section2D.from_interior(g, np.concatenate([rb, reta]))


def weitzenbock_residual(op: ThetaOperator, w: Section2D) -> float:
    """``||Theta Theta^+ w - rhs(w)|| / ||w||`` for the balanced operator at ``op``'s background."""
    bal = op if op.balanced else ThetaOperator(op.background, balanced=True)
    nw = w.norm()
    if nw == 0.0:
        return 0.0
    lhs = bal.matrix @ (bal.adjoint_matrix @ w.interior_vector())
    diff = lhs - weitzenbock_rhs(bal, w).interior_vector()
    g = op.grid
    return float(math.sqrt(np.vdot(diff, diff).real * g.h_t * g.h_theta) / nw)


def gaussian_section(grid: CylinderGrid, center=(0.0, math.pi), width: float = 1.0, seed: int = 0):
    """Smooth bump with pseudo-random complex amplitudes; negligible at ``t = +-T``."""
    rng = np.random.default_rng(seed)
    tt, th = grid.mesh()
    # 2 - 2 cos is the smooth periodic stand-in for dtheta^2
    bump = np.exp(-((tt - center[0]) ** 2 + 2.0 - 2.0 * np.cos(th - center[1])) / (2 * width**2))
    amp = rng.normal(size=4)
    return Section2D(
        grid,
        (amp[0] + 1j * amp[1]) * bump,
        (amp[2] + 1j * amp[3]) * bump * np.exp(1j * th),
    )


# spectra

WILSON = 0.01


@dataclass(frozen=True, eq=False)
class KernelSpectrum:
    """Low end of ``Theta^+ Theta`` (complex eigenvalues, ascending)."""

    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)
    threshold: float
    reference: float

    @property
    def complex_count(self) -> int:
        return int(np.sum(self.eigenvalues < self.threshold))

    @property
    def count(self) -> int:
        """Real dimension; ``Theta`` is complex-linear so each eigenvalue counts twice."""
        return 2 * self.complex_count

    @property
    def gap(self) -> float:
        above = self.eigenvalues[self.eigenvalues >= self.threshold]
        return float(above[0]) if above.size else float("nan")


def _lowest(mat: sp.spmatrix, k: int, sigma: float = -1e-3):
    k = min(k, mat.shape[0] - 2)
    try:
        vals, vecs = eigsh(mat.tocsc(), k=k, sigma=sigma, which="LM", tol=1e-10)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"shift-invert eigensolve did not converge: {exc}") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def normal_operator(op: ThetaOperator) -> sp.csr_matrix:
    """Regularized ``Theta^+ Theta``; Hermitian positive semi-definite."""
    return (op.adjoint_matrix @ op.matrix + WILSON * op.regularizer()).tocsr()


def cokernel_operator(op: ThetaOperator) -> sp.csr_matrix:
    return (op.matrix @ op.adjoint_matrix + WILSON * op.regularizer()).tocsr()


def reference_gap(grid: CylinderGrid, r: float) -> float:
    """Smallest eigenvalue of the regularized ``Theta^+ Theta`` at the trivial vortex."""
    bg = solve_vortex(VortexData((), r), grid)
    vals, _ = _lowest(normal_operator(ThetaOperator(bg)), 1)
    return float(vals[0])


def kernel_spectrum(
    op: ThetaOperator,
    threshold_fraction: float = 0.25,
    reference: float | None = None,
    extra: int = 3,
) -> KernelSpectrum:
    """Smallest ``n + extra`` eigenvalues of ``Theta^+ Theta``, classified against the threshold."""
    if not 0 < threshold_fraction < 1:
        raise SpectralError("threshold_fraction must lie in (0, 1)")
    bg = op.background
    if reference is None:
        reference = reference_gap(op.grid, bg.r)
    vals, vecs = _lowest(normal_operator(op), bg.n + extra)
    return KernelSpectrum(vals, vecs, threshold_fraction * reference, reference)


def kernel_count(op: ThetaOperator, threshold_fraction: float = 0.25, reference: float | None = None) -> int:
    """Real dimension of the numerical kernel of ``Theta``."""
    return kernel_spectrum(op, threshold_fraction, reference).count


def cokernel_gap(op: ThetaOperator) -> float:
    """Smallest eigenvalue of regularized ``Theta Theta^+``."""
    vals, _ = _lowest(cokernel_operator(op), 1)
    return float(vals[0])


def kernel_profiles(ks: KernelSpectrum, grid: CylinderGrid) -> list[np.ndarray]:
    """Circle norms along ``t`` for each kernel eigenvector."""
    out = []
    for j in range(ks.complex_count):
        w = Section2D.from_interior(grid, ks.vectors[:, j])
        out.append(w.circle_norms())
    return out


def kernel_decay_rates(ks: KernelSpectrum, bg: VortexSolution, side: str = "right") -> list[float]:
    """Fitted tail rates of the kernel eigenvectors, window as in the vortex decay fit."""
    lo, hi = tail_window(bg, side)
    t = bg.grid.t
    sel = (t >= lo) & (t <= hi)
    sign = 1.0 if side == "right" else -1.0
    return [fit_exponential(sign * t[sel], prof[sel])[0] for prof in kernel_profiles(ks, bg.grid)]


def kernel_decay_csv(ks: KernelSpectrum, grid: CylinderGrid) -> str:
    """CSV rows ``t, log ||w_j(t, .)||`` for every kernel element."""
    profs = kernel_profiles(ks, grid)
    header = "t," + ",".join(f"log_norm_{j}" for j in range(len(profs)))
    lines = [header]
    # the Dirichlet rows carry no unknowns
    for i in range(1, grid.n_t - 1):
        row = [grid.t[i]] + [math.log(p[i]) if p[i] > 0 else float("-inf") for p in profs]
        lines.append(",".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"
