"""Translation-invariant model operator on ``S^1 x T^2``.

For a Fourier mode with circle frequency ``m`` and fiber symbol ``q`` the
operator acts on ``(a, lam, b, eta)`` by

    [[ m,  r,  conj(q) x, 0              ],
     [ 2, -m,  0,         conj(q) / x    ],
     [ q / x, 0, -m, -2 ],
     [ 0, q x,   -r,  m ]]           with x = sqrt(r/2).

Its square is ``(m^2 + 2r + |q|^2) I``.  The zero mode is the direct sum of
``M(a, lam) = (r lam, 2a)`` and ``M'(b, eta) = (-2 eta, -r b)``.  Conjugating
by ``D = diag(x, 1, 1, x)`` makes every block Hermitian, and that is the frame
in which eigenvalues are computed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ModelOperatorO:
    r: float
    fourier_cutoff: int = 1
    torus_periods: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if self.fourier_cutoff < 0 or int(self.fourier_cutoff) != self.fourier_cutoff:
            raise ValueError("fourier_cutoff must be a non-negative integer")
        periods = tuple(float(p) for p in self.torus_periods)
        if len(periods) != 3 or min(periods) <= 0:
            raise ValueError("torus_periods must be three positive reals")
        object.__setattr__(self, "torus_periods", periods)

    def modes(self):
        k = range(-self.fourier_cutoff, self.fourier_cutoff + 1)
        return itertools.product(k, k, k)

    def symbols(self, mode) -> tuple[float, complex]:
        l1, l2, l3 = self.torus_periods
        k1, k2, k3 = mode
        return 2 * math.pi * k1 / l1, complex(2 * math.pi * k2 / l2, 2 * math.pi * k3 / l3)

    def block(self, mode) -> np.ndarray:
        """The 4x4 complex block in the original frame."""
        m, q = self.symbols(mode)
        r = self.r
        x = math.sqrt(r / 2)
        qc = q.conjugate()
        return np.array(
            [
                [m, r, qc * x, 0],
                [2, -m, 0, qc / x],
                [q / x, 0, -m, -2],
                [0, q * x, -r, m],
            ],
            dtype=complex,
        )

    def scaling(self) -> np.ndarray:
        x = math.sqrt(self.r / 2)
        return np.diag([x, 1.0, 1.0, x]).astype(complex)

    def hermitian_block(self, mode) -> np.ndarray:
        """``D^-1 O D`` for the block at ``mode``."""
        d = np.diag(self.scaling())
        return self.block(mode) * d[None, :] / d[:, None]


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Spectrum summary.

    For the model operator ``kernel_count`` is the number of zero
    eigenvalues and ``cokernel_gap`` is ``gap**2``, the sharp constant in
    ``||O w||^2 >= E ||w||^2``.
    """

    eigenvalues: np.ndarray
    gap: float
    zero_mode_eigenvectors: tuple[np.ndarray, ...] = field(default=())
    kernel_count: int = 0
    cokernel_gap: float = float("nan")
    gap_modes: tuple[tuple[int, int, int], ...] = ()
    gap_multiplicity: dict = field(default_factory=dict)

    def symmetry_defect(self) -> float:
        ev = np.sort(self.eigenvalues)
        return float(np.max(np.abs(ev + ev[::-1]))) if ev.size else 0.0


def zero_mode_eigenvectors(r: float) -> tuple[np.ndarray, ...]:
    """``s++ , s+- , s-+ , s--``: eigenvalue ``+sqrt(2r)`` for the first two."""
    sr, s2 = math.sqrt(r), math.sqrt(2.0)
    vecs = ((sr, s2, 0, 0), (0, 0, s2, -sr), (sr, -s2, 0, 0), (0, 0, s2, sr))
    return tuple(np.array(v, dtype=complex) for v in vecs)


def model_spectrum(m: ModelOperatorO, tol: float = 1e-9) -> SpectralReport:
    all_vals = []
    per_mode = {}
    for mode in m.modes():
        vals = np.linalg.eigvalsh(m.hermitian_block(mode))
        per_mode[mode] = vals
        all_vals.append(vals)
    ev = np.sort(np.concatenate(all_vals))
    gap = float(np.min(np.abs(ev)))
    gap_modes = tuple(mode for mode, v in per_mode.items() if np.min(np.abs(v)) <= gap + tol)
    mult = {
        "+": int(sum(np.sum(np.abs(v - gap) <= tol) for v in per_mode.values())),
        "-": int(sum(np.sum(np.abs(v + gap) <= tol) for v in per_mode.values())),
    }
    return SpectralReport(
        eigenvalues=ev,
        gap=gap,
        zero_mode_eigenvectors=zero_mode_eigenvectors(m.r),
        kernel_count=int(np.sum(np.abs(ev) <= tol)),
        cokernel_gap=gap**2,
        gap_modes=gap_modes,
        gap_multiplicity=mult,
    )


def zero_mode_eigenspace(r: float, sign: int) -> np.ndarray:
    """Orthonormal basis (columns, original frame) of the ``sign * sqrt(2r)`` eigenspace.

    Computed numerically from the zero-mode block, independently of the
    closed-form vectors in :func:`zero_mode_eigenvectors`.
    """
    m = ModelOperatorO(r, 0)
    herm = m.hermitian_block((0, 0, 0))
    vals, vecs = np.linalg.eigh(herm)
    sel = np.abs(vals - sign * math.sqrt(2 * r)) < 1e-9
    basis = m.scaling() @ vecs[:, sel]
    q, _ = np.linalg.qr(basis)
    return q


def eigenvector_mismatch(v: np.ndarray, basis: np.ndarray) -> float:
    """Distance of the unit vector along ``v`` from the span of ``basis`` (phase/scale-free)."""
    u = v / np.linalg.norm(v)
    return float(np.linalg.norm(u - basis @ (basis.conj().T @ u)))
