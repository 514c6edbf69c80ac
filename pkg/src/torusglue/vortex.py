"""Vortices on the cylinder R x S^1 from their polynomial parametrization.

A point ``y`` of ``Z_n = {y in C^n : y_n != 0}`` fixes the monic polynomial
``p[y](eta) = eta^n + y_1 eta^(n-1) + ... + y_n`` on ``C* = R x S^1`` with
``eta = exp(t + i theta)``.  The vortex is ``tau = exp(-u) p[y]`` and
``v = dbar(u) - d(u)`` where ``u`` solves

    u_tt + u_thth = r (1 - exp(-2u) |p[y]|^2)

with ``u ~ n t`` as ``t -> +inf`` and ``u -> ln|y_n|`` as ``t -> -inf``.
The cylinder is truncated to ``[-T, T]`` with Dirichlet data ``u = ln|p|``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._numerics import ConvergenceError, compact_laplacian_2d, fit_exponential

log = logging.getLogger(__name__)


class VortexError(ValueError):
    pass


@dataclass(frozen=True)
class VortexData:
    y: tuple[complex, ...]
    r: float = 1.0

    def __post_init__(self):
        y = tuple(complex(c) for c in self.y)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "r", float(self.r))
        if not self.r > 0:
            raise VortexError("r must be positive")
        if y and y[-1] == 0:
            raise VortexError("y_n must be non-zero (the datum must lie in Z_n)")
        if not all(np.isfinite([c.real for c in y] + [c.imag for c in y])):
            raise VortexError("non-finite vortex coefficient")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def coefficients(self) -> np.ndarray:
        """Polynomial coefficients, leading first: ``[1, y_1, ..., y_n]``."""
        return np.array((1.0,) + self.y, dtype=complex)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], r: float = 1.0) -> "VortexData":
        return cls(tuple(np.poly(np.asarray(roots, dtype=complex))[1:]), r)

    @classmethod
    def from_cylinder_points(cls, points: Sequence[tuple[float, float]], r: float = 1.0):
        """Vortex with zeros at the given ``(t, theta)`` positions."""
        return cls.from_roots([np.exp(t + 1j * th) for t, th in points], r)


@dataclass(frozen=True)
class CylinderGrid:
    T: float
    n_t: int
    n_theta: int

    def __post_init__(self):
        if not self.T > 0:
            raise VortexError("half-length T must be positive")
        if self.n_t < 3 or self.n_theta < 3:
            raise VortexError("grid needs at least 3 points in each direction")

    @property
    def h_t(self) -> float:
        return 2.0 * self.T / (self.n_t - 1)

    @property
    def h_theta(self) -> float:
        return 2.0 * math.pi / self.n_theta

    @property
    def h(self) -> float:
        """Coarsest spacing; error bounds below are stated in terms of it."""
        return max(self.h_t, self.h_theta)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(-self.T, self.T, self.n_t)

    @property
    def theta(self) -> np.ndarray:
        return self.h_theta * np.arange(self.n_theta)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.t, self.theta, indexing="ij")

    def refined(self) -> "CylinderGrid":
        """Both spacings halved."""
        return CylinderGrid(self.T, 2 * self.n_t - 1, 2 * self.n_theta)


# polynomial evaluation in scaled form


def _horner(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.full(x.shape, coeffs[0], dtype=complex)
    for c in coeffs[1:]:
        out = out * x + c
    return out


def eval_scaled(coeffs: np.ndarray, t, theta) -> tuple[np.ndarray, np.ndarray]:
    """``(log|q|, arg q)`` for ``q = sum_k coeffs[k] eta^(deg-k)`` at ``eta = e^(t+i theta)``.

    For ``t >= 0`` the polynomial is evaluated as ``eta^deg * q(1/eta)`` so that
    nothing overflows however large ``t`` is.
    """
    t, theta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
    deg = len(coeffs) - 1
    eta = np.exp(np.minimum(t, 0.0) + 1j * theta)
    inv = np.exp(-np.maximum(t, 0.0) - 1j * theta)
    pos = t >= 0
    low = _horner(coeffs, eta)
    high = _horner(coeffs[::-1], inv)
    with np.errstate(divide="ignore"):
        logmag = np.where(pos, deg * t + np.log(np.abs(high)), np.log(np.abs(low)))
    phase = np.where(pos, deg * theta + np.angle(high), np.angle(low))
    return logmag, np.mod(phase, 2 * math.pi)


def eval_poly(d: VortexData, t, theta) -> tuple[np.ndarray, np.ndarray]:
    """``p[y](e^(t + i theta))`` as ``(log-magnitude, phase)``."""
    if d.n == 0:
        t, theta = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
        return np.zeros(t.shape), np.zeros(t.shape)
    return eval_scaled(d.coefficients, t, theta)


def _eta_dp_coefficients(d: VortexData) -> np.ndarray:
    """Coefficients of ``eta * p'(eta)``, i.e. of ``dp/dz`` with ``eta = e^z``."""
    c = d.coefficients
    return c * np.arange(d.n, -1, -1)


def roots(d: VortexData) -> np.ndarray:
    if d.n == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(d.coefficients)


def zero_locations(d: VortexData) -> list[tuple[float, float]]:
    """Zeros of ``tau`` as ``(t, theta)`` pairs, sorted by ``t``."""
    pts = [(math.log(abs(z)), math.atan2(z.imag, z.real) % (2 * math.pi)) for z in roots(d)]
    return sorted(pts)


# moduli-space operations


def translate(d: VortexData, lam: complex) -> VortexData:
    """Act by ``lam`` in C*: ``y_k -> lam^(-k) y_k``.

    The zeros move by ``-ln|lam|`` in ``t`` and by ``-arg(lam)`` in ``theta``.
    """
    lam = complex(lam)
    if lam == 0:
        raise VortexError("translation parameter must be non-zero")
    return VortexData(tuple(c * lam ** (-(k + 1)) for k, c in enumerate(d.y)), d.r)


def center(d: VortexData) -> tuple[VortexData, float]:
    """Return the centered datum (``|y_n| = 1``) and the mean ``t`` of the zeros."""
    if d.n == 0:
        raise VortexError("the trivial vortex has no center")
    yn = abs(d.y[-1])
    lam = yn ** (1.0 / d.n)
    out = translate(d, lam)
    # the last coefficient is forced exactly onto the unit circle
    y = list(out.y)
    y[-1] = y[-1] / abs(y[-1])
    return VortexData(tuple(y), d.r), math.log(yn) / d.n


def glue_vortices(data: Sequence[VortexData]) -> VortexData:
    """Concatenate vortices by multiplying their polynomials."""
    if not data:
        raise VortexError("need at least one vortex to glue")
    r = data[0].r
    if any(d.r != r for d in data):
        raise VortexError("glued vortices must share r")
    prod = np.array([1.0 + 0j])
    for d in data:
        prod = np.polymul(prod, d.coefficients)
    return VortexData(tuple(complex(c) for c in prod[1:]), r)


# solutions


@dataclass(frozen=True, eq=False)
class VortexSolution:
    data: VortexData
    grid: CylinderGrid
    u: np.ndarray
    residual_norm: float
    iterations: int = 0
    zeros: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if self.u.shape != (self.grid.n_t, self.grid.n_theta):
            raise VortexError("u does not match the grid")
        if not self.zeros:
            object.__setattr__(self, "zeros", tuple(zero_locations(self.data)))
        tt, th = self.grid.mesh()
        logp, phase = eval_poly(self.data, tt, th)
        object.__setattr__(self, "_logp", logp)
        object.__setattr__(self, "_phase", phase)

    @property
    def r(self) -> float:
        return self.data.r

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def abs_tau_sq(self) -> np.ndarray:
        return np.exp(2.0 * (self._logp - self.u))

    @property
    def one_minus_abs_tau_sq(self) -> np.ndarray:
        return -np.expm1(2.0 * (self._logp - self.u))

    @property
    def tau(self) -> np.ndarray:
        return np.exp(self._logp - self.u + 1j * self._phase)

    def u_derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        """Fourth-order centered ``(u_t, u_theta)``; second order in the two end rows."""
        g, u = self.grid, self.u
        u_t = np.gradient(u, g.h_t, axis=0, edge_order=2)
        u_t[2:-2] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * g.h_t)
        def sh(k):
            return np.roll(u, -k, axis=1)

        u_th = (sh(-2) - 8 * sh(-1) + 8 * sh(1) - sh(2)) / (12 * g.h_theta)
        return u_t, u_th

    @property
    def dbar_u(self) -> np.ndarray:
        """``v_{0,1}``, the coefficient of ``dz-bar`` in ``v``."""
        u_t, u_th = self.u_derivatives()
        return 0.5 * (u_t + 1j * u_th)

    @property
    def v_t(self) -> np.ndarray:
        """``v = i (v_t dt + v_theta dtheta)``."""
        return self.u_derivatives()[1]

    @property
    def v_theta(self) -> np.ndarray:
        return -self.u_derivatives()[0]

    @property
    def d_v_tau(self) -> np.ndarray:
        """Covariant holomorphic derivative ``(d - d u) tau``."""
        if self.n == 0:
            return np.zeros(self.u.shape, dtype=complex)
        tt, th = self.grid.mesh()
        logq, phq = eval_scaled(_eta_dp_coefficients(self.data), tt, th)
        d_u = np.conj(self.dbar_u)
        return np.exp(logq - self.u + 1j * phq) - 2.0 * d_u * self.tau


def _check_margin(d: VortexData, g: CylinderGrid) -> None:
    margin = 4.0 / math.sqrt(2.0 * d.r)
    for t0, _ in zero_locations(d):
        if abs(t0) > g.T - margin:
            raise VortexError(
                f"zero at t={t0:.3f} is within {margin:.3f} of the truncation boundary"
            )


def solve_vortex(
    d: VortexData, g: CylinderGrid, tol: float = 1e-11, max_iter: int = 50
) -> VortexSolution:
    """Damped Newton solve of the vortex equation on the truncated cylinder.

    The unknown is the shifted field ``w = u - log sqrt(|p|^2 + eps^2)``, which
    stays O(1) while ``u`` itself grows like ``n t``.  The Laplacian is the
    fourth-order compact nine-point stencil: with the five-point stencil the
    O(h^2) error on the harmonic modes ``e^(-k|t|) cos(k theta)`` of ``ln|p|``
    outweighs ``1 - |tau|^2`` far out in the tails once ``sqrt(2r) > 1``.
    """
    if tol <= 0:
        raise VortexError("tol must be positive")
    if d.n == 0:
        return VortexSolution(d, g, np.zeros((g.n_t, g.n_theta)), 0.0, 0)
    _check_margin(d, g)

    r = d.r
    tt, th = g.mesh()
    logp, _ = eval_poly(d, tt, th)
    eps = 1e-3 * min(1.0, abs(d.y[-1]))
    shift = 0.5 * np.logaddexp(2.0 * logp, 2.0 * math.log(eps))
    q = np.exp(2.0 * (logp - shift))  # |p|^2 / (|p|^2 + eps^2)

    lap, smooth = compact_laplacian_2d(g.n_t, g.n_theta, g.h_t, g.h_theta)
    interior = slice(1, g.n_t - 1)
    w = 0.5 * np.logaddexp(2.0 * logp, 0.0) - shift
    w[0] = logp[0] - shift[0]
    w[-1] = logp[-1] - shift[-1]
    # fixed contributions: L(shift) and the Dirichlet rows of w and of the source
    g_b = np.zeros_like(w)
    g_b[[0, -1]] = r * -np.expm1(-2.0 * w[[0, -1]] + np.log(q[[0, -1]]))
    shape = (g.n_t - 2, g.n_theta)
    fixed = (
        lap.apply(shift)
        + lap.boundary_part(w).reshape(shape)
        - smooth.boundary_part(g_b).reshape(shape)
    )
    q_in = q[interior]

    def residual(wi: np.ndarray) -> np.ndarray:
        src = r * (1.0 - q_in * np.exp(-2.0 * wi))
        return (
            (lap.interior @ wi.ravel()).reshape(shape)
            - (smooth.interior @ src.ravel()).reshape(shape)
            + fixed
        )

    wi = w[interior].copy()
    res = residual(wi)
    norm = float(np.max(np.abs(res)))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (|F|={norm:.3e})")
        it += 1
        dsrc = sp.diags(2.0 * r * (q_in * np.exp(-2.0 * wi)).ravel())
        jac = lap.interior - smooth.interior @ dsrc
        step = -splu(jac.tocsc()).solve(res.ravel()).reshape(shape)
        alpha = 1.0
        while True:
            trial = wi + alpha * step
            with np.errstate(over="ignore"):
                tres = residual(trial)
            tnorm = float(np.max(np.abs(tres)))
            if np.isfinite(tnorm) and tnorm < norm:
                break
            alpha *= 0.5
            if alpha < 1e-6:
                raise ConvergenceError(
                    f"damped Newton stalled at |F|={norm:.3e} after {it} iterations"
                )
        wi, res, norm = trial, tres, tnorm
        log.debug("newton it=%d alpha=%.3g |F|=%.3e", it, alpha, norm)

    w[interior] = wi
    u = w + shift
    u[0] = logp[0]
    u[-1] = logp[-1]
    return VortexSolution(d, g, u, norm, it)


def vortex_number(s: VortexSolution) -> float:
    """``r * sum (1 - |tau|^2) h_t h_theta``; approximates ``2 pi n``."""
    g = s.grid
    return float(s.r * np.sum(s.one_minus_abs_tau_sq) * g.h_t * g.h_theta)


@dataclass(frozen=True)
class DecayReport:
    fitted_rate: float
    target_rate: float
    prefactor: float
    lower_bound_ratio: float
    window: tuple[float, float]

    @property
    def relative_error(self) -> float:
        return abs(self.fitted_rate - self.target_rate) / self.target_rate


def distance_to_zeros(s: VortexSolution) -> np.ndarray:
    tt, th = s.grid.mesh()
    out = np.full(tt.shape, np.inf)
    for t0, th0 in s.zeros:
        dth = np.abs(np.mod(th - th0 + math.pi, 2 * math.pi) - math.pi)
        out = np.minimum(out, np.hypot(tt - t0, dth))
    return out


def tail_window(s: VortexSolution, side: str = "right") -> tuple[float, float]:
    """Fit window ``[t_max + 2/sqrt(2r), T - 2]`` (mirrored for the left tail)."""
    rate = math.sqrt(2.0 * s.r)
    ts = [t0 for t0, _ in s.zeros]
    if side == "right":
        lo, hi = max(ts) + 2.0 / rate, s.grid.T - 2.0
    else:
        lo, hi = -s.grid.T + 2.0, min(ts) - 2.0 / rate
    if hi - lo < 2 * s.grid.h_t:
        raise VortexError(f"{side} tail window [{lo:.3f}, {hi:.3f}] is empty")
    return lo, hi


def lower_bound_ratio(s: VortexSolution, edge: float | None = None) -> float:
    """``min (1-|tau|^2) / sum_j exp(-sqrt(2r)|t - t_j|)`` away from ``t = +-T``.

    ``edge`` (default ``1/sqrt(2r)``) excludes the boundary layer where the
    Dirichlet truncation forces ``|tau| = 1``.
    """
    rate = math.sqrt(2.0 * s.r)
    if edge is None:
        edge = 1.0 / rate
    t = s.grid.t
    keep = np.abs(t) <= s.grid.T - edge
    ref = sum(np.exp(-rate * np.abs(t - t0)) for t0, _ in s.zeros)
    ratio = s.one_minus_abs_tau_sq / ref[:, None]
    return float(np.min(ratio[keep]))


def decay_report(s: VortexSolution, window: tuple[float, float] | None = None) -> DecayReport:
    if s.n == 0:
        raise VortexError("the trivial vortex has nothing to fit")
    rate = math.sqrt(2.0 * s.r)
    lo, hi = window if window is not None else tail_window(s)
    t = s.grid.t
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 3:
        raise VortexError("decay window is empty")
    x = s.one_minus_abs_tau_sq
    profile = x.mean(axis=1)
    fitted, _ = fit_exponential(t[sel], profile[sel])

    # empirical constant in (1-|tau|^2) + r^(-1/2)|nabla_v tau| <= zeta exp(-sqrt(2r) dist)
    grad = math.sqrt(2.0) * np.abs(s.d_v_tau)
    lhs = x + grad / math.sqrt(s.r)
    keep = np.abs(t) <= s.grid.T - 1.0 / rate
    zeta = float(np.max((lhs * np.exp(rate * distance_to_zeros(s)))[keep]))
    return DecayReport(fitted, rate, zeta, lower_bound_ratio(s), (lo, hi))


def decay_profile(s: VortexSolution) -> tuple[np.ndarray, np.ndarray]:
    """``(t, max_theta (1 - |tau|^2))`` for plotting."""
    return s.grid.t, s.one_minus_abs_tau_sq.max(axis=1)
