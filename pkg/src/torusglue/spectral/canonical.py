"""The canonical kernel element and tail asymptotics of vortex backgrounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._numerics import fit_exponential, fit_fixed_rate
from ..vortex import VortexSolution, tail_window
from .theta import Section2D, SpectralError, ThetaOperator, theta_apply


def pi_c(background: VortexSolution) -> Section2D:
    """``(r/2 (1 - |tau|^2), d_v tau)``, the generator of translations."""
    s = background
    return Section2D(s.grid, 0.5 * s.r * s.one_minus_abs_tau_sq, s.d_v_tau)


def pi_c_residual(background: VortexSolution) -> float:
    """``||Theta pi_c|| / ||pi_c||``."""
    p = pi_c(background)
    norm = p.norm()
    if norm == 0.0:
        raise SpectralError("pi_c vanishes identically (trivial vortex); nothing to normalize")
    return theta_apply(ThetaOperator(background), p).norm() / norm


def pi_c_decay_rate(background: VortexSolution, side: str = "right") -> float:
    """Fitted exponential rate of the circle norms of ``pi_c`` over the tail window.

    The L2 norm over each circle keeps the faster theta-harmonics from biasing
    the slope near the inner end of the window, as a pointwise max would.
    """
    lo, hi = tail_window(background, side)
    t = background.grid.t
    sel = (t >= lo) & (t <= hi)
    prof = pi_c(background).circle_norms()
    sign = 1.0 if side == "right" else -1.0
    return fit_exponential(sign * t[sel], prof[sel])[0]


def asymptotic_coefficients(p: Section2D, background: VortexSolution) -> tuple[float, float]:
    """Leading coefficients ``(u+, u-)`` of ``pi_c`` on the two tails.

    On the right tail ``pi_c ~ u+ (sqrt r, sqrt 2) exp(-sqrt(2r) t)``, on the
    left ``pi_c ~ u- (sqrt r, -sqrt 2) exp(sqrt(2r) t)``; both are read off the
    theta-averaged first component at the fixed rate ``sqrt(2r)``.
    """
    bg = background
    if bg.n == 0:
        raise SpectralError("no tails to fit for the trivial vortex")
    rate = math.sqrt(2.0 * bg.r)
    t = bg.grid.t
    a = p.first.real.mean(axis=1) / math.sqrt(bg.r)
    out = []
    for side, sign in (("right", 1.0), ("left", -1.0)):
        lo, hi = tail_window(bg, side)
        sel = (t >= lo) & (t <= hi)
        out.append(fit_fixed_rate(sign * t[sel], a[sel], rate))
    return out[0], out[1]


@dataclass(frozen=True)
class AsymptoticsFit:
    """Two-sided exponential fit of the unitary-gauge fields on a root-free window.

    ``plus`` multiplies ``s_+ exp(-sqrt(2r)(t - lo))`` (decay away from roots
    below the window), ``minus`` multiplies ``s_- exp(-sqrt(2r)(hi - t))``.
    The coefficients on the range-side eigenvectors vanish identically for a
    vortex pullback and are reported as zero.
    """

    window: tuple[float, float]
    plus: float
    minus: float
    rate_plus: float
    rate_minus: float
    remainder_rate: float
    sides: tuple[str, ...]

    @property
    def coefficients(self) -> dict[str, float]:
        return {"plus_plus": self.plus, "plus_minus": 0.0, "minus_plus": self.minus, "minus_minus": 0.0}


def _unitary_fields(s: VortexSolution) -> tuple[np.ndarray, np.ndarray]:
    # f = u - ln|p| >= 0; a = dbar f, lam = |tau| - 1 = exp(-f) - 1
    # (singular at the zeros, which never enter a fit window)
    g = s.grid
    with np.errstate(invalid="ignore", over="ignore"):
        f = s.u - s._logp
        f_t = np.gradient(f, g.h_t, axis=0, edge_order=2)
        f_th = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2 * g.h_theta)
        return 0.5 * (f_t + 1j * f_th), np.expm1(-f)


def _signed_fit(dist: np.ndarray, values: np.ndarray, reach: float) -> tuple[float, float]:
    # fit within ``reach`` of the source edge, up to the first sign change
    sel = dist <= reach
    d, v = dist[sel], values[sel]
    order = np.argsort(d)
    d, v = d[order], v[order]
    sign = float(np.sign(v[0])) or 1.0
    flips = np.nonzero(sign * v <= 0)[0]
    stop = flips[0] if flips.size else v.size
    if stop < 3:
        raise SpectralError("no usable samples for the exponential fit")
    k, c = fit_exponential(d[:stop], sign * v[:stop])
    return sign * c, k


def cylinder_asymptotics_fit(s: VortexSolution, window: tuple[float, float]) -> AsymptoticsFit:
    lo, hi = map(float, window)
    rate = math.sqrt(2.0 * s.r)
    g = s.grid
    if hi - lo < 8.0 / rate:
        raise SpectralError(f"window length {hi - lo:.3f} is shorter than 8/sqrt(2r) = {8.0 / rate:.3f}")
    if lo <= -g.T or hi >= g.T:
        raise SpectralError("window must lie strictly inside the grid")
    ts = [t0 for t0, _ in s.zeros]
    if any(lo <= t0 <= hi for t0 in ts):
        raise SpectralError("window contains a zero of tau")
    sides = tuple(
        name for name, present in (("plus", any(t0 < lo for t0 in ts)), ("minus", any(t0 > hi for t0 in ts)))
        if present
    )
    if not sides:
        return AsymptoticsFit((lo, hi), 0.0, 0.0, float("nan"), float("nan"), float("nan"), ())

    t = g.t
    sel = (t >= lo) & (t <= hi)
    tw = t[sel]
    a, lam = _unitary_fields(s)
    a, lam = a[sel], lam[sel]
    a_bar, lam_bar = a.real.mean(axis=1), lam.mean(axis=1)
    # (a, lam) = alpha (sqrt r, sqrt 2) + beta (sqrt r, -sqrt 2)
    sr, s2 = math.sqrt(s.r), math.sqrt(2.0)
    alpha = 0.5 * (a_bar / sr + lam_bar / s2)
    beta = 0.5 * (a_bar / sr - lam_bar / s2)

    # with roots on both sides each coefficient is fitted on its own half
    reach = (hi - lo) / 2 if len(sides) == 2 else hi - lo
    cp, kp = _signed_fit(tw - lo, alpha, reach) if "plus" in sides else (0.0, float("nan"))
    cm, km = _signed_fit(hi - tw, beta, reach) if "minus" in sides else (0.0, float("nan"))
    alpha_fit = cp * np.exp(-kp * (tw - lo)) if "plus" in sides else 0.0 * tw
    beta_fit = cm * np.exp(-km * (hi - tw)) if "minus" in sides else 0.0 * tw
    model_a = sr * (alpha_fit + beta_fit)
    model_l = s2 * (alpha_fit - beta_fit)
    rem = np.sqrt(np.abs(a - model_a[:, None]) ** 2 + np.abs(lam - model_l[:, None]) ** 2).max(axis=1)

    if sides == ("plus",):
        dist = tw - lo
    elif sides == ("minus",):
        dist = hi - tw
    else:
        dist = np.minimum(tw - lo, hi - tw)
    z, _ = fit_exponential(dist, rem)
    return AsymptoticsFit((lo, hi), cp, cm, kp, km, z, sides)
