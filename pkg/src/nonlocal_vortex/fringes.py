"""Young double-slit fringes of a structured field and their least-squares fit.

Fringe model at screen coordinate ``x`` behind a lens of focal length ``f``::

    I(x) = R(x) [1 + V cos(alpha(x) + dphi)],   alpha(x) = k d x / f

with ``dphi = phi_1 - phi_2`` the input phase difference between slit 1
(center ``-d/2``) and slit 2 (center ``+d/2``). ``R`` is the single-slit
sinc**2 envelope weighted by the slit intensities; the fit replaces it by a
Gaussian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .grid import Axis, FieldGrid
from .optics import SlitGeometry, apply_fourier_stage, apply_mask

TWO_PI = 2.0 * math.pi


class FitError(RuntimeError):
    """The fringe fit did not converge."""


@dataclass
class FringeFit:
    period: float
    phase: float
    visibility: float
    amplitude: float
    center: float
    width: float
    rms: float
    reliable: bool
    message: str = ""

    def model(self, x):
        return fringe_model(x, self.amplitude, self.center, self.width, self.period,
                           self.phase, self.visibility)


@dataclass
class FringeScan:
    positions: np.ndarray
    intensities: np.ndarray
    detector1: float | None = None
    fit: FringeFit | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.intensities = np.asarray(self.intensities, dtype=float)
        if self.positions.shape != self.intensities.shape or self.positions.ndim != 1:
            raise ValueError("positions and intensities must be 1D arrays of equal length")
        if np.any(self.intensities < 0):
            raise ValueError("intensities must be nonnegative")


def fringe_model(x, amplitude, center, width, period, phase, visibility):
    """Gaussian envelope times raised cosine, the fitted form of the fringe law."""
    x = np.asarray(x, dtype=float)
    env = amplitude * np.exp(-0.5 * ((x - center) / width) ** 2)
    return env * (1.0 + visibility * np.cos(TWO_PI * x / period + phase))


def wrap_phase(phi):
    """Wrap into (-pi, pi]."""
    out = -((-np.asarray(phi) + math.pi) % TWO_PI - math.pi)
    return float(out) if np.ndim(out) == 0 else out


def fraunhofer_double_slit(a1: complex, a2: complex, geometry: SlitGeometry, x, wavelength: float,
                           focal_length: float, detector1: float | None = None) -> FringeScan:
    """Far-field intensity of two slits lit with amplitudes ``a1``, ``a2`` at their centers.

    Uses the same lens normalization as :func:`apply_fourier_stage`, so the
    result is directly comparable with :func:`diffract_numeric`.
    """
    x = np.asarray(x, dtype=float)
    k = TWO_PI / wavelength
    h, d = geometry.slit_width, geometry.center_separation
    env = (h * h / (wavelength * focal_length)) * np.sinc(k * h * x / (2.0 * math.pi * focal_length)) ** 2
    m1, m2 = abs(a1), abs(a2)
    dphi = float(np.angle(a1) - np.angle(a2))
    alpha = k * d * x / focal_length
    inten = env * (m1 * m1 + m2 * m2 + 2.0 * m1 * m2 * np.cos(alpha + dphi))
    # an off-center slit pair only adds a common phase ramp, which cancels in the intensity
    meta = {"path": "model", "dphi": wrap_phase(dphi), "period": wavelength * focal_length / d}
    return FringeScan(x, np.clip(inten, 0.0, None), detector1, meta=meta)


def diffract_numeric(slit_plane: FieldGrid, geometry: SlitGeometry, screen: Axis, wavelength: float,
                     focal_length: float, detector1: float | None = None) -> FringeScan:
    """Brute-force fringes: mask the sampled slit-plane field, then lens-transform it."""
    masked = apply_mask(slit_plane, geometry, axis=0)
    out = apply_fourier_stage(masked, focal_length, wavelength, axis=0, out_axis=screen)
    return FringeScan(screen.coords, np.abs(out.values) ** 2, detector1, meta={"path": "numeric"})


def _design(x, center, width, period):
    env = np.exp(-0.5 * ((x - center) / width) ** 2)
    arg = TWO_PI * x / period
    return np.stack([env, env * np.cos(arg), env * np.sin(arg)], axis=1)


def _linear_solve(x, y, center, width, period):
    a = _design(x, center, width, period)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return coef, y - a @ coef


def _to_params(coef):
    amp, b, c = coef
    vis = math.hypot(b, c) / amp if amp != 0 else 0.0
    return float(amp), wrap_phase(math.atan2(-c, b)), float(vis)


def fit_fringes(scan: FringeScan, min_visibility: float = 0.1) -> FringeFit:
    """Least-squares fit of ``A exp(-(x-c)^2/2s^2) [1 + V cos(2 pi x/P + phi)]``.

    The amplitude, visibility and phase enter linearly through
    ``A, A V cos(phi), -A V sin(phi)`` and are solved exactly for every trial
    of ``(c, s, P)``. The nonlinear triple is found by a grid search over the
    period followed by trust-region refinement of the best candidates. The
    phase is referred to ``x = 0`` of the scan coordinate.
    """
    x, y = scan.positions, scan.intensities
    if x.size < 8:
        raise FitError("need at least 8 samples to fit fringes")
    span = float(x.max() - x.min())
    dx = span / (x.size - 1)
    total = float(np.sum(y))
    if total <= 0:
        raise FitError("scan has no signal")
    c0 = float(np.sum(x * y) / total)
    s0 = max(float(np.sqrt(np.sum((x - c0) ** 2 * y) / total)), 2.0 * dx)

    periods = np.geomspace(3.0 * dx, span / 3.0, 300)
    scores = []
    for p in periods:
        _, r = _linear_solve(x, y, c0, s0, p)
        scores.append(float(r @ r))
    scores = np.array(scores)
    is_min = np.r_[True, scores[1:] < scores[:-1]] & np.r_[scores[:-1] < scores[1:], True]
    minima = np.flatnonzero(is_min)
    seeds = periods[minima[np.argsort(scores[minima])][:4]]

    def resid(theta):
        c, log_s, log_p = theta
        return _linear_solve(x, y, c, math.exp(log_s), math.exp(log_p))[1]

    best = None
    for p in seeds:
        for s_try in (s0, 2.0 * s0):
            sol = least_squares(resid, [c0, math.log(s_try), math.log(p)], method="lm",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
            if not np.all(np.isfinite(sol.x)):
                continue
            cost = float(sol.fun @ sol.fun)
            if best is None or cost < best[0]:
                best = (cost, sol)
    if best is None:
        raise FitError("fringe fit diverged for every starting point")
    cost, sol = best
    c, s, p = sol.x[0], math.exp(sol.x[1]), math.exp(sol.x[2])
    coef, r = _linear_solve(x, y, c, s, p)
    amp, phase, vis = _to_params(coef)
    if amp < 0:
        raise FitError(f"fit converged to a negative envelope (status {sol.status}: {sol.message})")
    rms = float(np.sqrt(np.mean(r ** 2)))
    reliable = bool(vis >= min_visibility and sol.status > 0)
    if vis < min_visibility:
        msg = f"visibility {vis:.3g} below {min_visibility}; phase is meaningless"
    else:
        msg = "" if reliable else sol.message
    return FringeFit(p, phase, vis, amp, c, s, rms, reliable, msg)


def fit_scan(scan: FringeScan, **kw) -> FringeScan:
    scan.fit = fit_fringes(scan, **kw)
    return scan
