"""Hermite-Gaussian and first-order Laguerre-Gaussian beam modes.

One-dimensional modes use the envelope ``exp(-x**2 / (2 w**2))`` with Hermite
argument ``x / w``::

    u_n(x) = C_n H_n(x/w) exp(-x^2 / 2w^2) exp(-i [k x^2 / 2R - (n + 1/2) phi])

so ``|u_n|**2`` has 1/e radius ``w`` and ``C_n = (w sqrt(pi) 2**n n!)**-0.5``.
Coordinates are dimensionless unless the caller chooses otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Axis, FieldGrid


@dataclass(frozen=True)
class BeamGeometry:
    """Waist, wavelength and axial position of a paraxial beam.

    With the envelope convention above the Rayleigh range is ``k * w0**2``.
    """

    waist_w0: float = 1.0
    wavelength: float = 2.0 * np.pi
    z: float = 0.0

    def __post_init__(self):
        if not self.waist_w0 > 0:
            raise ValueError(f"waist must be positive, got {self.waist_w0}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def rayleigh_range(self) -> float:
        return self.k * self.waist_w0 ** 2

    @property
    def width(self) -> float:
        return self.waist_w0 * math.sqrt(1.0 + (self.z / self.rayleigh_range) ** 2)

    @property
    def curvature_radius(self) -> float:
        if self.z == 0:
            return math.inf
        return self.z * (1.0 + (self.rayleigh_range / self.z) ** 2)

    @property
    def inverse_curvature(self) -> float:
        """``1/R(z)``, zero at the waist."""
        z, zr = self.z, self.rayleigh_range
        return z / (z * z + zr * zr)

    @property
    def gouy(self) -> float:
        return math.atan2(self.z, self.rayleigh_range)

    def at(self, z: float) -> "BeamGeometry":
        return BeamGeometry(self.waist_w0, self.wavelength, z)


WAIST = BeamGeometry()


def hermite_poly(n: int, x):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    if n < 0:
        raise ValueError("Hermite order must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for m in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * m * h_prev
    return h if h.ndim else float(h)


def hg_norm(n: int, w: float) -> float:
    return (w * math.sqrt(math.pi) * 2.0 ** n * math.factorial(n)) ** -0.5


def hg_1d(n: int, x, geom: BeamGeometry = WAIST):
    """One-dimensional Hermite-Gaussian amplitude ``u_n(x)``, unit L2 norm."""
    x = np.asarray(x, dtype=float)
    w = geom.width
    u = x / w
    amp = hg_norm(n, w) * hermite_poly(n, u) * np.exp(-0.5 * u * u)
    if geom.z == 0:
        out = amp.astype(complex)
    else:
        phase = 0.5 * geom.k * x * x * geom.inverse_curvature - (n + 0.5) * geom.gouy
        out = amp * np.exp(-1j * phase)
    return out if out.ndim else complex(out)


def hg_2d(k: int, l: int, x, y, geom: BeamGeometry = WAIST):
    if k < 0 or l < 0:
        raise ValueError("HG indices must be nonnegative")
    return hg_1d(k, x, geom) * hg_1d(l, y, geom)


def lg_first_order(sign: int, x, y, geom: BeamGeometry = WAIST):
    """First-order (p=0, m=sign) Laguerre-Gaussian mode as an HG superposition.

    At the waist this is proportional to ``(x + sign*1j*y) * exp(-(x^2+y^2)/2w^2)``,
    a charge ``sign`` vortex.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return (hg_2d(1, 0, x, y, geom) + sign * 1j * hg_2d(0, 1, x, y, geom)) / math.sqrt(2.0)


@dataclass(frozen=True)
class HG1D:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("mode order must be nonnegative")

    ndim = 1

    def __call__(self, x, geom=WAIST):
        return hg_1d(self.n, x, geom)


@dataclass(frozen=True)
class HG2D:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError("mode indices must be nonnegative")

    ndim = 2

    def __call__(self, x, y, geom=WAIST):
        return hg_2d(self.k, self.l, x, y, geom)


@dataclass(frozen=True)
class LG1:
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    ndim = 2

    def __call__(self, x, y, geom=WAIST):
        return lg_first_order(self.sign, x, y, geom)


def sample_mode(mode, axes, geom: BeamGeometry = WAIST) -> FieldGrid:
    """Evaluate ``mode`` (HG1D, HG2D or LG1) on the tensor grid spanned by ``axes``."""
    if isinstance(axes, Axis):
        axes = (axes,)
    axes = tuple(axes)
    if not axes:
        raise ValueError("no axes given")
    if len(axes) != mode.ndim:
        raise ValueError(f"{type(mode).__name__} needs {mode.ndim} axes, got {len(axes)}")
    pts = np.meshgrid(*(ax.coords for ax in axes), indexing="ij")
    return FieldGrid(axes, mode(*pts, geom=geom), {"mode": repr(mode)})
