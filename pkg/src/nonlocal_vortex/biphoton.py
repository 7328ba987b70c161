"""SPDC two-photon amplitude with a structured pump and Gaussian phase matching.

In position space the pair amplitude is ``E(r1 + r2) * G(r1 - r2)`` with the
pump profile ``E`` (HG mode of width ``sigma``) and the phase-matching
function ``G`` (Gaussian of width ``delta``). Both factors separate into x and
y parts, so every quantity here is built from the one-dimensional *pair
function*::

    f_n(a1, a2) = sqrt(2) u_n(a1 + a2; sigma) u_0(a1 - a2; delta)

which is unit-normalized over ``(a1, a2)``. The mixed representation takes
the unitary Fourier transform over photon 2's coordinate. When ``sigma ==
delta`` it has the closed form (single-photon width ``w = sigma/sqrt(2)``)::

    f_0(x1, q2) = u_0(x1; w) u_0(q2; 1/w)
    f_1(x1, q2) = [u_1(x1; w) u_0(q2; 1/w) - i u_0(x1; w) u_1(q2; 1/w)] / sqrt(2)

The ``-i`` comes from the ``exp(-i q x)`` kernel, so the non-local vortex in
the ``(x1, q2)`` plane has charge -1 with ``x1`` as the first axis.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gauss_modes import BeamGeometry, hg_1d
from .grid import Axis, FieldGrid, fourier_transform_1d

SQRT2 = math.sqrt(2.0)
POSITION = "position"
MIXED = "mixed"
PLANES = (POSITION, MIXED)
ANALYTIC_RTOL = 1e-9


class AnalyticFormError(ValueError):
    """Closed-form mixed amplitude requested for unequal pump and phase-matching widths."""


class SchmidtTruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PumpSpec:
    mode: tuple = (1, 0)
    width: float = SQRT2

    def __post_init__(self):
        object.__setattr__(self, "mode", tuple(int(m) for m in self.mode))
        if self.mode not in ((1, 0), (0, 0)):
            raise ValueError(f"supported pump modes are (1, 0) and (0, 0), got {self.mode}")
        if not self.width > 0:
            raise ValueError("pump width must be positive")


@dataclass(frozen=True)
class PhaseMatchSpec:
    width: float = SQRT2

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("phase-matching width must be positive")


@dataclass(frozen=True)
class BiphotonState:
    pump: PumpSpec = PumpSpec()
    pm: PhaseMatchSpec = PhaseMatchSpec()

    @classmethod
    def hg10(cls, width: float = SQRT2, delta: float | None = None) -> "BiphotonState":
        return cls(PumpSpec((1, 0), width), PhaseMatchSpec(width if delta is None else delta))

    @classmethod
    def gaussian(cls, width: float = SQRT2, delta: float | None = None) -> "BiphotonState":
        return cls(PumpSpec((0, 0), width), PhaseMatchSpec(width if delta is None else delta))

    @property
    def sigma(self) -> float:
        return self.pump.width

    @property
    def delta(self) -> float:
        return self.pm.width

    @property
    def widths_matched(self) -> bool:
        return abs(self.sigma - self.delta) <= ANALYTIC_RTOL * self.sigma

    @property
    def photon_width(self) -> float:
        """Single-photon position width when the widths are matched."""
        return self.sigma / SQRT2


def pair_position(n: int, a1, a2, sigma: float, delta: float):
    """Normalized 1D pair function ``sqrt(2) u_n(a1+a2; sigma) u_0(a1-a2; delta)``."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    return SQRT2 * hg_1d(n, a1 + a2, BeamGeometry(sigma)) * hg_1d(0, a1 - a2, BeamGeometry(delta))


def pair_mixed_analytic(n: int, x1, q2, sigma: float):
    w = sigma / SQRT2
    gx, gq = BeamGeometry(w), BeamGeometry(1.0 / w)
    if n == 0:
        return hg_1d(0, x1, gx) * hg_1d(0, q2, gq)
    if n == 1:
        return (hg_1d(1, x1, gx) * hg_1d(0, q2, gq)
                - 1j * hg_1d(0, x1, gx) * hg_1d(1, q2, gq)) / SQRT2
    raise ValueError(f"no closed form for pump order {n}")


def _x2_quadrature_axis(sigma, delta, x1_extent, q_extent):
    narrow = min(sigma, delta)
    half = x1_extent + 8.0 * max(sigma, delta)
    step = min(narrow / 10.0, np.pi / (q_extent + 10.0 / narrow))
    n = int(math.ceil(2.0 * half / step)) + 1
    return Axis.symmetric(n, half)


def pair_mixed_numeric(n: int, x1, q2, sigma: float, delta: float):
    """Pair function Fourier transformed over ``a2`` by direct quadrature, pointwise."""
    x1, q2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(q2, float))
    flat1, flatq = x1.ravel(), q2.ravel()
    ext1 = float(np.max(np.abs(flat1))) if flat1.size else 0.0
    extq = float(np.max(np.abs(flatq))) if flatq.size else 0.0
    x2 = _x2_quadrature_axis(sigma, delta, ext1, extq)
    xs = x2.coords
    out = np.empty(flat1.shape, dtype=complex)
    scale = x2.step / math.sqrt(2.0 * math.pi)
    for chunk in np.array_split(np.arange(flat1.size), max(1, flat1.size // 4096)):
        f = pair_position(n, flat1[chunk, None], xs[None, :], sigma, delta)
        out[chunk] = np.sum(f * np.exp(-1j * flatq[chunk, None] * xs[None, :]), axis=1) * scale
    return out.reshape(x1.shape)


def psi_position(state: BiphotonState, rho1, rho2):
    """Two-photon amplitude at transverse positions ``rho1 = (x1, y1)``, ``rho2 = (x2, y2)``."""
    (x1, y1), (x2, y2) = rho1, rho2
    kx, ly = state.pump.mode
    return (pair_position(kx, x1, x2, state.sigma, state.delta)
            * pair_position(ly, y1, y2, state.sigma, state.delta))


def psi_mixed(state: BiphotonState, rho1, q2, numeric: bool = False):
    """Amplitude with photon 1 in position and photon 2 in wavevector representation.

    Uses the closed form when the widths are matched. Otherwise raises
    :class:`AnalyticFormError` unless ``numeric`` is set, in which case the
    transform over photon 2 is done by quadrature.
    """
    (x1, y1), (qx, qy) = rho1, q2
    kx, ly = state.pump.mode
    if state.widths_matched:
        return (pair_mixed_analytic(kx, x1, qx, state.sigma)
                * pair_mixed_analytic(ly, y1, qy, state.sigma))
    if not numeric:
        raise AnalyticFormError(
            f"closed-form mixed amplitude needs sigma == delta (got {state.sigma}, {state.delta})")
    return (pair_mixed_numeric(kx, x1, qx, state.sigma, state.delta)
            * pair_mixed_numeric(ly, y1, qy, state.sigma, state.delta))


def partial_fourier_numeric(state: BiphotonState, x1_axis: Axis, x2_axis: Axis,
                            q_axis: Axis | None = None, guard: str = "raise") -> FieldGrid:
    """x-part of the mixed amplitude from a sampled position amplitude.

    Samples ``f(x1, x2)`` on ``x1_axis x x2_axis`` and transforms along x2
    with :func:`fourier_transform_1d` (FFT conjugate axis unless ``q_axis``
    is given). The y-part is a normalized factor that integrates to 1 and is
    not sampled.
    """
    n = state.pump.mode[0]
    x1, x2 = np.meshgrid(x1_axis.coords, x2_axis.coords, indexing="ij")
    pos = FieldGrid((x1_axis, x2_axis), pair_position(n, x1, x2, state.sigma, state.delta))
    out = fourier_transform_1d(pos, axis=1, out_axis=q_axis, guard=guard)
    out.meta.update(representation=("position", "wavevector"), y_marginal=1.0)
    return out


@dataclass(frozen=True)
class MapAxis:
    photon: int
    representation: str
    axis: Axis

    @property
    def label(self) -> str:
        sym = "rho" if self.representation == "position" else "q"
        return f"{sym}_x{self.photon}"


@dataclass
class CoincidenceMap:
    """Joint detection probability density (or counts) on a non-local plane.

    ``values[i, j]`` sits at ``(axis1.coords[i], axis2.coords[j])``.
    """

    axis1: MapAxis
    axis2: MapAxis
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.axis1.axis.n, self.axis2.axis.n):
            raise ValueError("map values do not match axes")
        if np.iscomplexobj(self.values) or np.any(self.values < 0):
            raise ValueError("coincidence map values must be real and nonnegative")

    @property
    def cell_area(self) -> float:
        return self.axis1.axis.step * self.axis2.axis.step

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cell_area)

    def value_at(self, a: float, b: float) -> float:
        return float(self.values[self.axis1.axis.index_of(a), self.axis2.axis.index_of(b)])

    def as_field(self) -> FieldGrid:
        return FieldGrid((self.axis1.axis, self.axis2.axis), self.values.astype(complex), dict(self.meta))


def default_axes(state: BiphotonState, plane: str, n: int = 128, span: float = 6.0):
    """Centered axes spanning ``span`` single-photon widths on each side."""
    if plane == POSITION:
        half = span * max(state.sigma, state.delta)
        return Axis.centered(n, half), Axis.centered(n, half)
    w = state.photon_width if state.widths_matched else min(state.sigma, state.delta) / SQRT2
    wide = max(state.sigma, state.delta) / SQRT2
    return Axis.centered(n, span * wide), Axis.centered(n, span / w)


def amplitude_map(state: BiphotonState, plane: str, axis1: Axis | None = None,
                  axis2: Axis | None = None, n: int = 128) -> FieldGrid:
    """Complex x-part of the pair amplitude over ``(x1, x2)`` or ``(x1, q2)``.

    ``meta["path"]`` is ``"analytic"`` for closed-form evaluation and
    ``"numeric"`` when the mixed plane needs a quadrature transform.
    """
    if plane not in PLANES:
        raise ValueError(f"unknown plane {plane!r}; expected one of {PLANES}")
    if axis1 is None or axis2 is None:
        d1, d2 = default_axes(state, plane, n)
        axis1 = axis1 or d1
        axis2 = axis2 or d2
    x1, x2 = np.meshgrid(axis1.coords, axis2.coords, indexing="ij")
    kx = state.pump.mode[0]
    meta = {"plane": plane, "sigma": state.sigma, "delta": state.delta, "pump": state.pump.mode}
    if plane == POSITION:
        amp = pair_position(kx, x1, x2, state.sigma, state.delta)
        meta["path"] = "analytic"
    elif state.widths_matched:
        amp = pair_mixed_analytic(kx, x1, x2, state.sigma)
        meta["path"] = "analytic"
    else:
        ext = max(abs(axis1.start), abs(axis1.stop))
        qext = max(abs(axis2.start), abs(axis2.stop))
        x2ax = _x2_quadrature_axis(state.sigma, state.delta, ext, qext)
        amp = partial_fourier_numeric(state, axis1, x2ax, q_axis=axis2).values
        meta["path"] = "numeric"
    return FieldGrid((axis1, axis2), np.asarray(amp, dtype=complex), meta)


def prob_map(state: BiphotonState, plane: str, axis1: Axis | None = None,
             axis2: Axis | None = None, n: int = 128) -> CoincidenceMap:
    """Probability density over ``(x1, x2)`` or ``(x1, q2)`` with y integrated out.

    The y factor of the amplitude is a normalized pair function independent
    of x, so integrating over it contributes exactly 1.
    """
    amp = amplitude_map(state, plane, axis1, axis2, n)
    second = "position" if plane == POSITION else "wavevector"
    ax1, ax2 = amp.axes
    return CoincidenceMap(MapAxis(1, "position", ax1), MapAxis(2, second, ax2),
                          np.abs(amp.values) ** 2, dict(amp.meta))


def _tophat_kernel(width: float, step: float) -> np.ndarray:
    half = 0.5 * width / step
    m = int(math.ceil(half - 0.5))
    offs = np.arange(-m, m + 1, dtype=float)
    # fractional coverage of each cell by the aperture [-half, half]
    k = np.clip(np.minimum(offs + 0.5, half) - np.maximum(offs - 0.5, -half), 0.0, None)
    return k / k.sum()


def apply_apertures(cmap: CoincidenceMap, width1: float = 0.0, width2: float = 0.0) -> CoincidenceMap:
    """Average the map over finite top-hat detector apertures (widths in axis units)."""
    vals = np.asarray(cmap.values, dtype=float)
    for ax_i, (width, ax) in enumerate(((width1, cmap.axis1.axis), (width2, cmap.axis2.axis))):
        if width <= 0:
            continue
        kern = _tophat_kernel(width, ax.step)
        vals = np.apply_along_axis(np.convolve, ax_i, vals, kern, mode="same")
    meta = dict(cmap.meta, apertures=(width1, width2))
    return CoincidenceMap(cmap.axis1, cmap.axis2, np.clip(vals, 0.0, None), meta)


@dataclass(frozen=True)
class SchmidtTerm:
    coefficient: float
    mode1: int
    mode2: int


@dataclass
class SchmidtSpectrum:
    terms: list
    truncated_weight: float
    method: str

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])

    def schmidt_number(self, tol: float = 1e-6) -> int:
        return int(np.sum(self.coefficients > tol))

    def entropy(self) -> float:
        return entanglement_entropy(self.coefficients)


def entanglement_entropy(coefficients) -> float:
    """Von Neumann entropy in bits of a pure state with the given Schmidt coefficients."""
    p = np.asarray(coefficients, dtype=float) ** 2
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def schmidt_from_amplitude(values: np.ndarray, cell_area: float = 1.0, cutoff: int | None = None,
                           normalize: bool = True):
    """Singular values of a sampled bipartite amplitude, scaled to Schmidt coefficients."""
    s = np.linalg.svd(np.asarray(values) * math.sqrt(cell_area), compute_uv=False)
    if normalize:
        total = math.sqrt(float(np.sum(s ** 2)))
        if total > 0:
            s = s / total
    if cutoff is not None:
        return s[:cutoff], float(np.sum(s[cutoff:] ** 2))
    return s, 0.0


def schmidt_decompose(state: BiphotonState, cutoff: int = 8, n: int = 256,
                      tol: float = 1e-12) -> SchmidtSpectrum:
    """Schmidt spectrum of the x-part of the pair amplitude.

    Matched widths use the closed form (modes are HG orders of each photon);
    otherwise the sampled position amplitude is decomposed by SVD and modes
    are numbered by rank.
    """
    if cutoff < 2:
        raise ValueError("Schmidt cutoff must be at least 2")
    if state.widths_matched:
        if state.pump.mode[0] == 1:
            c = 1.0 / SQRT2
            terms = [SchmidtTerm(c, 1, 0), SchmidtTerm(c, 0, 1)]
        else:
            terms = [SchmidtTerm(1.0, 0, 0)]
        return SchmidtSpectrum(terms, 0.0, "analytic")
    half = 7.0 * max(state.sigma, state.delta)
    ax = Axis.centered(n, half)
    x1, x2 = np.meshgrid(ax.coords, ax.coords, indexing="ij")
    amp = pair_position(state.pump.mode[0], x1, x2, state.sigma, state.delta)
    s, truncated = schmidt_from_amplitude(amp, ax.step ** 2, cutoff)
    if truncated > 1e-6:
        warnings.warn(f"Schmidt cutoff {cutoff} drops weight {truncated:.3g}",
                      SchmidtTruncationWarning, stacklevel=2)
    terms = [SchmidtTerm(float(v), i, i) for i, v in enumerate(s) if v > tol]
    return SchmidtSpectrum(terms, truncated, "svd")


def sample_counts(cmap: CoincidenceMap, total_events: int, seed: int) -> CoincidenceMap:
    """Poisson coincidence counts with mean ``total_events * P * cell_area`` per cell.

    Draws come from a Philox (counter-based) stream keyed by ``seed`` and
    consumed in row-major cell order, so output depends only on the inputs.
    """
    if int(total_events) != total_events or total_events <= 0:
        raise ValueError("total_events must be a positive integer")
    mean = np.asarray(cmap.values, dtype=float) * cmap.cell_area * total_events
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    counts = rng.poisson(mean)
    meta = dict(cmap.meta, counts=True, total_events=int(total_events), seed=int(seed))
    return CoincidenceMap(cmap.axis1, cmap.axis2, counts.astype(np.int64), meta)
