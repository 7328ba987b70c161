"""Per-photon optical channels: lens Fourier stages, imaging telescopes and masks.

Stages act on one coordinate axis of a :class:`FieldGrid`, so the same code
propagates a single-photon field or one photon's coordinate of a sampled
two-photon amplitude. Lengths may be in any unit shared by the field
coordinates, focal lengths and wavelength.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import Axis, FieldGrid, fourier_transform_1d


class MaskWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FourierStage:
    """Thin lens with input and output planes at its focal planes.

    The output coordinate ``x'`` carries the input wavevector ``q = k x'/f``.
    ``out_axis`` optionally fixes the output sampling (evaluated by direct
    quadrature instead of an FFT).
    """

    focal_length: float
    wavelength: float
    out_axis: Axis | None = None
    guard: str = "raise"

    def __post_init__(self):
        if not (self.focal_length > 0 and self.wavelength > 0):
            raise ValueError("focal length and wavelength must be positive")

    @classmethod
    def dimensionless(cls, out_axis: Axis | None = None, guard: str = "raise") -> "FourierStage":
        """Stage whose output coordinate equals the input wavevector (k/f = 1)."""
        return cls(1.0, 2.0 * math.pi, out_axis, guard)

    @property
    def scale(self) -> float:
        return self.focal_length * self.wavelength / (2.0 * math.pi)

    def apply(self, fld: FieldGrid, axis: int = 0) -> FieldGrid:
        return apply_fourier_stage(fld, self.focal_length, self.wavelength, axis=axis,
                                   out_axis=self.out_axis, guard=self.guard)


@dataclass(frozen=True)
class ImagingStage:
    magnification: float = 1.0
    invert: bool = False

    def __post_init__(self):
        if self.magnification == 0 or not math.isfinite(self.magnification):
            raise ValueError("magnification must be finite and nonzero")

    @classmethod
    def telescope(cls, f_in: float, f_out: float) -> "ImagingStage":
        """Two confocal lenses: magnification ``f_out/f_in`` with image inversion."""
        return cls(f_out / f_in, invert=True)

    @property
    def signed_magnification(self) -> float:
        return -self.magnification if self.invert else self.magnification

    def apply(self, fld: FieldGrid, axis: int = 0) -> FieldGrid:
        return apply_imaging_stage(fld, self.magnification, self.invert, axis=axis)


@dataclass(frozen=True)
class GaussianMask:
    """Amplitude transmission ``exp(-(x - center)**2 / (2 width**2))``."""

    width: float
    center: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("mask width must be positive")

    def transmission(self, x: np.ndarray, step: float | None = None) -> np.ndarray:
        return np.exp(-0.5 * ((np.asarray(x) - self.center) / self.width) ** 2)

    def apply(self, fld: FieldGrid, axis: int = 0) -> FieldGrid:
        return apply_mask(fld, self, axis=axis)


@dataclass(frozen=True)
class SlitGeometry:
    """Two equal slits of ``slit_width`` whose centers are ``center_separation`` apart.

    Slit 1 is the one centered at ``center - center_separation/2``.
    """

    slit_width: float
    center_separation: float
    center: float = 0.0
    axis: int = 0

    def __post_init__(self):
        if not (self.slit_width > 0 and self.center_separation > 0):
            raise ValueError("slit width and separation must be positive")
        if self.center_separation <= self.slit_width:
            raise ValueError(
                f"slits overlap: separation {self.center_separation} <= width {self.slit_width}")

    @property
    def centers(self) -> tuple:
        h = 0.5 * self.center_separation
        return (self.center - h, self.center + h)

    def transmission(self, x: np.ndarray, step: float | None = None) -> np.ndarray:
        """Top-hat transmission; with ``step`` each sample gets its cell's open fraction."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in self.centers:
            lo, hi = c - 0.5 * self.slit_width, c + 0.5 * self.slit_width
            if step is None:
                out += (x >= lo) & (x <= hi)
            else:
                cover = np.minimum(x + 0.5 * step, hi) - np.maximum(x - 0.5 * step, lo)
                out += np.clip(cover / step, 0.0, 1.0)
        return out

    def apply(self, fld: FieldGrid, axis: int | None = None) -> FieldGrid:
        return apply_mask(fld, self, axis=self.axis if axis is None else axis)


def _axes_for(fld: FieldGrid, axis):
    return range(fld.ndim) if axis is None else (axis,)


def apply_fourier_stage(fld: FieldGrid, focal_length: float, wavelength: float, axis: int | None = None,
                        out_axis: Axis | None = None, guard: str = "raise") -> FieldGrid:
    """Field in the back focal plane of a lens, up to the dropped quadratic phase.

    ``E'(x') = (f/k)**-0.5 * F(k x'/f)`` with ``F`` the unitary transform of
    the input; L2 norm is preserved. ``axis=None`` transforms every axis.
    """
    scale = focal_length * wavelength / (2.0 * math.pi)
    out = fld
    for ax in _axes_for(fld, axis):
        qax = None if out_axis is None else out_axis.scaled(1.0 / scale)
        out = fourier_transform_1d(out, axis=ax, out_axis=qax, guard=guard,
                                   spectral_guard=out_axis is None)
        axes = list(out.axes)
        axes[ax] = out_axis if out_axis is not None else axes[ax].scaled(scale)
        dropped = out.meta.get("quadratic_phase_dropped", 0) + 1
        out = out.replace(axes=tuple(axes), values=out.values / math.sqrt(scale),
                          quadratic_phase_dropped=dropped)
    return out


def apply_imaging_stage(fld: FieldGrid, magnification: float, invert: bool = False,
                        axis: int | None = None) -> FieldGrid:
    """Map ``x -> m x`` (``m = -M`` when inverting) with amplitude ``1/sqrt|m|``."""
    if magnification == 0:
        raise ValueError("magnification must be nonzero")
    m = -magnification if invert else magnification
    axes = list(fld.axes)
    vals = fld.values
    for ax in _axes_for(fld, axis):
        axes[ax] = fld.axes[ax].scaled(m)
        if m < 0:
            vals = np.flip(vals, axis=ax)
        if abs(m) != 1:
            vals = vals / math.sqrt(abs(m))
    return fld.replace(axes=tuple(axes), values=vals)


def apply_mask(fld: FieldGrid, mask, axis: int | None = None) -> FieldGrid:
    """Multiply by a real transmission profile; the result is not renormalized.

    ``meta['surviving_fraction']`` holds the transmitted share of the input
    norm.
    """
    vals = fld.values
    for ax in _axes_for(fld, axis):
        a = fld.axes[ax]
        t = mask.transmission(a.coords, a.step)
        shape = [1] * fld.ndim
        shape[ax] = a.n
        vals = vals * t.reshape(shape)
    n_in = fld.norm2()
    n_out = float(np.sum(np.abs(vals) ** 2) * fld.cell_volume)
    frac = n_out / n_in if n_in > 0 else 0.0
    if frac < 1e-4:
        warnings.warn(f"mask transmits only {frac:.3g} of the field norm", MaskWarning, stacklevel=2)
    prior = fld.meta.get("surviving_fraction", 1.0)
    return fld.replace(values=vals, surviving_fraction=prior * frac)


@dataclass(frozen=True)
class OpticalChannel:
    """Ordered stages traversed by one photon."""

    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        kinds = (FourierStage, ImagingStage, GaussianMask, SlitGeometry)
        for el in self.elements:
            if not isinstance(el, kinds):
                raise TypeError(f"unsupported optical element {el!r}")
        if sum(isinstance(el, SlitGeometry) for el in self.elements) > 1:
            raise ValueError("at most one double slit per channel")

    def then(self, other: "OpticalChannel") -> "OpticalChannel":
        return OpticalChannel(self.elements + tuple(other.elements))

    @property
    def fourier_count(self) -> int:
        return sum(isinstance(el, FourierStage) for el in self.elements)

    @property
    def representation(self) -> str:
        """Representation reached at the output when the input is a position plane."""
        return "wavevector" if self.fourier_count % 2 else "position"

    def apply(self, fld: FieldGrid, axis: int = 0) -> FieldGrid:
        for el in self.elements:
            fld = el.apply(fld, axis)
        return fld

    def pullback(self, x_out: float):
        """Source coordinate and amplitude factor for an output point.

        Only defined for channels without Fourier stages.
        """
        if self.fourier_count:
            raise ValueError("cannot pull a point back through a Fourier stage")
        x = float(x_out)
        factor = 1.0
        for el in reversed(self.elements):
            if isinstance(el, ImagingStage):
                m = el.signed_magnification
                x /= m
                factor /= math.sqrt(abs(m))
            else:
                factor *= float(el.transmission(np.array([x]))[0])
        return x, factor


IDENTITY = OpticalChannel()


@dataclass(frozen=True)
class MapMeasurement:
    """Joint intensity over both output coordinates."""


@dataclass(frozen=True)
class FringeMeasurement:
    """Photon 1 held at each ``detector1`` position while photon 2 is scanned over ``detector2``."""

    detector1: tuple
    detector2: Axis
    source_axis: Axis | None = None

    def __post_init__(self):
        object.__setattr__(self, "detector1", tuple(float(p) for p in self.detector1))
        if not self.detector1:
            raise ValueError("need at least one detector-1 position")


def run_channel_pair(state, channel1: OpticalChannel, channel2: OpticalChannel, measurement,
                     axes: tuple | None = None):
    """Propagate photon 1 through ``channel1`` and photon 2 through ``channel2``.

    The x-part of the position amplitude is sampled on ``axes`` (default:
    centered 128-point axes spanning 6 widths) and each channel acts on its
    own photon's coordinate. A :class:`MapMeasurement` returns a
    :class:`CoincidenceMap`; a :class:`FringeMeasurement` returns one
    :class:`FringeScan` per detector-1 position.
    """
    from .biphoton import CoincidenceMap, MapAxis, default_axes, pair_position
    from .fringes import FringeScan

    n_pump = state.pump.mode[0]
    if isinstance(measurement, MapMeasurement):
        a1, a2 = axes if axes is not None else default_axes(state, "position")
        x1, x2 = np.meshgrid(a1.coords, a2.coords, indexing="ij")
        joint = FieldGrid((a1, a2), pair_position(n_pump, x1, x2, state.sigma, state.delta))
        out = channel2.apply(channel1.apply(joint, 0), 1)
        meta = {k: v for k, v in out.meta.items()}
        meta["path"] = "channels"
        return CoincidenceMap(MapAxis(1, channel1.representation, out.axes[0]),
                              MapAxis(2, channel2.representation, out.axes[1]),
                              np.abs(out.values) ** 2, meta)
    if isinstance(measurement, FringeMeasurement):
        src = measurement.source_axis
        if src is None:
            src = default_axes(state, "position", n=256)[1]
        elements = list(channel2.elements)
        last = max((i for i, el in enumerate(elements) if isinstance(el, FourierStage)), default=None)
        if last is None:
            raise ValueError("fringe measurement needs a Fourier stage before detector 2")
        el = elements[last]
        elements[last] = FourierStage(el.focal_length, el.wavelength, measurement.detector2, el.guard)
        ch2 = OpticalChannel(elements)
        scans = []
        for pos in measurement.detector1:
            x_src, factor = channel1.pullback(pos)
            g = FieldGrid((src,), factor * pair_position(n_pump, x_src, src.coords, state.sigma, state.delta))
            out = ch2.apply(g, 0)
            scans.append(FringeScan(out.axes[0].coords, np.abs(out.values) ** 2, pos,
                                    meta={"source_coordinate": x_src, "path": "numeric"}))
        return scans
    raise TypeError(f"unknown measurement {measurement!r}")
