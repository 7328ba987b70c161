"""Laboratory geometry of the non-local vortex measurement and its unit bridge.

The two-photon amplitude lives in dimensionless coordinates at the plane of
the Gaussian masks; one dimensionless unit corresponds to
``reference_waist_mm`` there. Photon 1 is imaged onto its detector by a
confocal telescope (f2, f3). For the fringe measurement photon 2 passes
lens f2 onto a double slit, and lens f3 Fourier-transforms the slit plane
onto detector 2. All lengths below are in millimetres.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .biphoton import BiphotonState, pair_mixed_analytic, pair_position
from .fringes import fit_scan, fraunhofer_double_slit
from .grid import Axis, FieldGrid
from .optics import (FourierStage, FringeMeasurement, ImagingStage, OpticalChannel, SlitGeometry,
                     apply_fourier_stage, run_channel_pair)


@dataclass(frozen=True)
class LabGeometry:
    wavelength_mm: float = 884e-6
    f1_mm: float = 100.0
    f2_mm: float = 150.0
    f3_mm: float = 50.0
    f4_mm: float = 250.0
    # single-photon width at the mask plane; chosen so the default
    # detector-1 offsets land near the slit radius in the mixed plane
    reference_waist_mm: float = 0.25
    slit_width_mm: float = 0.100
    slit_separation_mm: float = 0.200
    detector1_mm: tuple = (0.2, 0.4)
    # detector-1 stage reading that images the vortex core
    detector1_center_mm: float = 0.3
    scan_half_width_mm: float = 0.4
    scan_samples: int = 161
    slit_plane_samples: int = 4096

    def __post_init__(self):
        for name in ("wavelength_mm", "f1_mm", "f2_mm", "f3_mm", "f4_mm", "reference_waist_mm",
                     "slit_width_mm", "slit_separation_mm", "scan_half_width_mm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "detector1_mm", tuple(float(p) for p in self.detector1_mm))

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength_mm

    @property
    def slits(self) -> SlitGeometry:
        return SlitGeometry(self.slit_width_mm, self.slit_separation_mm)

    @property
    def screen(self) -> Axis:
        return Axis.symmetric(self.scan_samples, self.scan_half_width_mm)

    @property
    def fringe_period_mm(self) -> float:
        return self.wavelength_mm * self.f3_mm / self.slit_separation_mm

    def photon1_channel(self) -> OpticalChannel:
        """Mask plane (dimensionless) to detector 1 (mm, stage reading minus core offset)."""
        return OpticalChannel((ImagingStage(self.reference_waist_mm),
                               ImagingStage.telescope(self.f2_mm, self.f3_mm)))

    def slit_plane_axis(self) -> Axis:
        reach = 0.5 * self.slit_separation_mm + self.slit_width_mm
        return Axis.symmetric(self.slit_plane_samples, reach)

    def photon2_fringe_channel(self) -> OpticalChannel:
        return OpticalChannel((ImagingStage(self.reference_waist_mm),
                               FourierStage(self.f2_mm, self.wavelength_mm, self.slit_plane_axis()),
                               self.slits,
                               FourierStage(self.f3_mm, self.wavelength_mm, self.screen)))

    def source_rho(self, detector1_mm: float) -> float:
        """Dimensionless photon-1 coordinate seen by detector 1 at a stage reading."""
        return self.photon1_source(detector1_mm)[0]

    def photon1_source(self, detector1_mm: float):
        """Source coordinate and amplitude factor (imaging Jacobian) for detector 1."""
        return self.photon1_channel().pullback(detector1_mm - self.detector1_center_mm)

    def slit_q(self) -> tuple:
        """Dimensionless photon-2 wavevectors at the two slit centers."""
        return tuple(c * self.k * self.reference_waist_mm / self.f2_mm for c in self.slits.centers)


def predicted_dphi(state: BiphotonState, rho1: float, geom: LabGeometry) -> float:
    """Slit phase difference from the closed-form mixed amplitude at the slit centers."""
    q1, q2 = geom.slit_q()
    n = state.pump.mode[0]
    a1 = pair_mixed_analytic(n, rho1, q1, state.sigma)
    a2 = pair_mixed_analytic(n, rho1, q2, state.sigma)
    return float(np.angle(a1) - np.angle(a2))


def predicted_shift(state: BiphotonState, geom: LabGeometry, positions=None) -> float:
    """Fringe shift in periods between the first two detector-1 positions."""
    pa, pb = (positions or geom.detector1_mm)[:2]
    d = predicted_dphi(state, geom.source_rho(pa), geom) - predicted_dphi(state, geom.source_rho(pb), geom)
    return wrap_periods(d / (2.0 * math.pi))


def wrap_periods(v: float) -> float:
    """Wrap into (-1/2, 1/2]."""
    return -((-v + 0.5) % 1.0 - 0.5)


def _conditional_photon2(state: BiphotonState, rho1: float, n: int = 512) -> FieldGrid:
    half = 8.0 * max(state.sigma, state.delta) + abs(rho1)
    ax = Axis.symmetric(n, half)
    return FieldGrid((ax,), pair_position(state.pump.mode[0], rho1, ax.coords, state.sigma, state.delta))


def slit_amplitudes(state: BiphotonState, rho1: float, geom: LabGeometry):
    """Photon-2 amplitudes at the slit centers given photon 1 at ``rho1``.

    Computed by numerically propagating the conditional photon-2 field
    through lens f2, so it is valid for any pump and widths.
    """
    g = _conditional_photon2(state, rho1)
    g = ImagingStage(geom.reference_waist_mm).apply(g, 0)
    c1, c2 = geom.slits.centers
    out = apply_fourier_stage(g, geom.f2_mm, geom.wavelength_mm, axis=0, out_axis=Axis(c1, c2, 2))
    return complex(out.values[0]), complex(out.values[1])


def model_scans(state: BiphotonState, geom: LabGeometry, positions=None, fit: bool = True) -> list:
    """Fringe-law scans (slit-center amplitudes, sinc**2 envelope), one per detector-1 position."""
    scans = []
    for pos in positions or geom.detector1_mm:
        rho, factor = geom.photon1_source(pos)
        a1, a2 = (factor * a for a in slit_amplitudes(state, rho, geom))
        scan = fraunhofer_double_slit(a1, a2, geom.slits, geom.screen.coords, geom.wavelength_mm,
                                      geom.f3_mm, detector1=pos)
        scan.meta["source_rho"] = rho
        scans.append(fit_scan(scan) if fit else scan)
    return scans


def numeric_scans(state: BiphotonState, geom: LabGeometry, positions=None, fit: bool = True) -> list:
    """Brute-force scans: the sampled amplitude propagated through both channels."""
    meas = FringeMeasurement(tuple(p - geom.detector1_center_mm for p in (positions or geom.detector1_mm)),
                             geom.screen, Axis.symmetric(512, 8.0 * max(state.sigma, state.delta) + 4.0))
    scans = run_channel_pair(state, geom.photon1_channel(), geom.photon2_fringe_channel(), meas)
    out = []
    for scan, pos in zip(scans, positions or geom.detector1_mm):
        scan.detector1 = pos
        out.append(fit_scan(scan) if fit else scan)
    return out


def to_mixed_plane_mm(geom: LabGeometry, rho1, q2):
    """Detector coordinates (mm) of a mixed-plane point: photon 1 imaged, photon 2 through f4."""
    x1 = -rho1 * geom.reference_waist_mm * geom.f3_mm / geom.f2_mm
    x2 = q2 * geom.f4_mm / (geom.k * geom.reference_waist_mm)
    return x1, x2
