"""Non-local optical vortices in spatially entangled photon pairs.

Hermite-Gaussian modes, the SPDC pair amplitude in position and mixed
position-wavevector representations, paraxial optical channels with
double-slit read-out, and phase-singularity analysis.
"""
__version__ = "0.1.0"

from .biphoton import (BiphotonState, CoincidenceMap, PhaseMatchSpec, PumpSpec, amplitude_map,
                       apply_apertures, partial_fourier_numeric, prob_map, psi_mixed, psi_position,
                       sample_counts, schmidt_decompose)
from .experiment import LabGeometry, model_scans, numeric_scans, predicted_shift
from .fringes import FringeFit, FringeScan, fit_fringes, fraunhofer_double_slit
from .gauss_modes import HG1D, HG2D, LG1, BeamGeometry, hg_1d, hg_2d, lg_first_order, sample_mode
from .grid import Axis, FieldGrid, fourier_transform_1d, inverse_fourier_transform_1d
from .optics import (FourierStage, GaussianMask, ImagingStage, OpticalChannel, SlitGeometry,
                     apply_fourier_stage, apply_imaging_stage, apply_mask, run_channel_pair)
from .vortex import fringe_shift, locate_singularities, separability_test, winding_number

__all__ = [
    "amplitude_map",
    "apply_apertures",
    "apply_fourier_stage",
    "apply_imaging_stage",
    "apply_mask",
    "Axis",
    "BeamGeometry",
    "BiphotonState",
    "CoincidenceMap",
    "FieldGrid",
    "fit_fringes",
    "fourier_transform_1d",
    "FourierStage",
    "fraunhofer_double_slit",
    "fringe_shift",
    "FringeFit",
    "FringeScan",
    "GaussianMask",
    "HG1D",
    "HG2D",
    "hg_1d",
    "hg_2d",
    "ImagingStage",
    "inverse_fourier_transform_1d",
    "LabGeometry",
    "LG1",
    "lg_first_order",
    "locate_singularities",
    "model_scans",
    "numeric_scans",
    "OpticalChannel",
    "partial_fourier_numeric",
    "PhaseMatchSpec",
    "predicted_shift",
    "prob_map",
    "psi_mixed",
    "psi_position",
    "PumpSpec",
    "run_channel_pair",
    "sample_counts",
    "sample_mode",
    "schmidt_decompose",
    "separability_test",
    "SlitGeometry",
    "winding_number",
]
