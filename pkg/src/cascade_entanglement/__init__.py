"""Spectral entanglement toolkit for multiphoton sources from cascaded atomic ensembles."""
from .fwm import FwmGeometry, SolverError, residual, small_angle_approx, solve_angles
from .projector import AmplitudeGrid, AmplitudeGrid2D, AmplitudeGrid3D, GridSpec, make_grid, project, slice_3d
from .schmidt import (
    SchmidtResult,
    converge_entropy,
    decompose,
    entropy,
    kernel_eigenvalues,
    normalize,
    reconstruct,
)
from .spectral import (
    Route,
    SpectralParams,
    amplitude,
    effective_pulse_width,
    eval_biphoton,
    eval_four_photon,
    eval_three_photon,
)

__version__ = "0.1.0"
