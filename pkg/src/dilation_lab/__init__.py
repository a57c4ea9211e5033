"""Hermitian dilations of PT-symmetric qubits and their Bell correlations."""

from __future__ import annotations

from .dilation import (
    ZERO,
    DilatedHamiltonian,
    Perturbation,
    build_general_dilation,
    build_special_dilation,
    compute_perp,
    verify_dilation,
)
from .distinguish import DistinguishReport, GenuineVerdict, LocalVerdict, classify
from .dynamics import evolve_check, sample_bell, sample_expectation
from .errors import DilationLabError, InternalInconsistency, ValidationError
from .numerics import general_eig2, herm_eig, mat_exp_herm
from .pictures import Basis, GenuineAngles, Picture, PictureResult, Probabilities, all_pictures
from .pt_model import LocalState, MetricTau, PTParams, make_pt_hamiltonian, make_tau
from .spectra import SpectralData, spectral_data

__version__ = "0.1.0"

__all__ = [
    "ZERO",
    "Basis",
    "DilatedHamiltonian",
    "DilationLabError",
    "DistinguishReport",
    "GenuineAngles",
    "GenuineVerdict",
    "InternalInconsistency",
    "LocalState",
    "LocalVerdict",
    "MetricTau",
    "PTParams",
    "Perturbation",
    "Picture",
    "PictureResult",
    "Probabilities",
    "SpectralData",
    "ValidationError",
    "all_pictures",
    "build_general_dilation",
    "build_special_dilation",
    "classify",
    "compute_perp",
    "evolve_check",
    "general_eig2",
    "herm_eig",
    "make_pt_hamiltonian",
    "make_tau",
    "mat_exp_herm",
    "sample_bell",
    "sample_expectation",
    "spectral_data",
    "verify_dilation",
]
