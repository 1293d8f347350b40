"""Finite-gap defocusing NLS backgrounds, direct scattering, and long-time
asymptotics with Painleve XXXIV transition corrections."""

from .spectrum import BandSpectrum, evaluate_w, validate_spectrum
from .surface import SurfaceData, ThetaParams, build_surface, theta
from .phase import (
    PhaseData,
    SaddleResult,
    classify_region,
    local_coefficients,
    saddle_point,
    solve_phase_polynomials,
    theta_phase,
)
from .background import (
    BackgroundEvaluator,
    build_background,
    global_parametrix,
    mu_ag,
    psi_ag,
    q_ag,
)
from .scattering import (
    PerturbedInitialData,
    ScatteringData,
    build_scattering_data,
    perturbation_profile,
    r0_and_betas,
    reflections,
    scatter,
    synthetic_reflection,
)
from .deltas import DeltaData, build_delta, delta_eval
from .painleve34 import P34Table, a_of_s, solve_p34
from .asymptotics import AsymptoticBundle, AsymptoticResult, asymptote, h_coefficients
from .nls_direct import (
    FieldSnapshot,
    SimulationConfig,
    evolve,
    make_initial,
    nls_residual,
)

__version__ = "0.1.0"

__all__ = [
    "BandSpectrum", "validate_spectrum", "evaluate_w",
    "SurfaceData", "ThetaParams", "build_surface", "theta",
    "PhaseData", "SaddleResult", "solve_phase_polynomials", "theta_phase",
    "saddle_point", "classify_region", "local_coefficients",
    "BackgroundEvaluator", "build_background", "q_ag", "mu_ag", "psi_ag",
    "global_parametrix",
    "PerturbedInitialData", "ScatteringData", "scatter", "reflections",
    "build_scattering_data", "synthetic_reflection", "perturbation_profile",
    "r0_and_betas",
    "DeltaData", "build_delta", "delta_eval",
    "P34Table", "solve_p34", "a_of_s",
    "AsymptoticBundle", "AsymptoticResult", "asymptote", "h_coefficients",
    "SimulationConfig", "FieldSnapshot", "evolve", "make_initial",
    "nls_residual",
    "__version__",
]
