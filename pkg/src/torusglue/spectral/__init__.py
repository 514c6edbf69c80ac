"""Linearized operators at vortex backgrounds and the model operator."""
from .canonical import (
    AsymptoticsFit,
    asymptotic_coefficients,
    cylinder_asymptotics_fit,
    pi_c,
    pi_c_decay_rate,
    pi_c_residual,
)
from .model import ModelOperatorO, SpectralReport, model_spectrum, zero_mode_eigenvectors
from .theta import (
    KernelSpectrum,
    Section2D,
    SpectralError,
    ThetaOperator,
    cokernel_gap,
    gaussian_section,
    inner,
    kernel_count,
    kernel_decay_csv,
    kernel_decay_rates,
    kernel_spectrum,
    reference_gap,
    theta_adjoint_apply,
    theta_apply,
    weitzenbock_residual,
)

__all__ = [
    "AsymptoticsFit",
    "KernelSpectrum",
    "ModelOperatorO",
    "Section2D",
    "SpectralError",
    "SpectralReport",
    "ThetaOperator",
    "asymptotic_coefficients",
    "cokernel_gap",
    "cylinder_asymptotics_fit",
    "gaussian_section",
    "inner",
    "kernel_count",
    "kernel_decay_csv",
    "kernel_decay_rates",
    "kernel_spectrum",
    "model_spectrum",
    "pi_c",
    "pi_c_decay_rate",
    "pi_c_residual",
    "reference_gap",
    "theta_adjoint_apply",
    "theta_apply",
    "weitzenbock_residual",
    "zero_mode_eigenvectors",
]
