"""Integral operators: synthesis, analysis, their composite, constants and diagnostics."""

from .admissibility import (
    AdmissibilityError,
    admissibility_constant,
    default_omega_grid,
    matched_rho,
    resolve_activation,
)
from .diagnostics import intertwine_check_R, intertwine_check_S, kernel_l2_diagnostic
from .functions import ParamDistribution, SampledFunction, gaussian_bump, gaussian_target, zero_target
from .gcn import (
    equivariant_target,
    fcn_translate,
    gcn_network_apply,
    gcn_reconstruction,
    gcn_ridgelet_apply,
)
from .operators import (
    Reconstruction,
    duality_gap,
    network_apply,
    rayleigh_constant,
    reconstruct,
    ridgelet_apply,
    ridgelet_distribution,
    uniform_residual,
)

__all__ = [
    "AdmissibilityError", "ParamDistribution", "Reconstruction", "SampledFunction",
    "admissibility_constant", "default_omega_grid", "duality_gap", "equivariant_target",
    "fcn_translate", "gaussian_bump", "gaussian_target", "gcn_network_apply", "gcn_reconstruction",
    "gcn_ridgelet_apply", "intertwine_check_R", "intertwine_check_S", "kernel_l2_diagnostic",
    "matched_rho", "network_apply", "rayleigh_constant", "reconstruct", "resolve_activation",
    "ridgelet_apply", "ridgelet_distribution", "uniform_residual", "zero_target",
]
