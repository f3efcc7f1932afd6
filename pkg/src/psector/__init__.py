"""Explicit p-harmonic functions and p-harmonic measure in planar sectors."""

from .exponent import (
    DomainError,
    PExponent,
    RadialExponent,
    SectorSpec,
    conjugate_exponent,
    dk_dnu,
    dk_dp,
    exponent_condition_residual,
    radial_exponent,
    radial_exponent_full,
    radial_exponent_inf,
    radial_exponent_roots,
)
from .measure import (
    MeasureProblem,
    MeasureSolution,
    SlopeFit,
    comparability_constants,
    fit_slope,
    mc_harmonic_measure,
    solve_measure,
)
from .pde import (
    ResidualReport,
    inf_lap_residual,
    inf_separation_residual,
    polar_plap_residual,
    separation_residual,
)
from .profile import (
    AngleMap,
    AngularProfile,
    PolarPoint,
    ProfileInvariantError,
    build_profile,
    eval_f,
    eval_f_p2,
    eval_fprime,
    eval_u,
    phi_of_theta,
    stream_conjugate,
    theta_of_phi,
    write_profile_csv,
)

__version__ = "1.0.0"

__all__ = [
    "AngleMap",
    "AngularProfile",
    "DomainError",
    "MeasureProblem",
    "MeasureSolution",
    "PExponent",
    "PolarPoint",
    "ProfileInvariantError",
    "RadialExponent",
    "ResidualReport",
    "SectorSpec",
    "SlopeFit",
    "build_profile",
    "comparability_constants",
    "conjugate_exponent",
    "dk_dnu",
    "dk_dp",
    "eval_f",
    "eval_f_p2",
    "eval_fprime",
    "eval_u",
    "exponent_condition_residual",
    "fit_slope",
    "inf_lap_residual",
    "inf_separation_residual",
    "mc_harmonic_measure",
    "phi_of_theta",
    "polar_plap_residual",
    "radial_exponent",
    "radial_exponent_full",
    "radial_exponent_inf",
    "radial_exponent_roots",
    "separation_residual",
    "solve_measure",
    "stream_conjugate",
    "theta_of_phi",
    "write_profile_csv",
]
