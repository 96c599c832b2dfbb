"""Finite-volume solver for scalar conservation laws with random discontinuous flux coefficients."""

from ._jumpflux import (
    CovarianceSpec,
    Coefficient,
    Interval,
    KLBasis,
    Mesh,
    Solution,
    SolverConfig,
    build_mesh,
    burgers_godunov_flux,
    constant_coefficient,
    fit_rate,
    matern_kernel,
    nystrom_eigenpairs,
    preset_ids,
    run_convergence,
    sample_coefficient,
    sine_initial_state,
    solve,
    total_mass,
)

__all__ = [
    "CovarianceSpec",
    "Coefficient",
    "Interval",
    "KLBasis",
    "Mesh",
    "Solution",
    "SolverConfig",
    "build_mesh",
    "burgers_godunov_flux",
    "constant_coefficient",
    "fit_rate",
    "matern_kernel",
    "nystrom_eigenpairs",
    "preset_ids",
    "run_convergence",
    "sample_coefficient",
    "sine_initial_state",
    "solve",
    "total_mass",
]
