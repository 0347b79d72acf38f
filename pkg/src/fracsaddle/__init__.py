"""Spectral tools for fractional Choquard groundstates and symmetric saddles.

The package solves (-Delta)^s u + u = (K_alpha * |u|^p) |u|^(p-2) u on a
periodic box with Fourier differentiation, constrained to symmetry classes
of signed reflection groups.  Public surface:

  params      problem data and admissibility checks
  coxeter     signed reflection groups acting on the grid
  spectral    grids, fractional Laplacian, Riesz convolution, norms
  energy      action functional, gradient, Nehari algebra
  solver      projected minimization within a symmetry class
  analysis    nodal counts, decay fits, energy comparison tables
  extension   half-space harmonic extension cross-checks
  fieldio     config files, field serialization, run reports
"""

from .analysis import (
    EnergyTable,
    NodalReport,
    TableRow,
    decay_exponent,
    energy_table,
    nodal_domains,
    sign_on_fundamental_domain,
    solve_level,
)
from .coxeter import (
    Chamber,
    CoxeterGroup,
    generate_group,
    named_group,
    orbit,
    stabilizer,
)
from .energy import EnergyBreakdown, energy, gradient, interaction, nehari_energy, nehari_scale
from .extension import (
    ExtensionField,
    YGrid,
    energy_identity_check,
    extend_symmetry_check,
    extension_energy,
    harmonic_extend,
    psi_ode_solution,
    psi_profile,
    trace_inequality_check,
)
from .fieldio import ConfigError, load_config, read_field, resolve_group, write_field, write_report
from .params import ModelParams, admissible, critical_exponent, extension_constant, riesz_constant
from .solver import (
    CollapseToZero,
    Solution,
    SolverConfig,
    init_groundstate,
    init_saddle,
    mountain_pass_check,
    solve,
    symmetrize,
)
from .spectral import (
    Field,
    Grid,
    build_riesz_kernel,
    fractional_laplacian,
    gagliardo_norm_sq,
    hs_norm_sq,
    l2_norm_sq,
    riesz_convolve,
    seminorm_sq,
    set_threads,
)

__version__ = "0.1.0"

__all__ = [
    "Chamber",
    "CollapseToZero",
    "ConfigError",
    "CoxeterGroup",
    "EnergyBreakdown",
    "EnergyTable",
    "ExtensionField",
    "Field",
    "Grid",
    "ModelParams",
    "NodalReport",
    "Solution",
    "SolverConfig",
    "TableRow",
    "YGrid",
    "admissible",
    "build_riesz_kernel",
    "critical_exponent",
    "decay_exponent",
    "energy",
    "energy_identity_check",
    "energy_table",
    "extend_symmetry_check",
    "extension_constant",
    "extension_energy",
    "fractional_laplacian",
    "gagliardo_norm_sq",
    "generate_group",
    "gradient",
    "harmonic_extend",
    "hs_norm_sq",
    "init_groundstate",
    "init_saddle",
    "interaction",
    "l2_norm_sq",
    "load_config",
    "mountain_pass_check",
    "named_group",
    "nehari_energy",
    "nehari_scale",
    "nodal_domains",
    "orbit",
    "psi_ode_solution",
    "psi_profile",
    "read_field",
    "resolve_group",
    "riesz_constant",
    "riesz_convolve",
    "seminorm_sq",
    "set_threads",
    "sign_on_fundamental_domain",
    "solve",
    "solve_level",
    "stabilizer",
    "symmetrize",
    "trace_inequality_check",
    "write_field",
    "write_report",
]
