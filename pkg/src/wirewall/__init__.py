"""Domain walls in thin ferromagnetic wires.

Tools for the thin-wire limit of 180-degree domain walls: cross-section
demagnetizing matrices, closed-form and computed transition profiles of the
reduced one-dimensional energy, discrete three-dimensional micromagnetic
energies on truncated wires, a curling (vortex) comparison construction for
thick wires, and a harness of quantitative inequality checks.
"""

from .geometry import (
    CrossSection,
    GeometryError,
    InteriorGrid,
    WireDomain,
    boundary_quadrature,
    interior_grid,
    make_cross_section,
    make_wire_domain,
    unit_diameter,
)
from .demag import (
    AccuracyError,
    DemagMatrix,
    alpha_omega,
    compute_demag_matrix,
    diagonalize,
)
from .profiles import (
    AlignmentError,
    DescentHistory,
    DescentOptions,
    ReducedEnergyParams,
    TruncationError,
    WallProfile,
    align_profile,
    closed_form_minimum,
    default_window,
    fixed_minimizer,
    minimize_reduced,
    reduced_energy,
    reduced_energy_gradient,
    transverse_profile,
)
from .field3d import (
    AveragedProfile,
    CapacityError,
    CrossingFamilies,
    Descent3DOptions,
    Energy3DHistory,
    EnergyReport,
    Field3D,
    average_profile,
    calibrate_poincare,
    charge_totals,
    crossing_families,
    exchange_energy,
    exchange_energy_gradient,
    extend_profile,
    magnetostatic_energy,
    magnetostatic_energy_gradient,
    minimize_3d,
    oscillation_constant,
    poincare_check,
    sample_field,
    scale_field,
    total_energy,
    uniform_field,
)
from .lemmas import (
    BoundCheck,
    LemmaSuiteConfig,
    green_rectangle_integral,
    run_all,
    suite_passed,
    wall_lower_bound_check,
)
from .vortex import (
    VortexParams,
    VortexReport,
    difference_norm_sq,
    energy_slope,
    exchange_excluding_origin,
    formal_exchange,
    grid_fields,
    reference_formal_exchange,
    region_of,
    regularized_field,
    verify_bounds,
    vortex_domain,
    vortex_field,
)

__all__ = [
    "CrossSection",
    "GeometryError",
    "InteriorGrid",
    "WireDomain",
    "boundary_quadrature",
    "interior_grid",
    "make_cross_section",
    "make_wire_domain",
    "unit_diameter",
    "AccuracyError",
    "DemagMatrix",
    "alpha_omega",
    "compute_demag_matrix",
    "diagonalize",
    "AlignmentError",
    "DescentHistory",
    "DescentOptions",
    "ReducedEnergyParams",
    "TruncationError",
    "WallProfile",
    "align_profile",
    "closed_form_minimum",
    "default_window",
    "fixed_minimizer",
    "minimize_reduced",
    "reduced_energy",
    "reduced_energy_gradient",
    "transverse_profile",
    "AveragedProfile",
    "CapacityError",
    "CrossingFamilies",
    "Descent3DOptions",
    "Energy3DHistory",
    "EnergyReport",
    "Field3D",
    "average_profile",
    "calibrate_poincare",
    "charge_totals",
    "crossing_families",
    "exchange_energy",
    "exchange_energy_gradient",
    "extend_profile",
    "magnetostatic_energy",
    "magnetostatic_energy_gradient",
    "minimize_3d",
    "oscillation_constant",
    "poincare_check",
    "sample_field",
    "scale_field",
    "total_energy",
    "uniform_field",
    "BoundCheck",
    "LemmaSuiteConfig",
    "green_rectangle_integral",
    "run_all",
    "suite_passed",
    "wall_lower_bound_check",
    "VortexParams",
    "VortexReport",
    "difference_norm_sq",
    "energy_slope",
    "exchange_excluding_origin",
    "formal_exchange",
    "grid_fields",
    "reference_formal_exchange",
    "region_of",
    "regularized_field",
    "verify_bounds",
    "vortex_domain",
    "vortex_field",
]

__version__ = "0.1.0"
