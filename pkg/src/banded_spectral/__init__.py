"""Polynomial solution systems of banded higher-order difference
equations, their spectral moment tables, and orthogonality
certification against positive matrix densities on circles."""

from .polynomials import Poly, residue_split, split_row
from .banded import (
    BandedMatrix,
    DegenerateMatrixError,
    PolynomialSystem,
    solve_polynomials,
    validate,
)
from .spectral import (
    MomentTable,
    basis_expansion,
    check_axioms_case_a,
    check_axioms_case_b,
    default_block_count,
    moment_table,
    moment_table_case_a,
    moment_table_case_b,
    spectral_form,
    table_pairing,
)
from .circle import (
    CircleDensity,
    build_density,
    density_moment,
    pairing,
    select_radius,
    verify_orthogonality,
)
from .rankone import (
    RankOneModel,
    alpha_scan,
    chebyshev_u,
    cheb_in_solution_basis,
    circle_weight,
    combined_contour_moments,
    contour_orthogonality,
    laurent_coefficients,
    moment,
    monomial_in_cheb,
    phi_hypergeometric,
    phi_series,
    solution_poly,
    weight_g,
    weight_w,
)

__all__ = [
    "BandedMatrix",
    "CircleDensity",
    "DegenerateMatrixError",
    "MomentTable",
    "Poly",
    "PolynomialSystem",
    "RankOneModel",
    "alpha_scan",
    "basis_expansion",
    "build_density",
    "cheb_in_solution_basis",
    "chebyshev_u",
    "check_axioms_case_a",
    "check_axioms_case_b",
    "circle_weight",
    "combined_contour_moments",
    "contour_orthogonality",
    "default_block_count",
    "density_moment",
    "laurent_coefficients",
    "moment",
    "moment_table",
    "moment_table_case_a",
    "moment_table_case_b",
    "monomial_in_cheb",
    "pairing",
    "phi_hypergeometric",
    "phi_series",
    "residue_split",
    "select_radius",
    "solution_poly",
    "solve_polynomials",
    "spectral_form",
    "split_row",
    "table_pairing",
    "validate",
    "verify_orthogonality",
]

__version__ = "0.1.0"
