"""Quadrature-weighted normalization toolkit."""

from qnk._core import (
    Grid,
    bias_report,
    bootstrap_improvement_ci,
    boundary_refined_grid,
    chebyshev_grid,
    cohens_d,
    custom_grid,
    holm_bonferroni,
    interpolate,
    moments,
    normalize,
    paired_t_test,
    periodic_grid,
    run_acceptance,
    sample_field,
    statistic_ladder,
    output_ladder,
    tost_equivalence,
    transfer_discrepancy,
    uniform_grid,
    weight_field,
)

__all__ = [
    "Grid",
    "bias_report",
    "bootstrap_improvement_ci",
    "boundary_refined_grid",
    "chebyshev_grid",
    "cohens_d",
    "custom_grid",
    "holm_bonferroni",
    "interpolate",
    "moments",
    "normalize",
    "output_ladder",
    "paired_t_test",
    "periodic_grid",
    "run_acceptance",
    "sample_field",
    "statistic_ladder",
    "tost_equivalence",
    "transfer_discrepancy",
    "uniform_grid",
    "weight_field",
]
