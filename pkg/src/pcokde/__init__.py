"""Kernel density estimation toolkit: bandwidth selection by penalized
comparison to overfitting and its classical competitors, benchmark
mixture densities, and a reproducible Monte-Carlo ISE harness."""

from .densities import BenchmarkDensity, get_density, zoo
from .grids import BandwidthGrid, diagonal_grid, rotated_grid, univariate_grid
from .kernels import (
    BIWEIGHT,
    EPANECHNIKOV,
    GAUSSIAN,
    Bandwidth,
    Kernel,
    get_kernel,
    kde_eval,
    kernel_eval,
    pairwise_comparison_norm,
    pco_penalty,
)
from .risk import MethodSpec, RiskReport, ise, lambda_sweep, monte_carlo_risk, ratio_stats
from .select1d import (
    SelectionResult,
    bcv_select,
    pco_select_1d,
    rot_select,
    sj_select,
    ucv_select_1d,
)
from .selectmd import (
    PilotSpec,
    pco_select_md,
    pi_select_md,
    psi4_hat,
    rot_select_md,
    scv_select_md,
    ucv_select_md,
)

__version__ = "0.1.0"

__all__ = [
    "BIWEIGHT", "EPANECHNIKOV", "GAUSSIAN",
    "Bandwidth", "BandwidthGrid", "BenchmarkDensity", "Kernel", "MethodSpec",
    "PilotSpec", "RiskReport", "SelectionResult",
    "bcv_select", "diagonal_grid", "get_density", "get_kernel", "ise",
    "kde_eval", "kernel_eval", "lambda_sweep", "monte_carlo_risk",
    "pairwise_comparison_norm", "pco_penalty", "pco_select_1d", "pco_select_md",
    "pi_select_md", "psi4_hat", "ratio_stats", "rot_select", "rot_select_md",
    "rotated_grid", "scv_select_md", "sj_select", "ucv_select_1d",
    "ucv_select_md", "univariate_grid", "zoo",
]
