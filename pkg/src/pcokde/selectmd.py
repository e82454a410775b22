"""Multivariate bandwidth selectors over diagonal or rotated grids.

All multivariate selection is Gaussian-kernel: every pairwise convolution
collapses to a single Gaussian whose covariance is the sum of the
convolved squared bandwidths, so each grid criterion is an O(n^2)
pairwise sum per member.  The plug-in selector estimates the curvature
matrix through the fourth derivative tensor of a Gaussian pilot,
contracted against vech(H^2) with the duplication mapping.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateCovarianceWarning,
    EmptyGrid,
    IndefiniteQuadraticFormWarning,
)
from .grids import BandwidthGrid
from .kernels import GAUSSIAN, Bandwidth, gaussian_density, mean_gauss_pairs
from .select1d import SelectionResult, _argmin_smallest


@dataclass(frozen=True)
class PilotSpec:
    """Gaussian pilot used by smoothed cross-validation and plug-in.

    The default derivation is the normal-reference matrix (the
    multivariate rule-of-thumb bandwidth), which keeps the suite
    self-contained; externally tuned pilots can be passed explicitly.
    """

    bandwidth: Bandwidth
    derivation: str = "normal_reference"

    @classmethod
    def normal_reference(cls, sample: np.ndarray) -> "PilotSpec":
        return cls(bandwidth=rot_select_md(sample).chosen)

    @classmethod
    def scalar(cls, g: float, dim: int) -> "PilotSpec":
        if dim == 1:
            return cls(bandwidth=Bandwidth.scalar(g), derivation="explicit")
        return cls(bandwidth=Bandwidth.from_diag(np.full(dim, float(g))),
                   derivation="explicit")


def _grid_dets(grid: BandwidthGrid) -> np.ndarray:
    if len(grid.members) == 0:
        raise EmptyGrid("empty bandwidth grid")
    return np.array([m.det for m in grid.members])


def _as_matrix(sample: np.ndarray) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x


def pco_criterion_parts_md(sample, grid: BandwidthGrid):
    """Lambda split of the multivariate PCO criterion (base + lam * slope)."""
    x = _as_matrix(sample)
    n, d = x.shape
    dets = _grid_dets(grid)
    norm2 = GAUSSIAN.norm2_d(d)
    hmin_sq = grid.h_min.sq
    covs = [2.0 * m.sq for m in grid.members]
    covs += [m.sq + hmin_sq for m in grid.members]
    covs.append(2.0 * hmin_sq)
    sums = mean_gauss_pairs(x, covs)
    m = len(grid.members)
    comparison = sums[:m] - 2.0 * sums[m:2 * m] + sums[2 * m]
    cross = np.array([
        float((2.0 * np.pi) ** (-d / 2.0) / np.sqrt(linalg.sym_det(mem.sq + hmin_sq)))
        for mem in grid.members])
    base = comparison + (-norm2 / dets - norm2 / grid.h_min.det + 2.0 * cross) / n
    slope = norm2 / (n * dets)
    return base, slope


def pco_select_md(sample, grid: BandwidthGrid, lam: float = 1.0) -> SelectionResult:
    """Penalized comparison to overfitting over a matrix bandwidth grid."""
    base, slope = pco_criterion_parts_md(sample, grid)
    values = base + lam * slope
    dets = _grid_dets(grid)
    idx = _argmin_smallest(values, dets)
    return SelectionResult(chosen=grid.members[idx], method_id="pco",
                           criterion_curve=tuple(zip(grid.members, values.tolist())),
                           diagnostics={"lambda": lam})


def rot_select_md(sample) -> SelectionResult:
    """Normal-reference bandwidth matrix (4/(n(d+2)))^(1/(d+4)) * Sigma^(1/2)."""
    x = _as_matrix(sample)
    n, d = x.shape
    cov = linalg.empirical_covariance(x)
    cov, clamped = linalg.clamp_spd(cov)
    diagnostics = {}
    if clamped:
        warnings.warn("DegenerateCovariance: eigenvalues clamped for the rule of thumb",
                      DegenerateCovarianceWarning, stacklevel=2)
        diagnostics["warnings"] = ["DegenerateCovariance"]
    factor = (4.0 / (n * (d + 2.0))) ** (1.0 / (d + 4.0))
    matrix = factor * linalg.spd_sqrt(cov)
    chosen = Bandwidth.scalar(matrix[0, 0]) if d == 1 else Bandwidth(matrix)
    return SelectionResult(chosen=chosen, method_id="rot", diagnostics=diagnostics)


def ucv_select_md(sample, grid: BandwidthGrid) -> SelectionResult:
    """Least-squares cross-validation with matrix bandwidths."""
    x = _as_matrix(sample)
    n, d = x.shape
    dets = _grid_dets(grid)
    covs = [2.0 * m.sq for m in grid.members] + [m.sq for m in grid.members]
    sums = mean_gauss_pairs(x, covs)
    m = len(grid.members)
    k_at_zero = (2.0 * np.pi) ** (-d / 2.0) / dets
    values = sums[:m] - 2.0 * sums[m:] + 2.0 * k_at_zero / n
    idx = _argmin_smallest(values, dets)
    return SelectionResult(chosen=grid.members[idx], method_id="ucv",
                           criterion_curve=tuple(zip(grid.members, values.tolist())))


def scv_criterion_md(sample, grid: BandwidthGrid, pilot: PilotSpec) -> np.ndarray:
    """Smoothed cross-validation criterion values for every grid member."""
    x = _as_matrix(sample)
    n, d = x.shape
    dets = _grid_dets(grid)
    g_sq = pilot.bandwidth.sq
    covs = [2.0 * m.sq + 2.0 * g_sq for m in grid.members]
    covs += [m.sq + 2.0 * g_sq for m in grid.members]
    covs.append(2.0 * g_sq)
    sums = mean_gauss_pairs(x, covs)
    m = len(grid.members)
    bias = sums[:m] - 2.0 * sums[m:2 * m] + sums[2 * m]
    return GAUSSIAN.norm2_d(d) / (n * dets) + bias


def scv_select_md(sample, grid: BandwidthGrid, pilot: PilotSpec | None = None) -> SelectionResult:
    """Smoothed cross-validation (exact integrated squared bias estimate)."""
    x = _as_matrix(sample)
    if pilot is None:
        pilot = PilotSpec.normal_reference(x)
    values = scv_criterion_md(x, grid, pilot)
    dets = _grid_dets(grid)
    idx = _argmin_smallest(values, dets)
    return SelectionResult(chosen=grid.members[idx], method_id="scv",
                           criterion_curve=tuple(zip(grid.members, values.tolist())),
                           diagnostics={"pilot": pilot.derivation})


def psi4_hat(sample, pilot: PilotSpec) -> np.ndarray:
    """Fourth-derivative curvature matrix estimate, reshaped to d^2 x d^2.

    Averages the fourth Kronecker derivative of the Gaussian pilot over
    all ordered observation pairs (the i = j diagonal included).  Entries
    are invariant under permutations of the four derivative indices.
    """
    x = _as_matrix(sample)
    n, d = x.shape
    sigma = pilot.bandwidth.sq
    lam = np.linalg.inv(sigma)
    tuples = list(itertools.combinations_with_replacement(range(d), 4))
    sums = np.zeros(len(tuples))
    # The six ways of pairing two of the four derivative indices with y
    # and the remaining two with the precision matrix.
    splits = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)),
              ((2, 3), (0, 1)), ((1, 3), (0, 2)), ((1, 2), (0, 3))]
    for rows in _row_blocks(n, d):
        delta = (x[rows, None, :] - x[None, :, :]).reshape(-1, d)
        dens = gaussian_density(delta, sigma)
        y = delta @ lam
        for t, idx in enumerate(tuples):
            a, b, c, e = idx
            term = y[:, a] * y[:, b] * y[:, c] * y[:, e]
            for (p1, p2), (p3, p4) in splits:
                term = term - y[:, idx[p1]] * y[:, idx[p2]] * lam[idx[p3], idx[p4]]
            term = term + (lam[a, b] * lam[c, e] + lam[a, c] * lam[b, e]
                           + lam[a, e] * lam[b, c])
            sums[t] += float((term * dens).sum())
    sums /= n * n
    out = np.zeros((d * d, d * d))
    for t, combo in enumerate(tuples):
        for perm in set(itertools.permutations(combo)):
            a, b, c, e = perm
            out[a * d + b, c * d + e] = sums[t]
    return out


def _row_blocks(n: int, d: int):
    rows = max(1, min(n, 4_000_000 // max(n * d, 1)))
    for start in range(0, n, rows):
        yield slice(start, min(start + rows, n))


def vech_quadratic_form(psi: np.ndarray, h_sq: np.ndarray) -> float:
    """Evaluate vech(H^2)^T [D^T psi D] vech(H^2) via the duplication matrix."""
    d = h_sq.shape[0]
    dup = linalg.duplication_matrix(d)
    v = linalg.vech(h_sq)
    return float(v @ (dup.T @ psi @ dup) @ v)


def pi_criterion_md(grid: BandwidthGrid, psi: np.ndarray, n: int) -> np.ndarray:
    """Estimated AMISE values over the grid for a given curvature matrix."""
    d = grid.dim
    norm2 = GAUSSIAN.norm2_d(d)
    dets = _grid_dets(grid)
    quad = np.array([vech_quadratic_form(psi, m.sq) for m in grid.members])
    return 0.25 * GAUSSIAN.mu2**2 * quad + norm2 / (n * dets)


def pi_select_md(sample, grid: BandwidthGrid, pilot: PilotSpec | None = None) -> SelectionResult:
    """Plug-in selection: minimize the estimated AMISE over the grid."""
    x = _as_matrix(sample)
    n = x.shape[0]
    if pilot is None:
        pilot = PilotSpec.normal_reference(x)
    psi = psi4_hat(x, pilot)
    values = pi_criterion_md(grid, psi, n)
    diagnostics = {"pilot": pilot.derivation}
    quad = values - GAUSSIAN.norm2_d(grid.dim) / (n * _grid_dets(grid))
    if np.any(quad < 0):
        warnings.warn("IndefiniteQuadraticForm: negative curvature term at some grid member",
                      IndefiniteQuadraticFormWarning, stacklevel=2)
        diagnostics["warnings"] = ["IndefiniteQuadraticForm"]
    dets = _grid_dets(grid)
    idx = _argmin_smallest(values, dets)
    return SelectionResult(chosen=grid.members[idx], method_id="pi",
                           criterion_curve=tuple(zip(grid.members, values.tolist())),
                           diagnostics=diagnostics)
