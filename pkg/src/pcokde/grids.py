"""Bandwidth-grid construction.

Univariate grids rescale a Sobol sequence onto [1/n, 1] and append the
minimal bandwidth sup(K)/n.  Multivariate grids draw diagonal entries
from a d-dimensional Sobol sequence rescaled onto [sup(K)/n^(1/d), 1];
the per-axis lower bound uses the univariate kernel supremum, which makes
det(H_min) = sup(K_d) |K|_1 / n hold with equality for the Gaussian
product kernel.  Rotated grids conjugate the same diagonals with the
eigenbasis of the data covariance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateCovarianceWarning, UnsupportedDimension
from .kernels import Bandwidth, get_kernel
from .sobol import sobol


@dataclass(frozen=True)
class BandwidthGrid:
    """An immutable collection of candidate bandwidths.

    ``members`` always contains ``h_min`` (appended last); ``rotation`` is
    the shared eigenbasis P of the members (identity for scalar and
    diagonal grids) and ``diags`` holds each member's diagonal entries in
    that basis, aligned with ``members``.
    """

    dim: int
    members: tuple
    h_min: Bandwidth
    rotation: np.ndarray
    diags: np.ndarray
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.rotation.setflags(write=False)
        self.diags.setflags(write=False)

    def __len__(self):
        return len(self.members)

    @classmethod
    def from_scalars(cls, values, h_min: float) -> "BandwidthGrid":
        """Build a univariate grid from explicit scalar bandwidths."""
        h_min = float(h_min)
        vals, seen = [], set()
        for v in values:
            v = float(v)
            if v != h_min and v not in seen:
                seen.add(v)
                vals.append(v)
        vals.append(h_min)
        members = tuple(Bandwidth.scalar(v) for v in vals)
        return cls(dim=1, members=members, h_min=members[-1], rotation=np.eye(1),
                   diags=np.array(vals)[:, None])

    @classmethod
    def from_diags(cls, diags, h_min_entry: float, rotation=None,
                   warn: tuple = ()) -> "BandwidthGrid":
        """Build a d>=2 grid from per-member diagonal entries in basis P."""
        diags = np.atleast_2d(np.asarray(diags, dtype=float))
        d = diags.shape[1]
        if rotation is None:
            rotation = np.eye(d)
        hmin_row = np.full(d, float(h_min_entry))
        seen = set()
        rows = []
        for row in diags:
            key = row.tobytes()
            if key not in seen and not np.array_equal(row, hmin_row):
                seen.add(key)
                rows.append(row)
        rows.append(hmin_row)
        all_diags = np.array(rows)
        members = tuple(Bandwidth.from_diag(row, rotation) for row in all_diags)
        return cls(dim=d, members=members, h_min=members[-1], rotation=rotation,
                   diags=all_diags, warnings=tuple(warn))


def _check_hmin_determinant(kernel, dim: int, n: int, det_hmin: float) -> None:
    # Oracle-inequality condition: det(H_min) >= sup(K_d) |K|_1 / n.
    bound = kernel.sup_d(dim) * kernel.l1 / n
    if det_hmin < bound * (1.0 - 1e-12):
        raise ValueError(
            f"det(H_min)={det_hmin:g} violates the lower bound {bound:g}")


def univariate_grid(n: int, kernel, count: int = 400) -> BandwidthGrid:
    """Sobol points rescaled to [1/n, 1] plus the minimal bandwidth sup(K)/n."""
    kernel = get_kernel(kernel)
    if n < 2:
        raise ValueError("need n >= 2")
    lo = 1.0 / n
    pts = sobol(1, count).ravel()
    values = lo + (1.0 - lo) * pts
    h_min = kernel.sup / n
    _check_hmin_determinant(kernel, 1, n, h_min)
    return BandwidthGrid.from_scalars(sorted(values.tolist()), h_min=h_min)


def _diag_entries(n: int, d: int, kernel, count: int) -> tuple[np.ndarray, float]:
    lo = kernel.sup / n ** (1.0 / d)
    if lo >= 1.0:
        raise ValueError(f"lower bound {lo:g} >= 1; increase n")
    pts = sobol(d, count)
    return lo + (1.0 - lo) * pts, lo


def diagonal_grid(n: int, d: int, kernel, count: int | None = None) -> BandwidthGrid:
    """Grid of diagonal bandwidth matrices with Sobol-drawn entries."""
    kernel = get_kernel(kernel)
    if not 2 <= d <= 4:
        raise UnsupportedDimension(f"diagonal grids cover d in 2..4, got {d}")
    kernel.require_gaussian(d)
    if count is None:
        count = 16**d
    entries, lo = _diag_entries(n, d, kernel, count)
    _check_hmin_determinant(kernel, d, n, lo**d)
    return BandwidthGrid.from_diags(entries, h_min_entry=lo)


def rotated_grid(sample: np.ndarray, n: int | None = None, kernel="gaussian",
                 count: int | None = None) -> BandwidthGrid:
    """Grid of SPD matrices P.T diag(.) P rotated by the data covariance.

    P comes from the deterministic eigendecomposition of the empirical
    covariance; H_min stays isotropic so it is a member of the same family.
    """
    kernel = get_kernel(kernel)
    x = np.asarray(sample, dtype=float)
    if x.ndim != 2:
        raise UnsupportedDimension("rotated grids need an (n, d) sample")
    d = x.shape[1]
    if not 2 <= d <= 4:
        raise UnsupportedDimension(f"rotated grids cover d in 2..4, got {d}")
    kernel.require_gaussian(d)
    if n is None:
        n = x.shape[0]
    if count is None:
        count = 16**d
    cov = linalg.empirical_covariance(x)
    _, clamped = linalg.clamp_spd(cov)
    warn = ()
    if clamped:
        warnings.warn("data covariance is numerically degenerate; rotation may be unstable",
                      DegenerateCovarianceWarning, stacklevel=2)
        warn = ("DegenerateCovariance",)
    rotation = linalg.sym_eig(cov).rotation
    entries, lo = _diag_entries(n, d, kernel, count)
    _check_hmin_determinant(kernel, d, n, lo**d)
    return BandwidthGrid.from_diags(entries, h_min_entry=lo, rotation=rotation, warn=warn)
