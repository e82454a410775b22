"""Univariate bandwidth selectors.

Grid criteria (the overfitting comparison and unbiased cross-validation)
are evaluated through O(n^2) pairwise sums with the kernel convolutions
in closed form; rule-of-thumb, biased cross-validation and the two
plug-in variants use their closed-form expressions, estimating unknown
curvature functionals with Gaussian-pilot pairwise sums.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSample, EmptyGrid, SelectorFallbackWarning
from .grids import BandwidthGrid
from .kernels import (
    SQRT_2PI,
    Bandwidth,
    gaussian_density_1d,
    get_kernel,
    kernel_self_convolution,
    mean_conv_pairs_1d,
    mean_gauss_pairs_1d,
    pair_row_blocks,
)

GAUSS_D4_AT_0 = 3.0 / SQRT_2PI  # fourth derivative of the standard normal at 0


@dataclass
class SelectionResult:
    """Outcome of one bandwidth selection.

    ``criterion_curve`` pairs each grid member with its criterion value
    (empty for closed-form selectors); ``diagnostics`` records fallbacks,
    warnings and iteration counts.
    """

    chosen: Bandwidth
    method_id: str
    criterion_curve: tuple = ()
    diagnostics: dict = field(default_factory=dict)


def _argmin_smallest(values: np.ndarray, dets: np.ndarray) -> int:
    """Index of the minimal value; exact ties go to the smallest determinant."""
    finite = np.isfinite(values)
    if not np.any(finite):
        raise EmptyGrid("criterion is non-finite on the whole grid")
    vmin = values[finite].min()
    ties = np.nonzero(values == vmin)[0]
    return int(ties[np.argmin(dets[ties])])


def _grid_scalars(grid: BandwidthGrid) -> np.ndarray:
    if len(grid.members) == 0:
        raise EmptyGrid("empty bandwidth grid")
    if grid.dim != 1:
        raise ValueError("this selector needs a univariate grid")
    return np.array([m.h for m in grid.members])


def pco_criterion_parts_1d(x, kernel, grid: BandwidthGrid):
    """Split the PCO criterion into lambda-independent and lambda-linear parts.

    criterion(lam) = base + lam * slope with slope = |K_h|^2 / n per
    member, so lambda sweeps reuse one O(n^2 |grid|) pass.
    """
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    hs = _grid_scalars(grid)
    h_min = grid.h_min.h
    if kernel.name == "gaussian":
        variances = np.concatenate([2.0 * hs * hs, hs * hs + h_min * h_min,
                                    [2.0 * h_min * h_min]])
        sums = mean_gauss_pairs_1d(x, variances)
        m = hs.size
        comparison = sums[:m] - 2.0 * sums[m:2 * m] + sums[2 * m]
        cross = gaussian_density_1d(np.zeros_like(hs), hs * hs + h_min * h_min)
    else:
        scales = [(h, h) for h in hs] + [(h, h_min) for h in hs] + [(h_min, h_min)]
        sums = mean_conv_pairs_1d(x, kernel, scales)
        m = hs.size
        comparison = sums[:m] - 2.0 * sums[m:2 * m] + sums[2 * m]
        cross = np.array([kernel_self_convolution(kernel, h, h_min, 0.0) for h in hs])
    slope = kernel.norm2 / (n * hs)
    base = comparison + (-kernel.norm2 / hs - kernel.norm2 / h_min + 2.0 * cross) / n
    return base, slope


def pco_select_1d(x, kernel, grid: BandwidthGrid, lam: float = 1.0) -> SelectionResult:
    """Penalized comparison to the overfitting estimator over a grid."""
    base, slope = pco_criterion_parts_1d(x, kernel, grid)
    values = base + lam * slope
    hs = _grid_scalars(grid)
    idx = _argmin_smallest(values, hs)
    return SelectionResult(chosen=grid.members[idx], method_id="pco",
                           criterion_curve=tuple(zip(grid.members, values.tolist())),
                           diagnostics={"lambda": lam})


def rot_select(x, variant: str = "rot") -> SelectionResult:
    """Normal-reference rule with constant 1.06 ('rot') or 0.9 ('rot0')."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise DegenerateSample("need at least two observations")
    const = {"rot": 1.06, "rot0": 0.9}[variant]
    sd = float(np.std(x, ddof=1))
    q25, q75 = np.quantile(x, [0.25, 0.75], method="linear")
    iqr_term = float(q75 - q25) / 1.34
    candidates = [c for c in (sd, iqr_term) if c > 0]
    if not candidates:
        raise DegenerateSample("zero standard deviation and zero interquartile range")
    h = const * min(candidates) * n ** (-0.2)
    return SelectionResult(chosen=Bandwidth.scalar(h), method_id=variant,
                           diagnostics={"sd": sd, "iqr_over_1.34": iqr_term})


def mean_kernel_pairs_1d(x, kernel, hs) -> np.ndarray:
    """Mean over all ordered pairs of K_h(X_i - X_j) for each h."""
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    hs = np.asarray(hs, dtype=float)
    sums = np.zeros(hs.shape)
    for rows in pair_row_blocks(n):
        delta = x[rows, None] - x[None, :]
        for k, h in enumerate(hs):
            sums[k] += (kernel(delta / h) / h).sum()
    return sums / (n * n)


def ucv_select_1d(x, kernel, grid: BandwidthGrid) -> SelectionResult:
    """Least-squares cross-validation with the 1/n leave-one-out convention.

    The double sum runs over all pairs including i = j; the diagonal
    reconstitutes the integral of the squared estimate exactly.
    """
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    hs = _grid_scalars(grid)
    if kernel.name == "gaussian":
        conv_means = mean_gauss_pairs_1d(x, 2.0 * hs * hs)
    else:
        conv_means = mean_conv_pairs_1d(x, kernel, [(h, h) for h in hs])
    k_means = mean_kernel_pairs_1d(x, kernel, hs)
    values = conv_means - 2.0 * k_means + 2.0 * float(kernel(0.0)) / (n * hs)
    idx = _argmin_smallest(values, hs)
    return SelectionResult(chosen=grid.members[idx], method_id="ucv",
                           criterion_curve=tuple(zip(grid.members, values.tolist())))


def _gauss_d4_scaled(delta: np.ndarray, scale: float) -> np.ndarray:
    """Fourth derivative of the N(0, scale^2) density at delta."""
    z = delta / scale
    z2 = z * z
    return (z2 * z2 - 6.0 * z2 + 3.0) * np.exp(-0.5 * z2) / (SQRT_2PI * scale**5)


def _gauss_d6_scaled(delta: np.ndarray, scale: float) -> np.ndarray:
    """Sixth derivative of the N(0, scale^2) density at delta."""
    z = delta / scale
    z2 = z * z
    poly = z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0
    return poly * np.exp(-0.5 * z2) / (SQRT_2PI * scale**7)


def _pair_sum(x: np.ndarray, fn) -> float:
    total = 0.0
    n = x.size
    for rows in pair_row_blocks(n):
        total += float(fn(x[rows, None] - x[None, :]).sum())
    return total


def curvature_estimate(x, pilot_h: float) -> float:
    """U-statistic estimate of the squared L2 norm of the second derivative.

    Off-diagonal pairwise sum of the fourth derivative of the Gaussian at
    scale pilot_h * sqrt(2), i.e. the convolution of the two pilot-kernel
    second derivatives.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    scale = pilot_h * np.sqrt(2.0)
    total = _pair_sum(x, lambda d: _gauss_d4_scaled(d, scale))
    total -= n * _gauss_d4_scaled(np.zeros(1), scale)[0]
    return total / (n * (n - 1))


def bcv_select(x, kernel, pilot_h: float | None = None) -> SelectionResult:
    """Biased cross-validation via its closed-form AMISE minimizer.

    The curvature functional is estimated with a Gaussian pilot at the
    rule-of-thumb bandwidth (the convolution of compact-kernel second
    derivatives is distributional, so the pilot is always Gaussian); the
    closed form uses the requested kernel's constants.  A non-positive
    curvature estimate falls back to the rule of thumb with a warning.
    """
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    rot = rot_select(x)
    if pilot_h is None:
        pilot_h = rot.chosen.h
    curvature = curvature_estimate(x, pilot_h)
    if curvature <= 0:
        warnings.warn("NonPositiveCurvatureEstimate: falling back to the rule of thumb",
                      SelectorFallbackWarning, stacklevel=2)
        return SelectionResult(chosen=rot.chosen, method_id="bcv",
                               diagnostics={"fallback": "rot",
                                            "warnings": ["NonPositiveCurvatureEstimate"]})
    h = (kernel.norm2 / (kernel.mu2**2 * curvature)) ** 0.2 * n ** (-0.2)
    return SelectionResult(chosen=Bandwidth.scalar(h), method_id="bcv",
                           diagnostics={"curvature": curvature, "pilot_h": pilot_h})


def s_hat(x, alpha: float) -> float:
    """Pilot curvature estimator: all-pairs fourth-derivative sum at scale alpha.

    Includes the i = j diagonal; the 1/(n(n-1)) normalization follows the
    plug-in literature's display.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    total = 0.0
    for rows in pair_row_blocks(n):
        z = (x[rows, None] - x[None, :]) / alpha
        z2 = z * z
        total += float(((z2 * z2 - 6.0 * z2 + 3.0) * np.exp(-0.5 * z2)).sum())
    return total / (SQRT_2PI * n * (n - 1) * alpha**5)


def norm_f2_hat(x, a: float) -> float:
    """Squared L2 norm of the second derivative of a Gaussian KDE at bandwidth a."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    scale = a * np.sqrt(2.0)
    return _pair_sum(x, lambda d: _gauss_d4_scaled(d, scale)) / (n * n)


def norm_f3_hat(x, b: float) -> float:
    """Squared L2 norm of the third derivative of a Gaussian KDE at bandwidth b."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    scale = b * np.sqrt(2.0)
    return -_pair_sum(x, lambda d: _gauss_d6_scaled(d, scale)) / (n * n)


def sj_select(x, kernel, mode: str = "ste") -> SelectionResult:
    """Sheather-Jones plug-in, 'solve the equation' or 'direct plug-in'.

    The pilot kernel is Gaussian.  'dpi' plugs the pilot scale
    c2 * n^(-1/7) into the AMISE formula; 'ste' solves the fixed-point
    equation in h by bisection on a bracket scanned over [h_min, 1].
    Degenerate curvature estimates fall back ('ste' -> 'dpi' -> rule of
    thumb) with warnings.
    """
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 4:
        raise DegenerateSample("plug-in selection needs at least 4 observations")
    rot = rot_select(x)
    a = rot.chosen.h
    est3 = norm_f3_hat(x, a)
    fallback_warnings: list[str] = []

    def _dpi() -> SelectionResult:
        if est3 <= 0:
            warnings.warn("NonPositiveS: falling back to the rule of thumb",
                          SelectorFallbackWarning, stacklevel=3)
            return SelectionResult(chosen=rot.chosen, method_id="sjdpi",
                                   diagnostics={"fallback": "rot",
                                                "warnings": ["NonPositiveS"]})
        c2 = (2.0 * GAUSS_D4_AT_0 / est3) ** (1.0 / 7.0)
        s_val = s_hat(x, c2 * n ** (-1.0 / 7.0))
        if s_val <= 0:
            warnings.warn("NonPositiveS: falling back to the rule of thumb",
                          SelectorFallbackWarning, stacklevel=3)
            return SelectionResult(chosen=rot.chosen, method_id="sjdpi",
                                   diagnostics={"fallback": "rot",
                                                "warnings": ["NonPositiveS"]})
        h = (kernel.norm2 / (kernel.mu2**2 * s_val)) ** 0.2 * n ** (-0.2)
        return SelectionResult(chosen=Bandwidth.scalar(h), method_id="sjdpi",
                               diagnostics={"c2": c2, "s": s_val,
                                            "warnings": fallback_warnings})

    if mode == "dpi":
        return _dpi()
    if mode != "ste":
        raise ValueError(f"unknown plug-in mode {mode!r}")

    est2 = norm_f2_hat(x, a)
    if est2 <= 0 or est3 <= 0:
        warnings.warn("NonPositiveS: falling back to the rule of thumb",
                      SelectorFallbackWarning, stacklevel=2)
        return SelectionResult(chosen=rot.chosen, method_id="sjste",
                               diagnostics={"fallback": "rot", "warnings": ["NonPositiveS"]})
    c1 = (2.0 * GAUSS_D4_AT_0 * kernel.mu2**2 / kernel.norm2) ** (1.0 / 7.0) \
        * (est2 / est3) ** (1.0 / 7.0)

    def gap(h: float) -> float:
        s_val = s_hat(x, c1 * h ** (5.0 / 7.0))
        if s_val <= 0:
            return np.nan
        return h - (kernel.norm2 / (kernel.mu2**2 * s_val)) ** 0.2 * n ** (-0.2)

    h_lo = kernel.sup / n

    def find_bracket(scan):
        gaps = np.array([gap(h) for h in scan])
        for i in range(len(scan) - 1):
            if np.isfinite(gaps[i]) and np.isfinite(gaps[i + 1]) and gaps[i] * gaps[i + 1] <= 0:
                return scan[i], scan[i + 1], gaps[i]
        return None

    bracket = find_bracket(np.geomspace(h_lo, 1.0, 50))
    if bracket is None:
        # the fixed-point may sit outside the unit-scale window for data on
        # other scales; extend the scan so selection stays scale equivariant
        upper = max(4.0, 64.0 * a)
        bracket = find_bracket(np.geomspace(1.0, upper, 60))
    if bracket is None:
        bracket = find_bracket(np.geomspace(h_lo / 512.0, h_lo, 30))
    if bracket is None:
        warnings.warn("NoRootInBracket: falling back to direct plug-in",
                      SelectorFallbackWarning, stacklevel=2)
        fallback_warnings.append("NoRootInBracket")
        result = _dpi()
        result.method_id = "sjste"
        result.diagnostics.setdefault("fallback", "dpi")
        return result
    lo, hi, g_lo = bracket
    iterations = 0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        iterations += 1
        if not np.isfinite(g_mid):
            break
        if g_lo * g_mid <= 0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    h = 0.5 * (lo + hi)
    return SelectionResult(chosen=Bandwidth.scalar(h), method_id="sjste",
                           diagnostics={"c1": c1, "iterations": iterations})
