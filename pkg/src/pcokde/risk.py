"""Integrated squared error and the Monte-Carlo risk harness.

ISE is exact (Gaussian algebra) whenever the target is a Gaussian mixture
and the kernel is Gaussian.  Univariate targets with uniform or
exponential components use exact component-wise cross terms (kernel CDF
differences, truncated-Gaussian moments, polynomial-times-exponential
quadrature).  The multivariate uniform ball uses polar tensor quadrature
in d = 2 and randomized QMC over the ball with a reported standard error
in d = 3, 4.

The harness pairs trials across methods: the per-trial sample seed
depends only on (master seed, density, n, trial index), never on the
method, so ratio statistics compare like with like.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .densities import (
    BenchmarkDensity,
    ExponentialComponent,
    GaussianComponent,
    UniformBall,
    UniformBox,
    derive_seed,
)
from .errors import PcoKdeError, QuadratureNotConverged, UnpairedReports
from .grids import BandwidthGrid, diagonal_grid, rotated_grid, univariate_grid
from .kernels import (
    Bandwidth,
    gaussian_density,
    get_kernel,
    mean_conv_pairs_1d,
    mean_gauss_pairs,
    mean_gauss_pairs_1d,
)
from .select1d import (
    SelectionResult,
    bcv_select,
    pco_criterion_parts_1d,
    pco_select_1d,
    rot_select,
    sj_select,
    ucv_select_1d,
)
from .selectmd import (
    pco_criterion_parts_md,
    pco_select_md,
    pi_select_md,
    rot_select_md,
    scv_select_md,
    ucv_select_md,
)

_QMC_REPLICATES = 8
_QMC_POINTS = 2**14  # per replicate; 2^17 total
_POLY_KERNEL_COEFFS = {
    "epanechnikov": {0: 0.75, 2: -0.75},
    "biweight": {0: 15.0 / 16.0, 2: -30.0 / 16.0, 4: 15.0 / 16.0},
}


def _comp_cov(comp: GaussianComponent) -> np.ndarray:
    return np.asarray(comp.covariance, dtype=float)


def _ise_gaussian_closed(density: BenchmarkDensity, x: np.ndarray, bw: Bandwidth) -> float:
    n = x.shape[0]
    est_sq = float(mean_gauss_pairs(x, [2.0 * bw.sq])[0])
    cross = 0.0
    for w, comp in zip(density.weights, density.components):
        mean = np.asarray(comp.mean)
        vals = gaussian_density(x - mean, bw.sq + _comp_cov(comp))
        cross += w * float(vals.mean())
    f_sq = 0.0
    for wk, ck in zip(density.weights, density.components):
        for wl, cl in zip(density.weights, density.components):
            delta = np.asarray(ck.mean) - np.asarray(cl.mean)
            f_sq += wk * wl * float(gaussian_density(delta[None, :],
                                                     _comp_cov(ck) + _comp_cov(cl))[0])
    return est_sq - 2.0 * cross + f_sq


def _truncated_gauss_moments(a, b, mu, sigma, pmax: int) -> list[np.ndarray]:
    """I_p = int_a^b t^p phi(t; mu, sigma) dt for p = 0..pmax (vectorized in mu)."""
    mu = np.asarray(mu, dtype=float)
    za, zb = (a - mu) / sigma, (b - mu) / sigma
    phi_a = np.exp(-0.5 * za * za) / (sigma * math.sqrt(2.0 * math.pi))
    phi_b = np.exp(-0.5 * zb * zb) / (sigma * math.sqrt(2.0 * math.pi))
    moments = [ndtr(zb) - ndtr(za)]
    if pmax >= 1:
        moments.append(mu * moments[0] + sigma**2 * (phi_a - phi_b))
    for p in range(2, pmax + 1):
        boundary = b ** (p - 1) * phi_b - a ** (p - 1) * phi_a
        moments.append(mu * moments[p - 1] + sigma**2 * ((p - 1) * moments[p - 2] - boundary))
    return moments


def _cross_gaussian_1d(x, kernel, h, mean, sd) -> float:
    """(1/n) sum_i int K_h(t - X_i) phi_(mean, sd)(t) dt, exact."""
    if kernel.name == "gaussian":
        vals = gaussian_density((x - mean)[:, None], np.array([[h * h + sd * sd]]))
        return float(vals.mean())
    coeffs = _POLY_KERNEL_COEFFS[kernel.name]
    mu = mean - x  # per-observation offset in the t = y - X_i variable
    moments = _truncated_gauss_moments(-h, h, mu, sd, max(coeffs))
    vals = np.zeros_like(mu)
    for p, c in coeffs.items():
        vals += c / h ** (p + 1) * moments[p]
    return float(vals.mean())


def _cross_uniform_1d(x, kernel, h, lo, hi) -> float:
    width = hi - lo
    vals = kernel.cdf((hi - x) / h) - kernel.cdf((lo - x) / h)
    return float(vals.mean()) / width


def _cross_exponential_1d(x, kernel, h, rate) -> float:
    if kernel.name == "gaussian":
        expo = 0.5 * rate**2 * h**2 - rate * x
        vals = rate * np.exp(expo) * ndtr(x / h - rate * h)
        return float(vals.mean())
    nodes, weights = np.polynomial.legendre.leggauss(32)
    lo = np.maximum(0.0, x - h)
    hi = x + h
    width = np.maximum(hi - lo, 0.0)
    mid, half = 0.5 * (lo + hi), 0.5 * width
    acc = np.zeros_like(x)
    for nd, wt in zip(nodes, weights):
        t = mid + half * nd
        acc += wt * kernel((t - x) / h) / h * rate * np.exp(-rate * t)
    return float((acc * half).mean())


_COMPONENT_ORDER = {GaussianComponent: 0, UniformBox: 1, ExponentialComponent: 2}


def _pair_product_integral(c1, c2) -> float:
    """Exact integral of the product of two 1-D component densities."""
    if _COMPONENT_ORDER[type(c1)] > _COMPONENT_ORDER[type(c2)]:
        c1, c2 = c2, c1
    if isinstance(c1, GaussianComponent) and isinstance(c2, GaussianComponent):
        s2 = _comp_cov(c1)[0, 0] + _comp_cov(c2)[0, 0]
        d = c1.mean[0] - c2.mean[0]
        return math.exp(-0.5 * d * d / s2) / math.sqrt(2.0 * math.pi * s2)
    if isinstance(c1, GaussianComponent) and isinstance(c2, UniformBox):
        lo, hi = c2.intervals[0]
        sd = math.sqrt(_comp_cov(c1)[0, 0])
        m = c1.mean[0]
        return float(ndtr((hi - m) / sd) - ndtr((lo - m) / sd)) / (hi - lo)
    if isinstance(c1, GaussianComponent) and isinstance(c2, ExponentialComponent):
        sd = math.sqrt(_comp_cov(c1)[0, 0])
        m, rate = c1.mean[0], c2.rate
        return rate * math.exp(0.5 * rate**2 * sd**2 - rate * m) * float(ndtr(m / sd - rate * sd))
    if isinstance(c1, UniformBox) and isinstance(c2, UniformBox):
        (a1, b1), (a2, b2) = c1.intervals[0], c2.intervals[0]
        overlap = max(0.0, min(b1, b2) - max(a1, a2))
        return overlap / ((b1 - a1) * (b2 - a2))
    if isinstance(c1, UniformBox) and isinstance(c2, ExponentialComponent):
        (a, b), rate = c1.intervals[0], c2.rate
        a, b = max(a, 0.0), max(b, 0.0)
        if b <= a:
            return 0.0
        return (math.exp(-rate * a) - math.exp(-rate * b)) / (c1.intervals[0][1] - c1.intervals[0][0])
    if isinstance(c1, ExponentialComponent) and isinstance(c2, ExponentialComponent):
        return c1.rate * c2.rate / (c1.rate + c2.rate)
    raise NotImplementedError(f"no product integral for {type(c1)} x {type(c2)}")


def _ise_1d(density: BenchmarkDensity, x: np.ndarray, kernel, bw: Bandwidth) -> float:
    obs = x.ravel()
    h = bw.h
    if kernel.name == "gaussian":
        est_sq = float(mean_gauss_pairs_1d(obs, np.array([2.0 * h * h]))[0])
    else:
        est_sq = float(mean_conv_pairs_1d(obs, kernel, [(h, h)])[0])
    cross = 0.0
    for w, comp in zip(density.weights, density.components):
        if isinstance(comp, GaussianComponent):
            cross += w * _cross_gaussian_1d(obs, kernel, h, comp.mean[0],
                                            math.sqrt(_comp_cov(comp)[0, 0]))
        elif isinstance(comp, UniformBox):
            lo, hi = comp.intervals[0]
            cross += w * _cross_uniform_1d(obs, kernel, h, lo, hi)
        elif isinstance(comp, ExponentialComponent):
            cross += w * _cross_exponential_1d(obs, kernel, h, comp.rate)
        else:
            raise NotImplementedError(f"1D cross term for {type(comp)}")
    f_sq = 0.0
    for wk, ck in zip(density.weights, density.components):
        for wl, cl in zip(density.weights, density.components):
            f_sq += wk * wl * _pair_product_integral(ck, cl)
    return est_sq - 2.0 * cross + f_sq


def _kde_mean_at(points: np.ndarray, x: np.ndarray, bw: Bandwidth) -> np.ndarray:
    """Gaussian KDE values at ``points`` (loops observations, bounded memory)."""
    out = np.zeros(points.shape[0])
    for xi in x:
        out += gaussian_density(points - xi, bw.sq)
    return out / x.shape[0]


def _ball_mean_kde_2d(ball: UniformBall, x: np.ndarray, bw: Bandwidth) -> float:
    """Mean of the KDE over the disk via radial Gauss-Legendre x angular grid."""
    nodes, wts = np.polynomial.legendre.leggauss(64)
    radii = 0.5 * ball.radius * (nodes + 1.0)
    rad_w = 0.5 * ball.radius * wts
    n_ang = 256
    theta = 2.0 * math.pi * np.arange(n_ang) / n_ang
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    pts = (np.asarray(ball.center) + radii[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
    vals = _kde_mean_at(pts, x, bw).reshape(radii.size, n_ang)
    ang_mean = vals.mean(axis=1)
    integral = float(np.sum(rad_w * radii * ang_mean)) * 2.0 * math.pi
    return integral / ball.volume()


def _ball_points_from_unit(u: np.ndarray, ball: UniformBall) -> np.ndarray:
    """Area/volume-preserving map from the unit cube to the uniform ball."""
    d = ball.dim
    if d == 3:
        z = 2.0 * u[:, 0] - 1.0
        phi = 2.0 * math.pi * u[:, 1]
        s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        dirs = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
        rad = ball.radius * u[:, 2] ** (1.0 / 3.0)
    elif d == 4:
        psi = np.arcsin(np.sqrt(u[:, 0]))
        xi1 = 2.0 * math.pi * u[:, 1]
        xi2 = 2.0 * math.pi * u[:, 2]
        dirs = np.stack([np.cos(psi) * np.cos(xi1), np.cos(psi) * np.sin(xi1),
                         np.sin(psi) * np.cos(xi2), np.sin(psi) * np.sin(xi2)], axis=1)
        rad = ball.radius * u[:, 3] ** (1.0 / 4.0)
    else:
        raise NotImplementedError(f"ball map for d={d}")
    return np.asarray(ball.center) + dirs * rad[:, None]


def _ball_mean_kde_qmc(ball: UniformBall, x: np.ndarray, bw: Bandwidth) -> tuple[float, float]:
    """Randomized-QMC mean of the KDE over a d >= 3 ball, with standard error."""
    means = []
    for rep in range(_QMC_REPLICATES):
        seed = derive_seed(0xB411, "ise-qmc", ball.dim, rep) % 2**32
        u = qmc.Sobol(ball.dim, scramble=True, seed=seed).random(_QMC_POINTS)
        pts = _ball_points_from_unit(u, ball)
        means.append(float(_kde_mean_at(pts, x, bw).mean()))
    means = np.asarray(means)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(len(means)))


def _ise_ball(density: BenchmarkDensity, x: np.ndarray, bw: Bandwidth) -> float:
    ball = density.components[0]
    est_sq = float(mean_gauss_pairs(x, [2.0 * bw.sq])[0])
    inv_vol = 1.0 / ball.volume()
    if density.dim == 2:
        cross = _ball_mean_kde_2d(ball, x, bw)
        return est_sq - 2.0 * cross + inv_vol
    cross, se = _ball_mean_kde_qmc(ball, x, bw)
    value = est_sq - 2.0 * cross + inv_vol
    if 2.0 * se > 0.01 * max(abs(value), 1e-12):
        raise QuadratureNotConverged(
            f"QMC standard error {2 * se:g} above 1% of ISE {value:g}")
    return value


def _ise_2d_tensor(density: BenchmarkDensity, x: np.ndarray, kernel, bw: Bandwidth,
                   points_per_axis: int = 401) -> float:
    """Simpson tensor-grid fallback for general 2-D targets."""
    box = density.support_box()
    lo = np.minimum(box[:, 0], x.min(axis=0) - 6.0 * bw.eigenvalues.max())
    hi = np.maximum(box[:, 1], x.max(axis=0) + 6.0 * bw.eigenvalues.max())
    axes = [np.linspace(lo[k], hi[k], points_per_axis) for k in range(2)]
    from scipy.integrate import simpson

    grid_pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)
    est = _kde_mean_at(grid_pts, x, bw)
    diff_sq = (est - density.pdf(grid_pts)) ** 2
    diff_sq = diff_sq.reshape(points_per_axis, points_per_axis)
    return float(simpson(simpson(diff_sq, x=axes[1], axis=1), x=axes[0]))


def ise(density: BenchmarkDensity, sample, kernel, bw: Bandwidth) -> float:
    """Integrated squared error |f_hat - f|^2 of a KDE against a benchmark."""
    kernel = get_kernel(kernel)
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != density.dim or bw.dim != density.dim:
        raise PcoKdeError(
            f"dimension mismatch: sample {x.shape[1]}, bandwidth {bw.dim}, "
            f"density {density.dim}")
    if density.dim == 1:
        if kernel.name == "gaussian" and density.is_gaussian_mixture:
            return _ise_gaussian_closed(density, x, bw)
        return _ise_1d(density, x, kernel, bw)
    kernel.require_gaussian(density.dim)
    if density.is_gaussian_mixture:
        return _ise_gaussian_closed(density, x, bw)
    if len(density.components) == 1 and isinstance(density.components[0], UniformBall):
        return _ise_ball(density, x, bw)
    if density.dim == 2:
        return _ise_2d_tensor(density, x, kernel, bw)
    raise NotImplementedError(f"no ISE path for {density.abbrev} in d={density.dim}")


GRID_METHODS_1D = ("pco", "ucv")
CLOSED_METHODS_1D = ("rot", "rot0", "bcv", "sjste", "sjdpi")
GRID_METHODS_MD = ("pco", "ucv", "scv", "pi")
METHODS_BY_DIM = {
    1: GRID_METHODS_1D + CLOSED_METHODS_1D,
    "md": GRID_METHODS_MD + ("rot",),
}


@dataclass(frozen=True)
class MethodSpec:
    """One selector configuration for the harness."""

    method: str
    kernel: str = "gaussian"
    lam: float = 1.0
    grid: str = "diagonal"  # 'diagonal' or 'rotated' (d >= 2)
    grid_size: int | None = None

    def needs_grid(self, dim: int) -> bool:
        if dim == 1:
            return self.method in GRID_METHODS_1D
        return self.method in GRID_METHODS_MD


def build_grid(spec: MethodSpec, dim: int, n: int, sample=None) -> BandwidthGrid | None:
    """Construct the grid a spec needs (None for closed-form selectors)."""
    if not spec.needs_grid(dim):
        return None
    if dim == 1:
        return univariate_grid(n, spec.kernel, count=spec.grid_size or 400)
    count = spec.grid_size or 16**dim
    if spec.grid == "rotated":
        if sample is None:
            raise PcoKdeError("rotated grids require the sample")
        return rotated_grid(sample, n=n, kernel=spec.kernel, count=count)
    return diagonal_grid(n, dim, spec.kernel, count=count)


def select_bandwidth(sample, spec: MethodSpec, grid: BandwidthGrid | None = None) -> SelectionResult:
    """Dispatch one selector run according to a :class:`MethodSpec`."""
    x = np.asarray(sample, dtype=float)
    dim = 1 if x.ndim == 1 else x.shape[1]
    if dim == 1:
        x = x.ravel()
        if spec.method in ("rot", "rot0"):
            return rot_select(x, spec.method)
        if spec.method == "bcv":
            return bcv_select(x, spec.kernel)
        if spec.method in ("sjste", "sjdpi"):
            return sj_select(x, spec.kernel, mode=spec.method[2:])
        if grid is None:
            grid = build_grid(spec, 1, x.size)
        if spec.method == "pco":
            return pco_select_1d(x, spec.kernel, grid, lam=spec.lam)
        if spec.method == "ucv":
            return ucv_select_1d(x, spec.kernel, grid)
        raise PcoKdeError(f"method {spec.method!r} is not available in 1D")
    if spec.method == "rot":
        return rot_select_md(x)
    if grid is None:
        grid = build_grid(spec, dim, x.shape[0], sample=x)
    if spec.method == "pco":
        return pco_select_md(x, grid, lam=spec.lam)
    if spec.method == "ucv":
        return ucv_select_md(x, grid)
    if spec.method == "scv":
        return scv_select_md(x, grid)
    if spec.method == "pi":
        return pi_select_md(x, grid)
    raise PcoKdeError(f"method {spec.method!r} is not available in d={dim}")


@dataclass
class RiskReport:
    """Per-trial ISE^(1/2) values and aggregates for one experiment cell."""

    density: str
    dim: int
    method: str
    kernel: str
    lam: float
    grid: str
    n: int
    master_seed: int
    seeds: tuple = ()
    ise_sqrt: tuple = ()
    chosen_vech: tuple = ()
    statuses: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def _ok_values(self) -> np.ndarray:
        vals = np.array([v for v, s in zip(self.ise_sqrt, self.statuses) if s == "ok"])
        return vals

    @property
    def mean(self) -> float:
        vals = self._ok_values()
        return float(vals.mean()) if vals.size else float("nan")

    @property
    def median(self) -> float:
        vals = self._ok_values()
        return float(np.median(vals)) if vals.size else float("nan")

    @property
    def failures(self) -> int:
        return sum(1 for s in self.statuses if s != "ok")

    @property
    def invalid(self) -> bool:
        return self.failures > 0.1 * len(self.statuses)

    def rows(self):
        """Tidy rows matching the report CSV schema."""
        for t, (seed, val, vech, status) in enumerate(
                zip(self.seeds, self.ise_sqrt, self.chosen_vech, self.statuses)):
            yield {
                "density": self.density, "method": self.method, "kernel": self.kernel,
                "grid": self.grid if self.dim > 1 else "univariate",
                "lambda": self.lam, "n": self.n, "trial": t, "seed": seed,
                "ise_sqrt": val, "chosen_bandwidth_vech":
                    " ".join(repr(v) for v in vech),
                "status": status,
            }


def trial_seed(master_seed: int, density: BenchmarkDensity, n: int, trial: int) -> int:
    """Sample stream for one trial; method-independent so designs pair."""
    return derive_seed(master_seed, "trial", density.abbrev, density.dim, n, trial)


def _run_trial(density: BenchmarkDensity, spec: MethodSpec, n: int,
               master_seed: int, trial: int, shared_grid: BandwidthGrid | None):
    seed = trial_seed(master_seed, density, n, trial)
    sample = density.sample(n, seed)
    if density.dim == 1:
        sample = sample.ravel()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = select_bandwidth(sample, spec, grid=shared_grid)
            value = ise(density, sample, spec.kernel, result.chosen)
        return (trial, seed, math.sqrt(max(value, 0.0)),
                tuple(result.chosen.vech.tolist()), "ok")
    except PcoKdeError as exc:
        return trial, seed, float("nan"), (), f"failed:{type(exc).__name__}"


def monte_carlo_risk(density: BenchmarkDensity, spec: MethodSpec, n: int,
                     trials: int, master_seed: int, workers: int = 1) -> RiskReport:
    """Monte-Carlo ISE^(1/2) over paired trials for one (density, method, n) cell."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    shared_grid = None
    if spec.needs_grid(density.dim) and not (density.dim > 1 and spec.grid == "rotated"):
        shared_grid = build_grid(spec, density.dim, n)
    args = [(density, spec, n, master_seed, t, shared_grid) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial_star, args))
    else:
        results = [_run_trial(*a) for a in args]
    results.sort(key=lambda r: r[0])
    return RiskReport(
        density=density.abbrev, dim=density.dim, method=spec.method,
        kernel=get_kernel(spec.kernel).name, lam=spec.lam, grid=spec.grid,
        n=n, master_seed=master_seed,
        seeds=tuple(r[1] for r in results),
        ise_sqrt=tuple(r[2] for r in results),
        chosen_vech=tuple(r[3] for r in results),
        statuses=tuple(r[4] for r in results),
    )


def _run_trial_star(args):
    return _run_trial(*args)


def lambda_sweep(density: BenchmarkDensity, n: int, trials: int, lambdas,
                 kernel="gaussian", master_seed: int = 0,
                 grid_size: int | None = None, grid: str = "diagonal"):
    """Per-lambda Monte-Carlo risk of the comparison-to-overfitting selector.

    The lambda-independent part of the criterion is computed once per
    trial and reused across the whole lambda list (the criterion is
    affine in lambda).  Returns a list of rows with mean ISE and mean
    ISE^(1/2) per lambda, plus the per-trial chosen bandwidths.
    """
    lambdas = [float(v) for v in lambdas]
    kernel = get_kernel(kernel)
    if density.dim == 1:
        shared_grid = univariate_grid(n, kernel, count=grid_size or 400)
    else:
        shared_grid = diagonal_grid(n, density.dim, kernel, count=grid_size or 16**density.dim)
    dets = np.array([m.det for m in shared_grid.members])
    per_trial_chosen = []
    ise_by_lam = {lam: [] for lam in lambdas}
    for t in range(trials):
        seed = trial_seed(master_seed, density, n, t)
        sample = density.sample(n, seed)
        if density.dim == 1:
            data = sample.ravel()
            base, slope = pco_criterion_parts_1d(data, kernel, shared_grid)
        else:
            data = sample
            base, slope = pco_criterion_parts_md(data, shared_grid)
        chosen_row = []
        cache: dict[int, float] = {}
        for lam in lambdas:
            values = base + lam * slope
            finite = np.isfinite(values)
            vmin = values[finite].min()
            ties = np.nonzero(values == vmin)[0]
            idx = int(ties[np.argmin(dets[ties])])
            if idx not in cache:
                cache[idx] = ise(density, data, kernel, shared_grid.members[idx])
            ise_by_lam[lam].append(cache[idx])
            chosen_row.append(shared_grid.members[idx])
        per_trial_chosen.append(chosen_row)
    rows = []
    for lam in lambdas:
        vals = np.array(ise_by_lam[lam])
        rows.append({
            "density": density.abbrev, "lambda": lam, "n": n, "trials": trials,
            "mean_ise": float(vals.mean()),
            "mean_ise_sqrt": float(np.sqrt(np.maximum(vals, 0.0)).mean()),
            "median_ise": float(np.median(vals)),
        })
    return rows, per_trial_chosen


@dataclass
class RatioTable:
    """Benchmark-table ratio summaries across methods.

    ``r_med``: per (density, method), trial-paired median of
    ISE^(1/2)_method / ISE^(1/2)_reference (reference = the comparison
    selector).  ``r_meth_min``: mean ISE^(1/2) over the per-density best
    method's mean.  ``r_bar``: average of ``r_meth_min`` over densities.
    """

    r_med: dict
    r_meth_min: dict
    r_bar: dict


def ratio_stats(reports, reference: str = "pco") -> RatioTable:
    """Aggregate paired reports (one per density x method) into ratios."""
    by_density: dict[str, dict[str, RiskReport]] = {}
    for rep in reports:
        by_density.setdefault(rep.density, {})[rep.method] = rep
    r_med: dict = {}
    r_meth_min: dict = {}
    sums: dict[str, list] = {}
    for density, methods in by_density.items():
        seed_sets = {rep.seeds for rep in methods.values()}
        if len(seed_sets) != 1:
            raise UnpairedReports(f"reports for {density} do not share trial seeds")
        means = {m: rep.mean for m, rep in methods.items()}
        best = min(means.values())
        for m, rep in methods.items():
            r_meth_min[(density, m)] = means[m] / best
            sums.setdefault(m, []).append(means[m] / best)
            if reference in methods:
                ref_vals = np.array(methods[reference].ise_sqrt)
                vals = np.array(rep.ise_sqrt)
                ok = np.array([s == "ok" for s in rep.statuses]) \
                    & np.array([s == "ok" for s in methods[reference].statuses])
                if ok.any():
                    r_med[(density, m)] = float(np.median(vals[ok] / ref_vals[ok]))
    r_bar = {m: float(np.mean(v)) for m, v in sums.items()}
    return RatioTable(r_med=r_med, r_meth_min=r_meth_min, r_bar=r_bar)
