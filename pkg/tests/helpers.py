"""Shared quadrature oracles for the test suite.

Everything here is deliberately independent of the library's closed
forms: adaptive quadrature in 1D, Simpson tensor grids in 2D,
Gauss-Hermite tensors for squared-kernel norms.  These are test-only
reference computations.
"""

import numpy as np
from scipy.integrate import quad, simpson

from pcokde.kernels import Bandwidth, get_kernel, kde_eval, kernel_eval


def composite_gl_1d(fn, breakpoints, order=24):
    """Composite Gauss-Legendre quadrature over consecutive segments.

    ``fn`` must accept a vector of points; all nodes are evaluated in one
    call.  Exact for piecewise polynomials up to degree 2*order-1 on the
    segments.
    """
    edges = np.unique(np.asarray(breakpoints, dtype=float))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * (edges[1:] - edges[:-1])
    pts = (mids[:, None] + halves[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(fn(pts)).reshape(mids.size, order)
    return float(np.sum(halves * (vals * weights[None, :]).sum(axis=1)))


def _kde_diff_breaks(x, kernel, h_a, h_b):
    kernel = get_kernel(kernel)
    if kernel.name == "gaussian":
        pad = 9.0 * max(h_a, h_b)
        base = np.sort(x)
        extra = np.linspace(x.min() - pad, x.max() + pad, 40)
        return np.concatenate([base, extra])
    # compact support: kinks at every X_i +- h
    pts = np.concatenate([x + s * h for h in (h_a, h_b) for s in (-1, 1)])
    return np.concatenate([pts, [x.min() - max(h_a, h_b), x.max() + max(h_a, h_b)]])


def quad_norm_diff_1d(x, kernel, h_a, h_b, tol=1e-12):
    """Numeric quadrature of the squared distance between two KDEs."""
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    bw_a, bw_b = Bandwidth.scalar(h_a), Bandwidth.scalar(h_b)

    def fn(pts):
        return (kde_eval(x, kernel, bw_a, pts) - kde_eval(x, kernel, bw_b, pts)) ** 2

    return composite_gl_1d(fn, _kde_diff_breaks(x, kernel, h_a, h_b))


def quad_kernel_diff_norm_1d(kernel, h, h_min, tol=1e-13):
    """Adaptive quadrature of the squared norm |K_hmin - K_h|^2."""
    kernel = get_kernel(kernel)
    bw, bw_min = Bandwidth.scalar(h), Bandwidth.scalar(h_min)
    if kernel.name == "gaussian":
        lim = 10.0 * max(h, h_min)
    else:
        lim = max(h, h_min)

    def integrand(t):
        pt = np.array([t])
        return float((kernel_eval(kernel, bw_min, pt)[0] - kernel_eval(kernel, bw, pt)[0]) ** 2)

    val, _ = quad(integrand, -lim, lim, points=[-h_min, 0.0, h_min],
                  limit=400, epsabs=tol, epsrel=1e-11)
    return val


def quad_penalty_1d(kernel, h, h_min, lam, n):
    """Penalty via its defining integrals (oracle for the closed form)."""
    kernel = get_kernel(kernel)
    return (lam * kernel.norm2 / h - quad_kernel_diff_norm_1d(kernel, h, h_min)) / n


def quad_ise_1d(density, x, kernel, h, tol=1e-12):
    """Numeric quadrature of the ISE of a univariate KDE.

    Composite Gauss-Legendre with segment edges at every KDE kink
    (observations +- support for compact kernels), every mixture
    component boundary, and a dense baseline partition.
    """
    kernel = get_kernel(kernel)
    x = np.asarray(x, dtype=float).ravel()
    bw = Bandwidth.scalar(h)
    box = density.support_box()[0]
    pad = 9.0 * h if kernel.name == "gaussian" else h
    lo = min(box[0], x.min() - pad)
    hi = max(box[1], x.max() + pad)
    breaks = {lo, hi}
    for comp in density.components:
        cb = comp.support_box()[0]
        breaks.update([float(cb[0]), float(cb[1])])
    if kernel.name != "gaussian":
        breaks.update((x - h).tolist())
        breaks.update((x + h).tolist())
    breaks.update(np.linspace(lo, hi, 128).tolist())
    edges = sorted(b for b in breaks if lo <= b <= hi)

    def fn(pts):
        return (kde_eval(x, kernel, bw, pts) - density.pdf(pts)) ** 2

    return composite_gl_1d(fn, edges)


def simpson_grid_2d(func, lo, hi, m):
    """Simpson tensor integration of func over the box [lo, hi] (vectorized)."""
    axes = [np.linspace(lo[k], hi[k], m) for k in range(2)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = func(pts).reshape(m, m)
    return float(simpson(simpson(vals, x=axes[1], axis=1), x=axes[0]))


def simpson_norm_diff_2d(x, bw_a, bw_b, m=501, pad=6.0):
    """Simpson tensor quadrature of the squared distance of two 2-D KDEs."""
    x = np.asarray(x, dtype=float)
    spread = max(float(bw_a.eigenvalues.max()), float(bw_b.eigenvalues.max()))
    lo = x.min(axis=0) - pad * spread
    hi = x.max(axis=0) + pad * spread

    def func(pts):
        return (kde_eval(x, "gaussian", bw_a, pts) - kde_eval(x, "gaussian", bw_b, pts)) ** 2

    return simpson_grid_2d(func, lo, hi, m)


def simpson_ise_2d(density, x, bw, m=501, pad=6.0):
    """Simpson tensor quadrature of the ISE of a 2-D Gaussian KDE."""
    x = np.asarray(x, dtype=float)
    box = density.support_box()
    spread = float(bw.eigenvalues.max())
    lo = np.minimum(box[:, 0], x.min(axis=0) - pad * spread)
    hi = np.maximum(box[:, 1], x.max(axis=0) + pad * spread)

    def func(pts):
        return (kde_eval(x, "gaussian", bw, pts) - density.pdf(pts)) ** 2

    return simpson_grid_2d(func, lo, hi, m)


def gauss_conv_numeric_2d(cov_a, cov_b, u, m=201, pad=9.0):
    """Numeric convolution of two centered 2-D Gaussians evaluated at u."""
    from pcokde.kernels import gaussian_density

    sd = np.sqrt(max(np.max(np.diag(cov_a)), np.max(np.diag(cov_b))))
    lo = -pad * sd * np.ones(2)
    hi = pad * sd * np.ones(2)

    def func(t):
        return gaussian_density(t, cov_a) * gaussian_density(u[None, :] - t, cov_b)

    return simpson_grid_2d(func, lo, hi, m)


def gauss_hermite_norm2(cov, order=48):
    """Tensor Gauss-Hermite value of the squared L2 norm of a N(0, cov) density."""
    from numpy.polynomial.hermite_e import hermegauss

    from pcokde.kernels import gaussian_density

    d = cov.shape[0]
    nodes, weights = hermegauss(order)
    chol = np.linalg.cholesky(cov)
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1) @ chol.T
    wts = np.ones(pts.shape[0])
    for k in range(d):
        wts *= np.meshgrid(*([weights] * d), indexing="ij")[k].ravel()
    vals = gaussian_density(pts, cov)
    # integral of f^2 = E_f[f], with the expectation under N(0, cov).
    return float(np.sum(wts * vals) / (2.0 * np.pi) ** (d / 2.0))


def rand_spd(rng, d, lo=0.3, hi=1.2):
    """Random SPD matrix with eigenvalues in [lo, hi]."""
    a = rng.standard_normal((d, d))
    q, _ = np.linalg.qr(a)
    vals = rng.uniform(lo, hi, size=d)
    return q @ np.diag(vals) @ q.T
