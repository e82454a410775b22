"""Benchmark mixture densities with exact pdf evaluation and seeded sampling.

The catalog holds 19 univariate densities and 14 densities for each of
d = 2, 3, 4.  Covariances are entered as vech tuples (lower triangle,
column-wise).  A handful of printed d >= 3 covariances (Strong Skewed,
Dumbbell, Kurtotic, Asymmetric Fountain) decode non-positive-definite --
pairwise correlation -0.9 cannot hold between three or more coordinates
-- so those are projected to the nearest SPD matrix by clamping
eigenvalues at 1e-8, flagged on the component and warned about once.

Sampling uses the counter-based Philox generator keyed by a BLAKE2 hash
of (master seed, labels), so streams are reproducible across platforms
and independent per (density, n, trial).
"""

from __future__ import annotations

import hashlib
import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, ndtr

from . import linalg
from .errors import ClampedCovarianceWarning, DimensionMismatch, UnsupportedDimension

_EIG_FLOOR = 1e-8


def derive_seed(master_seed: int, *labels) -> int:
    """Stable 128-bit stream key from a master seed and arbitrary labels."""
    text = repr((int(master_seed),) + tuple(labels)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=16).digest(), "big")


def make_rng(master_seed: int, *labels) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(master_seed, *labels)))


@dataclass(frozen=True)
class GaussianComponent:
    mean: tuple
    covariance: tuple  # nested tuple rows
    clamped: bool = False

    @property
    def dim(self) -> int:
        return len(self.mean)

    def _cov(self) -> np.ndarray:
        return np.asarray(self.covariance, dtype=float)

    def _chol(self) -> np.ndarray:
        return np.linalg.cholesky(self._cov())

    def pdf(self, x: np.ndarray) -> np.ndarray:
        chol = self._chol()
        delta = np.atleast_2d(x) - np.asarray(self.mean)
        z = np.linalg.solve(chol, delta.T)
        q = np.sum(z * z, axis=0)
        norm = (2.0 * np.pi) ** (self.dim / 2.0) * np.prod(np.diag(chol))
        return np.exp(-0.5 * q) / norm

    def cdf(self, x: np.ndarray) -> np.ndarray:
        if self.dim != 1:
            raise UnsupportedDimension("component cdf only available in 1D")
        sd = math.sqrt(self._cov()[0, 0])
        return ndtr((np.asarray(x, dtype=float) - self.mean[0]) / sd)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        z = rng.standard_normal((m, self.dim))
        return np.asarray(self.mean) + z @ self._chol().T

    def moments(self):
        return np.asarray(self.mean, dtype=float), self._cov()

    def support_box(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self._cov()))
        mean = np.asarray(self.mean, dtype=float)
        return np.stack([mean - 8.0 * sd, mean + 8.0 * sd], axis=1)


@dataclass(frozen=True)
class UniformBox:
    intervals: tuple  # ((lo, hi), ...) per axis

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        inside = np.ones(x.shape[0], dtype=bool)
        vol = 1.0
        for axis, (lo, hi) in enumerate(self.intervals):
            inside &= (x[:, axis] >= lo) & (x[:, axis] <= hi)
            vol *= hi - lo
        return np.where(inside, 1.0 / vol, 0.0)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        if self.dim != 1:
            raise UnsupportedDimension("component cdf only available in 1D")
        lo, hi = self.intervals[0]
        return np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        u = rng.random((m, self.dim))
        lo = np.array([iv[0] for iv in self.intervals])
        hi = np.array([iv[1] for iv in self.intervals])
        return lo + u * (hi - lo)

    def moments(self):
        lo = np.array([iv[0] for iv in self.intervals])
        hi = np.array([iv[1] for iv in self.intervals])
        return 0.5 * (lo + hi), np.diag((hi - lo) ** 2 / 12.0)

    def support_box(self) -> np.ndarray:
        return np.asarray(self.intervals, dtype=float)


@dataclass(frozen=True)
class UniformBall:
    center: tuple
    radius: float

    @property
    def dim(self) -> int:
        return len(self.center)

    def volume(self) -> float:
        d = self.dim
        return math.exp(d / 2.0 * math.log(math.pi) + d * math.log(self.radius)
                        - gammaln(d / 2.0 + 1.0))

    def pdf(self, x: np.ndarray) -> np.ndarray:
        delta = np.atleast_2d(x) - np.asarray(self.center)
        inside = np.sum(delta * delta, axis=1) <= self.radius**2
        return np.where(inside, 1.0 / self.volume(), 0.0)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        # Polar method: uniform direction times radius ~ r * U^(1/d).
        z = rng.standard_normal((m, self.dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        rad = self.radius * rng.random(m) ** (1.0 / self.dim)
        return np.asarray(self.center) + z * rad[:, None]

    def moments(self):
        d = self.dim
        cov = self.radius**2 / (d + 2.0) * np.eye(d)
        return np.asarray(self.center, dtype=float), cov

    def support_box(self) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        return np.stack([c - self.radius, c + self.radius], axis=1)


@dataclass(frozen=True)
class ExponentialComponent:
    rate: float

    dim = 1

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)[:, 0]
        return np.where(x >= 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, 1.0 - np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        u = rng.random(m)
        return (-np.log1p(-u) / self.rate)[:, None]

    def moments(self):
        return np.array([1.0 / self.rate]), np.array([[1.0 / self.rate**2]])

    def support_box(self) -> np.ndarray:
        return np.array([[0.0, 40.0 / self.rate]])


@dataclass(frozen=True)
class BenchmarkDensity:
    """A finite mixture over the component grammar above."""

    name: str
    abbrev: str
    dim: int
    weights: tuple
    components: tuple

    def __post_init__(self):
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"{self.abbrev}: weights sum to {total!r}, not 1")
        for comp in self.components:
            if comp.dim != self.dim:
                raise DimensionMismatch(f"{self.abbrev}: component dim {comp.dim} != {self.dim}")

    def _check_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and x.ndim == 1:
            x = x[:, None]
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise DimensionMismatch(f"points have dim {x.shape[1]}, density has {self.dim}")
        return x

    def pdf(self, x) -> np.ndarray:
        """Mixture density at each point (rows of ``x``)."""
        x = self._check_points(x)
        out = np.zeros(x.shape[0])
        for w, comp in zip(self.weights, self.components):
            out += w * comp.pdf(x)
        return out

    def cdf(self, x) -> np.ndarray:
        """Mixture distribution function (univariate densities only)."""
        if self.dim != 1:
            raise UnsupportedDimension("cdf implemented for 1D densities only")
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for w, comp in zip(self.weights, self.components):
            out += w * comp.cdf(x)
        return out

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Draw ``n`` i.i.d. observations, bit-reproducible for a seed."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = make_rng(seed, "sample", self.abbrev, self.dim, n)
        cum = np.cumsum(self.weights)
        idx = np.searchsorted(cum, rng.random(n), side="right")
        idx = np.minimum(idx, len(self.components) - 1)
        out = np.empty((n, self.dim))
        for k, comp in enumerate(self.components):
            mask = idx == k
            m = int(mask.sum())
            if m:
                out[mask] = comp.sample(rng, m)
        return out

    def moments(self):
        """Analytic mixture mean and covariance from component moments."""
        mean = np.zeros(self.dim)
        second = np.zeros((self.dim, self.dim))
        for w, comp in zip(self.weights, self.components):
            m, c = comp.moments()
            mean += w * m
            second += w * (c + np.outer(m, m))
        return mean, second - np.outer(mean, mean)

    def support_box(self) -> np.ndarray:
        boxes = np.stack([comp.support_box() for comp in self.components])
        return np.stack([boxes[:, :, 0].min(axis=0), boxes[:, :, 1].max(axis=0)], axis=1)

    @property
    def is_gaussian_mixture(self) -> bool:
        return all(isinstance(c, GaussianComponent) for c in self.components)

    @property
    def clamped(self) -> bool:
        return any(getattr(c, "clamped", False) for c in self.components)


def _gauss1(weight, mean, sd):
    return weight, GaussianComponent(mean=(float(mean),), covariance=((float(sd) ** 2,),))


def _gauss(weight, mean, vech_entries, scale=1.0, label=""):
    cov = scale * linalg.unvech(np.asarray(vech_entries, dtype=float))
    vals = linalg.sym_eig(cov).eigenvalues
    clamped = bool(vals.min() <= _EIG_FLOOR)
    if clamped:
        rot, vals = linalg.sym_eig(cov)
        cov = linalg.symmetrize(rot.T @ np.diag(np.maximum(vals, _EIG_FLOOR)) @ rot)
        warnings.warn(
            f"component covariance in {label} decodes non-SPD; eigenvalues clamped at {_EIG_FLOOR:g}",
            ClampedCovarianceWarning, stacklevel=2)
    mean = tuple(float(v) for v in np.atleast_1d(mean))
    return weight, GaussianComponent(mean=mean, covariance=tuple(map(tuple, cov)),
                                     clamped=clamped)


def _density(name, abbrev, dim, parts) -> BenchmarkDensity:
    weights = tuple(float(w) for w, _ in parts)
    comps = tuple(c for _, c in parts)
    return BenchmarkDensity(name=name, abbrev=abbrev, dim=dim,
                            weights=weights, components=comps)


def _equi(d, diag, off):
    """vech of the matrix with constant diagonal and constant off-diagonal."""
    out = []
    for j in range(d):
        for i in range(j, d):
            out.append(diag if i == j else off)
    return out


def _diag_vech(entries):
    d = len(entries)
    out = []
    for j in range(d):
        for i in range(j, d):
            out.append(entries[j] if i == j else 0.0)
    return out


def _first_axis_vech(d, first, others, off_first, off_rest):
    """vech with diag (first, others...), first-row off-diagonals off_first,
    remaining off-diagonals off_rest."""
    full = np.full((d, d), off_rest)
    full[0, :] = off_first
    full[:, 0] = off_first
    diag = [first] + [others] * (d - 1)
    full[np.diag_indices(d)] = diag
    return linalg.vech(full)


def _zoo_1d() -> list[BenchmarkDensity]:
    out = []
    out.append(_density("Gauss", "G", 1, [_gauss1(1.0, 0.0, 1.0)]))
    out.append(_density("Uniform", "U", 1, [(1.0, UniformBox(intervals=((0.0, 1.0),)))]))
    out.append(_density("Exponential", "E", 1, [(1.0, ExponentialComponent(rate=1.0))]))
    out.append(_density("Mix Gauss", "MG", 1,
                        [_gauss1(0.5, 0.0, 1.0), _gauss1(0.5, 3.0, 1.0 / 3.0)]))
    out.append(_density("Skewed", "Sk", 1,
                        [_gauss1(1 / 5, 0.0, 1.0),
                         _gauss1(1 / 5, 0.5, 2 / 3),
                         _gauss1(3 / 5, 13 / 12, 5 / 9)]))
    out.append(_density("Strong Skewed", "Sk+", 1,
                        [_gauss1(1 / 8, 3.0 * ((2 / 3) ** l - 1.0), (2 / 3) ** l)
                         for l in range(8)]))
    out.append(_density("Kurtotic", "K", 1,
                        [_gauss1(2 / 3, 0.0, 1.0), _gauss1(1 / 3, 0.0, 0.1)]))
    out.append(_density("Outlier", "O", 1,
                        [_gauss1(1 / 10, 0.0, 1.0), _gauss1(9 / 10, 0.0, 0.1)]))
    out.append(_density("Bimodal", "Bi", 1,
                        [_gauss1(0.5, -1.0, 2 / 3), _gauss1(0.5, 1.0, 2 / 3)]))
    out.append(_density("Separated Bimodal", "SB", 1,
                        [_gauss1(0.5, -1.5, 0.5), _gauss1(0.5, 1.5, 0.5)]))
    out.append(_density("Skewed Bimodal", "SkB", 1,
                        [_gauss1(3 / 4, 0.0, 1.0), _gauss1(1 / 4, 1.5, 1 / 3)]))
    out.append(_density("Trimodal", "T", 1,
                        [_gauss1(9 / 20, -1.2, 3 / 5), _gauss1(9 / 20, 1.2, 3 / 5),
                         _gauss1(1 / 10, 0.0, 0.25)]))
    out.append(_density("Bart", "B", 1,
                        [_gauss1(0.5, 0.0, 1.0)]
                        + [_gauss1(1 / 10, l / 2.0 - 1.0, 0.1) for l in range(5)]))
    out.append(_density("Double Bart", "DB", 1,
                        [_gauss1(49 / 100, -1.0, 2 / 3), _gauss1(49 / 100, 1.0, 2 / 3)]
                        + [_gauss1(1 / 350, (l - 3) / 2.0, 0.01) for l in range(7)]))
    out.append(_density("Asymmetric Bart", "AB", 1,
                        [_gauss1(0.5, 0.0, 1.0)]
                        + [_gauss1(2.0 ** (1 - l) / 31.0, l + 0.5, 2.0 ** (-l) / 10.0)
                           for l in range(-2, 3)]))
    out.append(_density("Asymmetric Double Bart", "ADB", 1,
                        [_gauss1(46 / 100, 2.0 * l - 1.0, 2 / 3) for l in range(2)]
                        + [_gauss1(1 / 300, -l / 2.0, 0.01) for l in range(1, 4)]
                        + [_gauss1(7 / 300, l / 2.0, 0.07) for l in range(1, 4)]))
    out.append(_density("Smooth Comb", "SC", 1,
                        [_gauss1(2.0 ** (5 - l) / 63.0,
                                 (65.0 - 96.0 * 0.5**l) / 21.0,
                                 (32.0 / 63.0) * 0.5**l)
                         for l in range(6)]))
    out.append(_density("Discrete Comb", "DC", 1,
                        [_gauss1(2 / 7, (12.0 * l - 15.0) / 7.0, 2 / 7) for l in range(3)]
                        + [_gauss1(1 / 21, 2.0 * l / 7.0, 1 / 21) for l in range(8, 11)]))
    mu_edges = [0.0, 3 / 20, 1 / 5, 3 / 8, 1 / 2, 3 / 5, 4 / 5, 7 / 8, 1.0]
    mu_weights = [1 / 25, 29 / 200, 17 / 200, 1 / 20, 7 / 50, 1 / 5, 7 / 50, 1 / 5]
    out.append(_density("Mix Uniform", "MU", 1,
                        [(w, UniformBox(intervals=((a, b),)))
                         for w, a, b in zip(mu_weights, mu_edges[:-1], mu_edges[1:])]))
    return out


def _zoo_md(d: int) -> list[BenchmarkDensity]:
    out = []
    sq3 = 2.0 / math.sqrt(3.0)
    eye = _equi(d, 1.0, 0.0)

    if d == 2:
        ug = [0.25, 0.0, 1.0]
    elif d == 3:
        ug = _diag_vech([0.25, 1.0, 1.0])
    else:
        ug = _diag_vech([0.25, 0.25, 1.0, 1.0])
    out.append(_density("Uncorrelated Gauss", "UG", d, [_gauss(1.0, [0.0] * d, ug, label="UG")]))
    out.append(_density("Correlated Gauss", "CG", d,
                        [_gauss(1.0, [0.0] * d, _equi(d, 1.0, 0.9), label="CG")]))
    out.append(_density("Uniform", "U", d,
                        [(1.0, UniformBall(center=(2.0,) * d, radius=1.0))]))

    skp = []
    for l in range(8):
        m = 3.0 * (1.0 - 0.8**l)
        mean = [m if j % 2 == 0 else -m for j in range(d)]
        if d == 2:
            cov = _equi(2, 0.8 ** (2 * l), -0.9 * 0.8 ** (2 * l))
        else:
            cov = _equi(d, 0.8 ** (2 * l), -0.9 * 0.8 ** (2 * (l - 1)))
        skp.append(_gauss(1 / 8, mean, cov, label="Sk+"))
    out.append(_density("Strong Skewed", "Sk+", d, skp))

    out.append(_density("Skewed", "Sk", d,
                        [_gauss(1 / 5, [0.0] * d, eye, label="Sk"),
                         _gauss(1 / 5, [5.0] * d, eye, scale=4 / 9, label="Sk"),
                         _gauss(3 / 5, [10.0] * d, eye, scale=25 / 81, label="Sk")]))

    alt = [(-1.0) ** j for j in range(d)]          # (+1, -1, +1, ...) sign pattern
    m_d = [-1.5 * s for s in alt]
    out.append(_density("Dumbbell", "D", d,
                        [_gauss(4 / 11, m_d, eye, scale=9 / 16, label="D"),
                         _gauss(4 / 11, [-v for v in m_d], eye, scale=9 / 16, label="D"),
                         _gauss(3 / 11, [0.0] * d, _equi(d, 4 / 5, -18 / 25),
                                scale=9 / 16, label="D")]))

    k_first = _first_axis_vech(d, first=1.0, others=4.0, off_first=1.0, off_rest=1.0)
    k_scale = 9 / 16 if d == 2 else 1.0
    out.append(_density("Kurtotic", "K", d,
                        [_gauss(2 / 3, [0.0] * d, k_first, scale=k_scale, label="K"),
                         _gauss(1 / 3, [0.0] * d, _equi(d, 4 / 9, -1 / 3),
                                scale=k_scale, label="K")]))

    bi_cov = _equi(d, 4 / 9, 2 / 9)
    e1 = [1.0] + [0.0] * (d - 1)
    out.append(_density("Bimodal", "Bi", d,
                        [_gauss(0.5, [-v for v in e1], bi_cov, label="Bi"),
                         _gauss(0.5, e1, bi_cov, label="Bi")]))

    bi2_mean = [-1.0] + [1.0] * (d - 1)
    out.append(_density("Bimodal 2", "Bi2", d,
                        [_gauss(0.5, bi2_mean, _equi(d, 4 / 9, 1 / 3), label="Bi2"),
                         _gauss(0.5, [0.0] * d, eye, scale=4 / 9, label="Bi2")]))

    out.append(_density("Asymmetric Bimodal", "ABi", d,
                        [_gauss(0.5, alt, _equi(d, 4 / 9, 14 / 45), label="ABi"),
                         _gauss(0.5, [-v for v in alt], eye, scale=4 / 9, label="ABi")]))

    t_first = _first_axis_vech(d, first=9.0, others=49 / 4, off_first=63 / 10,
                               off_rest=63 / 10)
    t_rest = _first_axis_vech(d, first=9.0, others=49 / 4, off_first=0.0, off_rest=0.0)
    out.append(_density("Trimodal", "T", d,
                        [_gauss(3 / 7, [-1.0] + [0.0] * (d - 1), t_first,
                                scale=1 / 25, label="T"),
                         _gauss(3 / 7, [1.0] + [sq3] * (d - 1), t_rest,
                                scale=1 / 25, label="T"),
                         _gauss(1 / 7, [1.0] + [-sq3] * (d - 1), t_rest,
                                scale=1 / 25, label="T")]))

    corner_w = {2: 1 / 10, 3: 1 / 18, 4: 1 / 34}[d]
    corners = [_gauss(corner_w, mean, eye, scale=1 / 16, label="F")
               for mean in itertools.product((-1.0, 1.0), repeat=d)]
    out.append(_density("Fountain", "F", d,
                        [_gauss(0.5, [0.0] * d, eye, label="F"),
                         _gauss(corner_w, [0.0] * d, eye, scale=1 / 16, label="F")]
                        + corners))

    df_big = _equi(d, 4 / 9, 4 / 15)
    df_small = _equi(d, 1 / 225, 1 / 375)
    df = [_gauss(12 / 25, [-1.5] + [0.0] * (d - 1), df_big, label="DF"),
          _gauss(12 / 25, [1.5] + [0.0] * (d - 1), df_big, label="DF"),
          _gauss(8 / 350, [0.0] * d, _equi(d, 1.0, 3 / 5), scale=1 / 9, label="DF")]
    for i in (-1, 0, 1):
        df.append(_gauss(1 / 350, [i - 1.5] + [float(i)] * (d - 1), df_small, label="DF"))
    for j in (-1, 0, 1):
        df.append(_gauss(1 / 350, [j + 1.5] + [float(j)] * (d - 1), df_small, label="DF"))
    out.append(_density("Double Fountain", "DF", d, df))

    corr = _equi(d, 1.0, -0.9)
    if d == 2:
        af = [_gauss(0.5, [0.0, 0.0], eye, label="AF"),
              _gauss(3 / 40, [0.0, 0.0], corr, scale=1 / 16, label="AF"),
              _gauss(1 / 5, [1.0, 1.0], corr, scale=1 / 4, label="AF"),
              _gauss(3 / 40, [-1.0, 1.0], eye, scale=1 / 8, label="AF"),
              _gauss(3 / 40, [-1.0, -1.0], corr, scale=1 / 8, label="AF"),
              _gauss(3 / 40, [1.0, -1.0], eye, scale=1 / 16, label="AF")]
        out.append(_density("Asymmetric Fountain", "AF", 2, af))
    else:
        af = [_gauss(0.5, [0.0] * d, eye, label="AF"),
              _gauss(3 / 40, [0.0] * d, corr, scale=1 / 16, label="AF"),
              _gauss(1 / 5, [-1.0] * d, corr, scale=1 / 4, label="AF")]
        if d == 3:
            small_w, k_corr, k_eye = 9 / 280, 4, 3
        else:
            small_w, k_corr, k_eye = 9 / 600, 8, 7
        for k in range(1, k_corr + 1):
            mean = [1.0, (-1.0) ** ((2 * k + 1) // 2), (-1.0) ** ((2 * k + 3) // 4)]
            if d == 4:
                mean.append((-1.0) ** ((2 * k + 7) // 8))
            af.append(_gauss(small_w, mean, corr, scale=1.0 / 2 ** (k + 2), label="AF"))
        for k in range(1, k_eye + 1):
            mean = [-1.0, (-1.0) ** ((2 * k + 2) // 2), (-1.0) ** ((2 * k + 4) // 4)]
            if d == 4:
                mean.append((-1.0) ** ((2 * k + 8) // 8))
            af.append(_gauss(small_w, mean, eye, scale=1.0 / 2 ** (k + 2), label="AF"))
        out.append(_density("Asymmetric Fountain", "AF", d, af))
    return out


@lru_cache(maxsize=None)
def zoo(dim: int) -> tuple:
    """The benchmark catalog for one dimension (19 densities at d=1, else 14)."""
    if dim == 1:
        return tuple(_zoo_1d())
    if dim in (2, 3, 4):
        return tuple(_zoo_md(dim))
    raise UnsupportedDimension(f"benchmark densities cover dims 1..4, got {dim}")


def get_density(dim: int, key: str) -> BenchmarkDensity:
    """Look up a density by abbreviation (preferred) or full name."""
    key_low = str(key).lower()
    for dens in zoo(dim):
        if dens.abbrev.lower() == key_low or dens.name.lower() == key_low:
            return dens
    raise KeyError(f"no density {key!r} in dimension {dim}")
