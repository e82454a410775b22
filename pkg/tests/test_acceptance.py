"""Acceptance gate: desk-scale reproduction targets and property checks.

Each test prints one [PASS]/[FAIL] line per criterion.  The Monte-Carlo
criteria run at a fixed master seed; their tolerances absorb 20-trial
sampling spread.  Large-scale cells (n = 10^4 multivariate, full 16^d
grids in d >= 3) and the d >= 3 catalogs with non-SPD printed
covariances are excluded as numeric targets and covered by the
property-based criteria instead.
"""

import itertools
import os
import subprocess
import sys
import time

import numpy as np

from pcokde import linalg
from pcokde.densities import get_density, zoo
from pcokde.grids import BandwidthGrid, diagonal_grid, univariate_grid
from pcokde.kernels import (
    BIWEIGHT,
    EPANECHNIKOV,
    GAUSSIAN,
    Bandwidth,
    gaussian_density,
    get_kernel,
    pairwise_comparison_norm,
    pco_penalty,
)
from pcokde.risk import MethodSpec, ise, lambda_sweep, monte_carlo_risk
from pcokde.select1d import (
    bcv_select,
    pco_criterion_parts_1d,
    pco_select_1d,
    rot_select,
    sj_select,
    ucv_select_1d,
)
from pcokde.selectmd import (
    PilotSpec,
    pco_criterion_parts_md,
    pco_select_md,
    psi4_hat,
    rot_select_md,
    ucv_select_md,
)

from helpers import (
    gauss_conv_numeric_2d,
    quad_ise_1d,
    quad_kernel_diff_norm_1d,
    quad_norm_diff_1d,
    rand_spd,
    simpson_grid_2d,
    simpson_ise_2d,
    simpson_norm_diff_2d,
)

MASTER_SEED = 20260808


def _report(cid: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
    assert ok, f"{cid}: {detail}"


def test_criterion_01_univariate_table_reproduction():
    targets = {
        "pco": {"G": 0.08, "MG": 0.13, "Bi": 0.09, "SC": 0.20, "MU": 0.50},
        "ucv": {"G": 0.08, "MG": 0.13, "Bi": 0.09, "SC": 0.20, "MU": 0.51},
    }
    results, ok = {}, True
    for method, cells in targets.items():
        for abbrev, target in cells.items():
            dens = get_density(1, abbrev)
            rep = monte_carlo_risk(dens, MethodSpec(method), 100, 20, MASTER_SEED)
            results[(method, abbrev)] = rep.mean
            ok &= abs(rep.mean - target) <= 0.03
    detail = "; ".join(f"{m}/{a}={v:.3f} (target {targets[m][a]}±0.03)"
                       for (m, a), v in results.items())
    _report("C1 univariate table", ok, detail)


def test_criterion_02_lambda_study():
    start = time.time()
    lambdas = [-0.2, 0.8, 1.0, 1.2]
    ok, parts = True, []
    for abbrev in ("G", "MG", "K"):
        dens = get_density(1, abbrev)
        rows, _ = lambda_sweep(dens, 100, 20, lambdas, master_seed=MASTER_SEED)
        risk = {r["lambda"]: r["mean_ise"] for r in rows}
        blow = risk[-0.2] / risk[1.0]
        plateau = max(abs(risk[a] - risk[b]) / min(risk[a], risk[b])
                      for a, b in itertools.combinations((0.8, 1.0, 1.2), 2))
        ok &= blow >= 2.0 and plateau < 0.15
        parts.append(f"{abbrev}: blowup x{blow:.1f}, plateau spread {plateau:.1%}")
    elapsed = time.time() - start
    ok &= elapsed < 300.0
    _report("C2 lambda study", ok, "; ".join(parts) + f"; runtime {elapsed:.0f}s (<300s)")


def test_criterion_03_bivariate_diagonal_reproduction():
    targets = {
        "pco": ({"UG": 0.109, "CG": 0.141, "Bi": 0.108, "T": 0.099}, 0.03),
        "scv": ({"UG": 0.093, "CG": 0.134, "Bi": 0.107, "T": 0.102}, 0.05),
        "pi": ({"UG": 0.097, "CG": 0.138, "Bi": 0.102, "T": 0.097}, 0.05),
    }
    ok, parts = True, []
    for method, (cells, tol) in targets.items():
        for abbrev, target in cells.items():
            dens = get_density(2, abbrev)
            spec = MethodSpec(method, grid="diagonal", grid_size=256)
            rep = monte_carlo_risk(dens, spec, 100, 20, MASTER_SEED)
            ok &= abs(rep.mean - target) <= tol and rep.failures == 0
            parts.append(f"{method}/{abbrev}={rep.mean:.3f} ({target}±{tol})")
    _report("C3 bivariate diagonal table", ok, "; ".join(parts))


def test_criterion_04_excluded_targets_documented():
    # the anomalous high-ISE catalogs are exactly the non-SPD decodes
    clamped = {dim: [d.abbrev for d in zoo(dim) if d.clamped] for dim in (3, 4)}
    ok = clamped == {3: ["Sk+", "D", "K", "AF"], 4: ["Sk+", "D", "K", "AF"]}
    _report("C4 exclusions", ok,
            f"no numeric targets for n=10^4 multivariate, full 16^d (d>=3), or "
            f"clamped catalogs {clamped}; properties C5-C9 substitute")


def _oracle_pco_1d(x, kernel, grid, lam):
    kernel = get_kernel(kernel)
    values = []
    for member in grid.members:
        comparison = quad_norm_diff_1d(x, kernel, grid.h_min.h, member.h)
        pen = (lam * kernel.norm2 / member.h
               - quad_kernel_diff_norm_1d(kernel, member.h, grid.h_min.h)) / x.size
        values.append(comparison + pen)
    return np.array(values)


def _oracle_ucv_1d(x, kernel, grid):
    from pcokde.kernels import kde_eval, kernel_eval

    from helpers import composite_gl_1d, _kde_diff_breaks

    kernel = get_kernel(kernel)
    n = x.size
    values = []
    for member in grid.members:
        def est_sq(pts, member=member):
            return kde_eval(x, kernel, member, pts) ** 2
        breaks = _kde_diff_breaks(x, kernel, member.h, member.h)
        total = composite_gl_1d(est_sq, breaks)
        delta = x[:, None] - x[None, :]
        off = ~np.eye(n, dtype=bool)
        loo = float(kernel_eval(kernel, member, delta[off]).sum())
        values.append(total - 2.0 * loo / n**2)
    return np.array(values)


def _oracle_pco_2d(x, grid, lam):
    n = x.shape[0]
    values = []
    for member in grid.members:
        comparison = simpson_norm_diff_2d(x, member, grid.h_min, m=401)

        def kdiff(pts, member=member):
            return (gaussian_density(pts, grid.h_min.sq) - gaussian_density(pts, member.sq)) ** 2

        lim = 7.0 * float(member.eigenvalues.max())
        kd = simpson_grid_2d(kdiff, np.array([-lim, -lim]), np.array([lim, lim]), m=401)
        values.append(comparison + (lam * GAUSSIAN.norm2_d(2) / member.det - kd) / n)
    return np.array(values)


def _oracle_ucv_2d(x, grid):
    n = x.shape[0]
    values = []
    for member in grid.members:
        def est_sq_fn(pts, member=member):
            vals = np.zeros(pts.shape[0])
            for xi in x:
                vals += gaussian_density(pts - xi, member.sq)
            return (vals / n) ** 2
        lim = 7.0 * float(member.eigenvalues.max())
        est_sq = simpson_grid_2d(est_sq_fn, x.min(axis=0) - lim, x.max(axis=0) + lim, m=401)
        delta = (x[:, None, :] - x[None, :, :]).reshape(-1, 2)
        off = ~np.eye(n, dtype=bool).reshape(-1)
        loo = float(gaussian_density(delta[off], member.sq).sum())
        values.append(est_sq - 2.0 * loo / n**2)
    return np.array(values)


def _argmin_det(values, members):
    dets = np.array([m.det for m in members])
    ties = np.nonzero(values == values.min())[0]
    return int(ties[np.argmin(dets[ties])])


def test_criterion_05_oracle_equivalence():
    rng = np.random.default_rng(MASTER_SEED)
    kernels = [GAUSSIAN, EPANECHNIKOV, BIWEIGHT]
    agreements, total = 0, 0
    # 12 univariate instances: 8 comparison-selector + 4 cross-validation
    for k in range(12):
        n = int(rng.integers(20, 51))
        dens = get_density(1, ["G", "MG", "Bi"][k % 3])
        x = dens.sample(n, seed=int(rng.integers(1e9))).ravel()
        count = int(rng.integers(8, 16))
        grid = BandwidthGrid.from_scalars(np.geomspace(0.08, 1.0, count), h_min=0.05)
        if k < 8:
            kernel = kernels[k % 3]
            lam = [0.7, 1.0, 1.3][k % 3]
            ours = pco_select_1d(x, kernel, grid, lam=lam)
            oracle_vals = _oracle_pco_1d(x, kernel, grid, lam)
        else:
            kernel = kernels[k % 3]
            ours = ucv_select_1d(x, kernel, grid)
            oracle_vals = _oracle_ucv_1d(x, kernel, grid)
        idx = _argmin_det(oracle_vals, grid.members)
        agreements += ours.chosen == grid.members[idx]
        total += 1
    # 8 bivariate instances
    for k in range(8):
        n = int(rng.integers(20, 51))
        dens = get_density(2, ["Bi", "T"][k % 2])
        x = dens.sample(n, seed=int(rng.integers(1e9)))
        count = int(rng.integers(5, 10))
        diags = rng.uniform(0.3, 1.0, size=(count, 2))
        grid = BandwidthGrid.from_diags(diags, h_min_entry=0.22)
        if k < 4:
            ours = pco_select_md(x, grid, lam=1.0)
            oracle_vals = _oracle_pco_2d(x, grid, 1.0)
        else:
            ours = ucv_select_md(x, grid)
            oracle_vals = _oracle_ucv_2d(x, grid)
        idx = _argmin_det(oracle_vals, grid.members)
        agreements += ours.chosen == grid.members[idx]
        total += 1
    _report("C5 oracle equivalence", agreements == total,
            f"{agreements}/{total} argmin agreements on random small instances")


def test_criterion_06_closed_forms_vs_quadrature():
    rng = np.random.default_rng(MASTER_SEED + 1)
    worst = {"penalty": 0.0, "comparison": 0.0, "scv": 0.0, "ise": 0.0}

    # penalties: 3 kernels x 17 random (h, hmin, lambda) points
    for kernel in (GAUSSIAN, EPANECHNIKOV, BIWEIGHT):
        for _ in range(17):
            h = float(rng.uniform(0.05, 1.0))
            h_min = float(rng.uniform(0.01, h))
            lam = float(rng.uniform(-0.5, 2.0))
            closed = pco_penalty(kernel, Bandwidth.scalar(h), Bandwidth.scalar(h_min), lam, 60)
            oracle = (lam * kernel.norm2 / h
                      - quad_kernel_diff_norm_1d(kernel, h, h_min)) / 60
            worst["penalty"] = max(worst["penalty"],
                                   abs(closed - oracle) / max(abs(oracle), 1e-10))

    # comparison norms: 40 univariate + 10 bivariate
    for k in range(40):
        kernel = (GAUSSIAN, EPANECHNIKOV, BIWEIGHT)[k % 3]
        x = rng.standard_normal(int(rng.integers(5, 25)))
        h = float(rng.uniform(0.15, 0.9))
        h_min = float(rng.uniform(0.05, 0.12))
        val = pairwise_comparison_norm(x, kernel, Bandwidth.scalar(h), Bandwidth.scalar(h_min))
        oracle = quad_norm_diff_1d(x, kernel, h_min, h)
        worst["comparison"] = max(worst["comparison"],
                                  abs(val - oracle) / max(abs(oracle), 1e-10))
    for _ in range(10):
        x = rng.standard_normal((int(rng.integers(6, 15)), 2))
        bw = Bandwidth.from_diag(rng.uniform(0.3, 0.9, size=2))
        bw_min = Bandwidth.from_diag(np.full(2, float(rng.uniform(0.15, 0.25))))
        val = pairwise_comparison_norm(x, GAUSSIAN, bw, bw_min)
        oracle = simpson_norm_diff_2d(x, bw, bw_min, m=401)
        worst["comparison"] = max(worst["comparison"],
                                  abs(val - oracle) / max(abs(oracle), 1e-10))

    # smoothed-cross-validation convolution collapse: 50 random evaluations
    for _ in range(50):
        h_sq = Bandwidth.from_diag(rng.uniform(0.25, 0.7, size=2)).sq
        g_sq = Bandwidth(rand_spd(rng, 2, 0.1, 0.4)).sq
        u = rng.uniform(-1.0, 1.0, size=2)
        closed = (gaussian_density(u[None, :], 2 * h_sq + 2 * g_sq)
                  - 2 * gaussian_density(u[None, :], h_sq + 2 * g_sq)
                  + gaussian_density(u[None, :], 2 * g_sq))[0]
        ref = (gauss_conv_numeric_2d(2 * h_sq, 2 * g_sq, u)
               - 2 * gauss_conv_numeric_2d(h_sq, 2 * g_sq, u)
               + gaussian_density(u[None, :], 2 * g_sq)[0])
        worst["scv"] = max(worst["scv"], abs(closed - ref) / max(abs(ref), 1e-10))

    # Gaussian-mixture ISE: 40 univariate + 10 bivariate
    for k in range(40):
        dens = get_density(1, ("G", "MG", "Bi")[k % 3])
        x = dens.sample(int(rng.integers(10, 50)), seed=int(rng.integers(1e9))).ravel()
        h = float(rng.uniform(0.08, 0.8))
        closed = ise(dens, x, GAUSSIAN, Bandwidth.scalar(h))
        oracle = quad_ise_1d(dens, x, GAUSSIAN, h)
        worst["ise"] = max(worst["ise"], abs(closed - oracle) / max(abs(oracle), 1e-12))
    for k in range(10):
        dens = get_density(2, ("Bi", "T", "DF")[k % 3])
        x = dens.sample(int(rng.integers(15, 35)), seed=int(rng.integers(1e9)))
        bw = Bandwidth.from_diag(rng.uniform(0.25, 0.7, size=2))
        closed = ise(dens, x, GAUSSIAN, bw)
        oracle = simpson_ise_2d(dens, x, bw, m=601)
        worst["ise"] = max(worst["ise"], abs(closed - oracle) / max(abs(oracle), 1e-12))

    ok = all(v <= 1e-5 for v in worst.values())
    detail = ", ".join(f"{k} worst rel {v:.2e}" for k, v in worst.items())
    _report("C6 closed form vs quadrature", ok, detail + " (tol 1e-5)")


def test_criterion_07_psi4_checks():
    rng = np.random.default_rng(MASTER_SEED + 2)
    worst_fd = 0.0
    for d in (1, 2):
        cov = rand_spd(rng, d, 0.4, 0.9)
        pilot = PilotSpec(bandwidth=Bandwidth(linalg.spd_sqrt(cov)))
        psi = psi4_hat(np.zeros((1, d)), pilot)
        sigma = pilot.bandwidth.sq
        scale = float(np.max(np.abs(psi)))
        step = 1e-3
        for idx in itertools.product(range(d), repeat=4):
            approx = _nested_central_difference(
                lambda u: gaussian_density(np.atleast_2d(u), sigma)[0], idx, step, d)
            exact = psi[idx[0] * d + idx[1], idx[2] * d + idx[3]]
            worst_fd = max(worst_fd, abs(approx - exact) / max(abs(exact), scale))
    x = rng.standard_normal((12, 3))
    psi3 = psi4_hat(x, PilotSpec(bandwidth=Bandwidth(rand_spd(rng, 3, 0.3, 0.8))))
    worst_sym = 0.0
    for combo in itertools.combinations_with_replacement(range(3), 4):
        vals = [psi3[a * 3 + b, c * 3 + e]
                for a, b, c, e in itertools.permutations(combo)]
        worst_sym = max(worst_sym, max(vals) - min(vals))
    ok = worst_fd <= 1e-4 and worst_sym <= 1e-12
    _report("C7 psi4 checks", ok,
            f"finite-difference worst rel {worst_fd:.2e} (tol 1e-4); "
            f"permutation asymmetry {worst_sym:.2e} (tol 1e-12)")


def _nested_central_difference(f, order, step, d):
    def diff(g, axis):
        def h(u):
            up = np.array(u, dtype=float)
            um = np.array(u, dtype=float)
            up[axis] += step
            um[axis] -= step
            return (g(up) - g(um)) / (2.0 * step)
        return h

    for axis in order:
        f = diff(f, axis)
    return f(np.zeros(d))


def test_criterion_08_byte_identical_reruns(tmp_path):
    args = [sys.executable, "-m", "pcokde.cli", "simulate", "--dim", "1",
            "--densities", "G,MG", "--methods", "pco,rot", "--ns", "50",
            "--trials", "4", "--grid-size", "80", "--seed", str(MASTER_SEED)]
    outs = [tmp_path / name for name in ("a", "b", "c")]
    env = dict(os.environ)
    for out, extra in zip(outs, ([], [], ["--workers", "2"])):
        subprocess.run(args + ["--out", str(out)] + extra, check=True, env=env,
                       capture_output=True)
    same_serial = (outs[0] / "trials.csv").read_bytes() == (outs[1] / "trials.csv").read_bytes()
    same_agg = (outs[0] / "aggregate_n50.csv").read_bytes() == (outs[1] / "aggregate_n50.csv").read_bytes()
    same_parallel = (outs[0] / "trials.csv").read_bytes() == (outs[2] / "trials.csv").read_bytes()
    ok = same_serial and same_agg and same_parallel
    _report("C8 determinism", ok,
            f"serial rerun identical: {same_serial}; aggregates identical: {same_agg}; "
            f"parallel identical: {same_parallel}")


def test_criterion_09_invariance_suite():
    rng = np.random.default_rng(MASTER_SEED + 3)
    checks = {}

    x = rng.standard_normal(60)
    grid = univariate_grid(60, GAUSSIAN)
    checks["translation 1d"] = all(
        pco_select_1d(x, GAUSSIAN, grid).chosen == pco_select_1d(x + c, GAUSSIAN, grid).chosen
        and ucv_select_1d(x, GAUSSIAN, grid).chosen == ucv_select_1d(x + c, GAUSSIAN, grid).chosen
        for c in (1.25, -3.5))

    y = rng.standard_normal((40, 2))
    grid2 = diagonal_grid(40, 2, GAUSSIAN, count=64)
    shift = np.array([4.5, -1.75])
    checks["translation md"] = (
        pco_select_md(y, grid2).chosen == pco_select_md(y + shift, grid2).chosen
        and ucv_select_md(y, grid2).chosen == ucv_select_md(y + shift, grid2).chosen)

    # bimodal data keeps the curvature U-statistic positive, so the real
    # closed-form paths (not the rule-of-thumb fallbacks) are exercised
    z = get_density(1, "MG").sample(90, seed=MASTER_SEED).ravel()
    scale_ok = True
    for c in (0.4, 2.5):
        scale_ok &= np.isclose(rot_select(c * z).chosen.h, c * rot_select(z).chosen.h, rtol=1e-12)
        scale_ok &= np.isclose(bcv_select(c * z, GAUSSIAN).chosen.h,
                               c * bcv_select(z, GAUSSIAN).chosen.h, rtol=1e-10)
        for mode in ("ste", "dpi"):
            scale_ok &= np.isclose(sj_select(c * z, GAUSSIAN, mode).chosen.h,
                                   c * sj_select(z, GAUSSIAN, mode).chosen.h, rtol=1e-5)
    checks["scale equivariance"] = scale_ok

    w = rng.multivariate_normal([0, 0], [[2.0, 0.5], [0.5, 1.0]], size=120)
    theta = 1.1
    q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    h_w = rot_select_md(w).chosen.matrix
    h_qw = rot_select_md(w @ q.T).chosen.matrix
    checks["rotation equivariance"] = bool(np.max(np.abs(h_qw - q @ h_w @ q.T)) < 1e-10)

    mono_ok = True
    for seed in range(5):
        xs = get_density(1, "MG").sample(80, seed=seed).ravel()
        base, slope = pco_criterion_parts_1d(xs, GAUSSIAN, grid)
        hs = np.array([m.h for m in grid.members])
        chosen = [hs[int(np.argmin(base + lam * slope))] for lam in (0.5, 1.0, 2.0)]
        mono_ok &= chosen[0] <= chosen[1] <= chosen[2]
        ys = get_density(2, "Bi").sample(50, seed=seed)
        base2, slope2 = pco_criterion_parts_md(ys, grid2)
        dets = np.array([m.det for m in grid2.members])
        chosen2 = [dets[int(np.argmin(base2 + lam * slope2))] for lam in (0.5, 1.0, 2.0)]
        mono_ok &= chosen2[0] <= chosen2[1] <= chosen2[2]
    checks["det monotone in lambda"] = mono_ok

    ok = all(checks.values())
    _report("C9 invariance suite", ok,
            "; ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in checks.items()))


def test_criterion_10_near_oracle_selection():
    ok, parts = True, []
    for abbrev in ("ABi", "DF"):
        dens = get_density(2, abbrev)
        x = dens.sample(100, seed=MASTER_SEED)
        grid = diagonal_grid(100, 2, GAUSSIAN, count=256)
        result = pco_select_md(x, grid)
        ises = np.array([ise(dens, x, GAUSSIAN, m) for m in grid.members])
        chosen_ise = ise(dens, x, GAUSSIAN, result.chosen)
        rank = float(np.mean(ises <= chosen_ise))
        ok &= rank <= 0.10
        parts.append(f"{abbrev}: selected ISE in best {rank:.1%} of grid")
    _report("C10 near-oracle selection", ok, "; ".join(parts) + " (need <=10%)")
