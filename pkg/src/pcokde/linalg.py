"""Dense symmetric linear algebra for small dimensions (1..4).

Everything here is sized for bandwidth matrices and data covariances in
dimension at most 4, so a cyclic Jacobi sweep is used instead of a LAPACK
call: it is exact enough at this size and makes eigenvalue ordering and
eigenvector signs reproducible across platforms.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InsufficientData, NotPositiveDefinite, UnsupportedDimension

MAX_DIM = 4

_JACOBI_SWEEPS = 64


class EigenDecomposition(NamedTuple):
    """Spectral factorization ``A = P.T @ diag(eigenvalues) @ P``.

    ``rotation`` is orthogonal with eigenvectors as rows; eigenvalues are
    sorted in descending order and each eigenvector's first component of
    magnitude above 1e-12 is made positive, so the factorization is unique
    up to degenerate eigenvalues.
    """

    rotation: np.ndarray
    eigenvalues: np.ndarray


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise UnsupportedDimension(f"expected a square matrix, got shape {a.shape}")
    d = a.shape[0]
    if not 1 <= d <= MAX_DIM:
        raise UnsupportedDimension(f"dimension {d} outside supported range 1..{MAX_DIM}")
    scale = np.max(np.abs(a)) or 1.0
    if np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the symmetric part ``(a + a.T) / 2``."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def sym_eig(a: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi.

    Returns an :class:`EigenDecomposition` with deterministic ordering
    (descending eigenvalues) and sign convention (first non-negligible
    eigenvector component positive).
    """
    a = _check_symmetric(a)
    d = a.shape[0]
    w = a.copy()
    v = np.eye(d)
    if d > 1:
        norm = np.linalg.norm(w)
        tol = 1e-15 * (norm if norm > 0 else 1.0)
        for _ in range(_JACOBI_SWEEPS):
            off = 0.0
            for p in range(d - 1):
                for q in range(p + 1, d):
                    off = max(off, abs(w[p, q]))
                    if abs(w[p, q]) <= tol:
                        continue
                    tau = (w[q, q] - w[p, p]) / (2.0 * w[p, q])
                    t = np.sign(tau) if tau != 0 else 1.0
                    t /= abs(tau) + np.sqrt(1.0 + tau * tau)
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    rot = np.eye(d)
                    rot[p, p] = rot[q, q] = c
                    rot[p, q] = s
                    rot[q, p] = -s
                    w = rot.T @ w @ rot
                    v = v @ rot
            if off <= tol:
                break
    eigenvalues = np.diag(w).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    rotation = v[:, order].T.copy()
    for i in range(d):
        row = rotation[i]
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if nz.size and row[nz[0]] < 0:
            rotation[i] = -row
    return EigenDecomposition(rotation=rotation, eigenvalues=eigenvalues)


def sym_det(a: np.ndarray) -> float:
    """Determinant of a symmetric matrix via its eigenvalue product."""
    return float(np.prod(sym_eig(a).eigenvalues))


def det_cofactor(a: np.ndarray) -> float:
    """Determinant by direct cofactor expansion (test oracle, d <= 4)."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if d == 1:
        return float(a[0, 0])
    if d == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    total = 0.0
    for j in range(d):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * a[0, j] * det_cofactor(minor)
    return float(total)


def spd_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric positive-definite square root.

    Raises
    ------
    NotPositiveDefinite
        If any eigenvalue of ``a`` is non-positive.
    """
    rot, vals = sym_eig(a)
    if np.any(vals <= 0):
        raise NotPositiveDefinite(f"eigenvalues {vals} are not all positive")
    return symmetrize(rot.T @ np.diag(np.sqrt(vals)) @ rot)


def vech(a: np.ndarray) -> np.ndarray:
    """Half-vectorization: lower triangle scanned column-wise."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    rows, cols = vech_indices(d)
    return a[rows, cols].copy()


def unvech(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vech`; rebuilds the full symmetric matrix."""
    v = np.asarray(v, dtype=float)
    m = v.shape[0]
    d = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if d * (d + 1) // 2 != m:
        raise ValueError(f"length {m} is not a triangular number")
    out = np.zeros((d, d))
    rows, cols = vech_indices(d)
    out[rows, cols] = v
    out[cols, rows] = v
    return out


def vech_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the lower triangle in column-wise order."""
    rows, cols = [], []
    for j in range(d):
        for i in range(j, d):
            rows.append(i)
            cols.append(j)
    return np.array(rows), np.array(cols)


def duplication_map(d: int) -> np.ndarray:
    """Map from vec indexing to vech indexing.

    Returns an integer array of shape (d*d,) whose entry at vec position
    ``a*d + b`` is the vech position holding matrix entry (a, b).  Used to
    contract Kronecker-indexed fourth-derivative matrices against
    ``vech(H^2)`` quadratic forms.
    """
    idx = np.empty(d * d, dtype=int)
    rows, cols = vech_indices(d)
    lookup = {(int(r), int(c)): k for k, (r, c) in enumerate(zip(rows, cols))}
    for a in range(d):
        for b in range(d):
            key = (a, b) if a >= b else (b, a)
            idx[a * d + b] = lookup[key]
    return idx


def duplication_matrix(d: int) -> np.ndarray:
    """Duplication matrix D with ``vec(A) = D @ vech(A)`` for symmetric A."""
    m = d * (d + 1) // 2
    out = np.zeros((d * d, m))
    out[np.arange(d * d), duplication_map(d)] = 1.0
    return out


def empirical_covariance(sample: np.ndarray) -> np.ndarray:
    """Unbiased (1/(n-1)) covariance matrix, symmetric by construction."""
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise InsufficientData(f"need at least 2 observations, got {n}")
    centered = x - x.mean(axis=0)
    return symmetrize(centered.T @ centered / (n - 1))


def clamp_spd(a: np.ndarray, rel_floor: float = 1e-12) -> tuple[np.ndarray, bool]:
    """Clamp eigenvalues below ``rel_floor * max_eigenvalue`` to that floor.

    Returns the (possibly) repaired matrix and a flag telling whether any
    clamping happened.  Consumers that need a usable rotation from a
    singular covariance go through this.
    """
    rot, vals = sym_eig(a)
    floor = rel_floor * max(float(vals.max()), rel_floor)
    clamped = bool(np.any(vals < floor))
    fixed = np.maximum(vals, floor)
    return symmetrize(rot.T @ np.diag(fixed) @ rot), clamped
