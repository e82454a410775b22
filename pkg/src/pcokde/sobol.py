"""Sobol low-discrepancy sequences for dimensions 1 to 4.

Gray-code construction with 32-bit direction integers.  The first
dimension is the van der Corput sequence in base 2; dimensions 2-4 use
the standard Joe-Kuo direction-number table (new-joe-kuo-6.21201), whose
first rows are reproduced below so grid outputs are reproducible:

    dim  s  a  m_i
     2   1  0  1
     3   2  1  1 3
     4   3  1  1 3 1

The all-zeros initial point is skipped, so the first returned points are
0.5, 0.75, 0.25, ... in every coordinate pattern of the reference
generator.
"""

from __future__ import annotations

import numpy as np

from .errors import UnsupportedDimension

_BITS = 32

# (s, a, (m_1, ..., m_s)) per dimension index 2..4.
_JOE_KUO_ROWS = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
    4: (3, 1, (1, 3, 1)),
}


def _direction_integers(dim_index: int) -> np.ndarray:
    """Direction integers v_1..v_BITS, MSB-aligned in BITS bits."""
    if dim_index == 1:
        return np.array([1 << (_BITS - k) for k in range(1, _BITS + 1)], dtype=np.uint64)
    s, a, m_init = _JOE_KUO_ROWS[dim_index]
    m = list(m_init)
    for k in range(s, _BITS):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    return np.array([np.uint64(m[k - 1]) << np.uint64(_BITS - k)
                     for k in range(1, _BITS + 1)], dtype=np.uint64)


def sobol(dim: int, count: int) -> np.ndarray:
    """First ``count`` Sobol points in [0, 1)^dim, zero point skipped.

    Deterministic: the same (dim, count) always yields the same array.
    """
    if not 1 <= dim <= 4:
        raise UnsupportedDimension(f"Sobol sequence implemented for dims 1..4, got {dim}")
    if count < 1:
        raise ValueError("count must be >= 1")
    directions = [_direction_integers(j + 1) for j in range(dim)]
    state = np.zeros(dim, dtype=np.uint64)
    out = np.empty((count, dim), dtype=float)
    scale = float(1 << _BITS)
    for k in range(1, count + 1):
        # Gray-code step: flip the direction of the lowest zero bit of k-1.
        c = (k - 1 ^ (k - 1) >> 1) ^ (k ^ k >> 1)  # changed bit mask
        bit = int(c).bit_length() - 1
        for j in range(dim):
            state[j] ^= directions[j][bit]
        out[k - 1] = state / scale
    return out
