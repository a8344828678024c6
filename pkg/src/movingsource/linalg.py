"""Direct solvers for tridiagonal and narrow-band systems."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .core import SingularPivot

PIVOT_MIN = 1e-300


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Solve A x = rhs by two-sided Thomas elimination, without pivoting.

    ``lower`` and ``upper`` hold the n-1 off-diagonal entries (lower[i] is
    A[i+1, i], upper[i] is A[i, i+1]). Rows are eliminated from the top and
    from the bottom until the sweeps meet in the middle. Reversing the system
    therefore reverses every floating-point operation, so mirror-symmetric
    systems get exactly mirror-symmetric solutions.

    Intended for diagonally dominant or M-matrices such as the mesh equation;
    use :func:`solve_banded` when pivoting may be needed.
    """
    b = [float(v) for v in diag]
    d = [float(v) for v in rhs]
    n = len(b)
    if n == 0 or len(d) != n:
        raise ValueError("diag and rhs must have the same nonzero length")
    a = [float(v) for v in lower]
    c = [float(v) for v in upper]
    if len(a) != n - 1 or len(c) != n - 1:
        raise ValueError("lower and upper must have length n - 1")

    half = n // 2
    # top sweep: rows 0..half-1 become x_i + cp_i x_{i+1} = dp_i
    cp = [0.0] * n
    dp = [0.0] * n
    for i in range(half):
        piv = b[i] - a[i - 1] * cp[i - 1] if i else b[i]
        if abs(piv) < PIVOT_MIN:
            raise SingularPivot(f"zero pivot in row {i}")
        cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv if i else d[i] / piv
    # bottom sweep: rows n-1..n-half become x_i + cq_i x_{i-1} = dq_i
    cq = [0.0] * n
    dq = [0.0] * n
    for i in range(n - 1, n - 1 - half, -1):
        piv = b[i] - c[i] * cq[i + 1] if i < n - 1 else b[i]
        if abs(piv) < PIVOT_MIN:
            raise SingularPivot(f"zero pivot in row {i}")
        cq[i] = a[i - 1] / piv
        dq[i] = (d[i] - c[i] * dq[i + 1]) / piv if i < n - 1 else d[i] / piv

    x = [0.0] * n
    if n % 2:
        m = half
        left = a[m - 1] * cp[m - 1] if m else 0.0
        right = c[m] * cq[m + 1] if m < n - 1 else 0.0
        piv = b[m] - (left + right)
        if abs(piv) < PIVOT_MIN:
            raise SingularPivot(f"zero pivot in row {m}")
        lrhs = a[m - 1] * dp[m - 1] if m else 0.0
        rrhs = c[m] * dq[m + 1] if m < n - 1 else 0.0
        x[m] = (d[m] - (lrhs + rrhs)) / piv
        lo, hi = m - 1, m + 1
    else:
        i, j = half - 1, half
        det = 1.0 - cp[i] * cq[j]
        if abs(det) < PIVOT_MIN:
            raise SingularPivot(f"singular central block at rows {i}, {j}")
        x[i] = (dp[i] - cp[i] * dq[j]) / det
        x[j] = (dq[j] - cq[j] * dp[i]) / det
        lo, hi = i - 1, j + 1
    for i in range(lo, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    for i in range(hi, n):
        x[i] = dq[i] - cq[i] * x[i - 1]
    return np.array(x)


def solve_banded(bandwidth: int, bands: np.ndarray, rhs) -> np.ndarray:
    """Solve a banded system with partial pivoting (LAPACK gbsv).

    ``bands`` uses diagonal-ordered storage with equal lower and upper
    bandwidth: ``bands[bandwidth + i - j, j] == A[i, j]``.
    """
    if not 0 <= bandwidth <= 2:
        raise ValueError("bandwidth must be 0, 1 or 2")
    bands = np.asarray(bands, dtype=float)
    if bands.shape[0] != 2 * bandwidth + 1:
        raise ValueError(f"bands needs {2 * bandwidth + 1} rows, got {bands.shape[0]}")
    if not np.all(np.isfinite(bands)):
        raise SingularPivot("non-finite matrix entries")
    try:
        return scipy.linalg.solve_banded((bandwidth, bandwidth), bands, np.asarray(rhs, dtype=float),
                                         check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularPivot(str(exc)) from exc


def tridiagonal_to_bands(lower, diag, upper) -> np.ndarray:
    """Pack tridiagonal vectors into ``solve_banded`` storage with bandwidth 1."""
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    return ab


def bands_to_dense(bandwidth: int, bands: np.ndarray) -> np.ndarray:
    n = bands.shape[1]
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - bandwidth), min(n, i + bandwidth + 1)):
            A[i, j] = bands[bandwidth + i - j, j]
    return A
