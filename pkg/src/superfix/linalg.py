"""Linear solvers for absorption-probability systems.

Two paths: an exact rational Gaussian elimination (gmpy2.mpq when available,
fractions.Fraction otherwise) for systems where we want answers free of
roundoff, and a float64 path via numpy's LU solve with an explicit residual
check for larger systems.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

try:
    from gmpy2 import mpq as _rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _rat = Fraction


def rational(num, den=1):
    """Construct an exact rational in whichever backend is active."""
    return _rat(num, den)


def solve_rational(matrix: Sequence[Sequence], rhs: Sequence) -> list:
    """Solve A x = b exactly by Gaussian elimination with partial pivoting
    on nonzero entries.  Entries may be ints, Fractions or mpq; the result
    uses the active rational backend.

    Raises ValueError if the matrix is singular.
    """
    n = len(rhs)
    a = [[_rat(matrix[i][j]) for j in range(n)] + [_rat(rhs[i])]
         for i in range(n)]
    for col in range(n):
        pivot_row = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot_row is None:
            raise ValueError("singular matrix in exact solve")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
        pivot = a[col][col]
        for i in range(col + 1, n):
            factor = a[i][col]
            if factor == 0:
                continue
            factor = factor / pivot
            row_i, row_c = a[i], a[col]
            # rows from absorbing chains are sparse until fill-in arrives,
            # so skipping zero entries saves most of the rational work
            for j in range(col, n + 1):
                v = row_c[j]
                if v:
                    row_i[j] -= factor * v
    x = [_rat(0)] * n
    for i in range(n - 1, -1, -1):
        acc = a[i][n]
        row = a[i]
        for j in range(i + 1, n):
            acc -= row[j] * x[j]
        x[i] = acc / row[i]
    return x


def solve_float(matrix: np.ndarray, rhs: np.ndarray,
                residual_tol: float = 1e-10) -> np.ndarray:
    """Solve A x = b in float64 and verify the relative residual
    ||A x - b||_inf / max(1, ||b||_inf) is below residual_tol."""
    a = np.asarray(matrix, dtype=np.float64)
    b = np.asarray(rhs, dtype=np.float64)
    x = np.linalg.solve(a, b)
    resid = np.max(np.abs(a @ x - b)) / max(1.0, np.max(np.abs(b)))
    if resid > residual_tol:
        raise ArithmeticError(
            f"float solve residual {resid:.3e} exceeds tolerance {residual_tol:.3e}")
    return x
