"""Tridiagonal systems with twisted (Floquet) wrap-around corners.

A twisted-periodic three-point operator on L unknowns has, besides its three
diagonals, one entry in each corner: row 0 sees the ghost e^{-i theta} u^{L-1}
and row L-1 sees the ghost e^{i theta} u^0.  We solve it as a banded system
plus a rank-2 Woodbury correction for the two corners.
"""

import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, lu_factor, lu_solve, solve_banded

RESIDUAL_RTOL = 1e-12


class LinearSolveError(ArithmeticError):
    pass


def twisted_matvec(diag, lower, upper, theta, x):
    """y = A x for the twisted-periodic tridiagonal A.

    ``diag`` has length L; ``lower`` and ``upper`` are scalars or length-L
    arrays giving the coefficient of u^{l-1} and u^{l+1} in row l.
    """
    x = np.asarray(x)
    L = len(x)
    lower = np.broadcast_to(lower, (L,))
    upper = np.broadcast_to(upper, (L,))
    tw = np.exp(1j * theta)
    left = np.empty_like(x, dtype=complex)
    right = np.empty_like(x, dtype=complex)
    left[1:] = x[:-1]
    left[0] = x[-1] / tw
    right[:-1] = x[1:]
    right[-1] = tw * x[0]
    return diag * x + lower * left + upper * right


def twisted_dense(diag, lower, upper, theta, L):
    """Dense matrix of the twisted-periodic operator (for tests and fallbacks)."""
    A = np.zeros((L, L), dtype=complex)
    lower = np.broadcast_to(lower, (L,))
    upper = np.broadcast_to(upper, (L,))
    A[np.arange(L), np.arange(L)] = diag
    A[np.arange(1, L), np.arange(L - 1)] = lower[1:]
    A[np.arange(L - 1), np.arange(1, L)] = upper[:-1]
    tw = np.exp(1j * theta)
    A[0, L - 1] += lower[0] / tw
    A[L - 1, 0] += upper[-1] * tw
    return A


def twisted_solve(diag, lower, upper, theta, rhs, check=True):
    """Solve A x = rhs for the twisted-periodic tridiagonal A in O(L)."""
    rhs = np.asarray(rhs, dtype=complex)
    L = len(rhs)
    diag = np.broadcast_to(np.asarray(diag, dtype=complex), (L,))
    lower = np.broadcast_to(np.asarray(lower, dtype=complex), (L,))
    upper = np.broadcast_to(np.asarray(upper, dtype=complex), (L,))
    tw = np.exp(1j * theta)
    alpha = lower[0] / tw      # A[0, L-1]
    beta = upper[-1] * tw      # A[L-1, 0]

    ab = np.zeros((3, L), dtype=complex)
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    B = np.zeros((L, 3), dtype=complex)
    B[:, 0] = rhs
    B[0, 1] = 1.0
    B[-1, 2] = 1.0
    x = None
    try:
        Y = solve_banded((1, 1), ab, B, check_finite=False)
        y, Z = Y[:, 0], Y[:, 1:]
        # A = T + U V with U = [e_0, e_{L-1}], V = [alpha e_{L-1}^T; beta e_0^T]
        VZ = np.array([[alpha * Z[-1, 0], alpha * Z[-1, 1]],
                       [beta * Z[0, 0], beta * Z[0, 1]]])
        Vy = np.array([alpha * y[-1], beta * y[0]])
        x = y - Z @ np.linalg.solve(np.eye(2) + VZ, Vy)
    except (LinAlgError, ValueError):
        x = None
    if check and (x is None or not _small_residual(diag, lower, upper, theta, x, rhs)):
        x = _dense_fallback(diag, lower, upper, theta, rhs)
    return x


def _small_residual(diag, lower, upper, theta, x, rhs):
    if not np.all(np.isfinite(x)):
        return False
    r = twisted_matvec(diag, lower, upper, theta, x) - rhs
    scale = np.linalg.norm(rhs) + np.finfo(float).tiny
    return np.linalg.norm(r) <= RESIDUAL_RTOL * scale


def _dense_fallback(diag, lower, upper, theta, rhs):
    A = twisted_dense(diag, lower, upper, theta, len(rhs))
    try:
        # singularity is reported through the residual check below
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            x = lu_solve(lu_factor(A, check_finite=False), rhs, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise LinearSolveError(f"twisted system is singular: {exc}") from exc
    if not _small_residual(diag, lower, upper, theta, x, rhs):
        raise LinearSolveError("twisted system is numerically singular (residual check failed)")
    return x
