"""Local collocation quasi-interpolant ``Q_hat`` (function values only).

For each ``J = (j, i)`` the coefficient is the ``sigma_J`` component of the
square local system that collocates ``f`` at

    (x_{i + d1//2} + r1 h_x / d1,  y_{j + d2//2} + r2 h_y / d2),  r1 = 0..d1, r2 = 0..d2,

using the ``(d1+1)(d2+1)`` B-splines non-zero on the cell
``Theta_J = (x_{i+d1//2}, x_{i+d1//2+1}) x (y_{j+d2//2}, y_{j+d2//2+1})``.
On a uniform grid the local matrix does not depend on ``J``, so it is
factorised once and reused.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .bspline import UniformGrid, bspline_eval
from .tensor_qi import coeff_shape


class NumericalFailureError(RuntimeError):
    pass


def _local_matrix_1d(d):
    # rows: collocation offsets r/d inside Theta; cols: B_d(t - K), K = c-d..c
    u = np.arange(d + 1) / d
    t = np.arange(d + 1)
    return bspline_eval(d, u[:, None] + d - t[None, :])


@lru_cache(maxsize=None)
def collocation_weights(degrees) -> np.ndarray:
    """Weights ``W[r2, r1]`` with ``lambda_hat_J = sum W[r2, r1] f(x_J^{r1, r2})``.

    Solves ``A^T w = e_J`` on the full ``(d1+1)(d2+1)`` local matrix with
    LU (partial pivoting).
    """
    d1, d2 = degrees
    A = np.kron(_local_matrix_1d(d2), _local_matrix_1d(d1))
    # sigma_J sits at column position ceil(d/2) in each direction.
    pos = (d2 - d2 // 2) * (d1 + 1) + (d1 - d1 // 2)
    e = np.zeros(A.shape[0])
    e[pos] = 1.0
    try:
        w = np.linalg.solve(A.T, e)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"singular local collocation system for degrees {degrees}") from exc
    w = w.reshape(d2 + 1, d1 + 1)
    w.setflags(write=False)
    return w


def sample_lattice(grid: UniformGrid, degrees):
    """1D coordinates of all collocation points on ``grid``.

    Point ``k`` in x is ``x_{-d1 + d1//2} + k h_x / d1``, ``k = 0..d1 (N1 + d1)``.
    """
    d1, d2 = degrees
    n1, n2 = grid.n
    hx, hy = grid.h
    xs = grid.xs(-d1 + d1 // 2) + np.arange(d1 * (n1 + d1) + 1) * hx / d1
    ys = grid.ys(-d2 + d2 // 2) + np.arange(d2 * (n2 + d2) + 1) * hy / d2
    return xs, ys


def point_rows_cols(degrees, rows, cols):
    """Sub-lattice positions used by coefficients at array positions ``(rows, cols)``."""
    d1, d2 = degrees
    pr = d2 * np.asarray(rows)[:, None] + np.arange(d2 + 1)
    pc = d1 * np.asarray(cols)[:, None] + np.arange(d1 + 1)
    return pr, pc


def comparison_functionals(V, degrees, rows=None, cols=None) -> np.ndarray:
    """``lambda_hat`` from values ``V`` on the collocation lattice."""
    d1, d2 = degrees
    W = collocation_weights(tuple(degrees))
    win = np.lib.stride_tricks.sliding_window_view(V, (d2 + 1, d1 + 1))[::d2, ::d1]
    # evaluate every window, then select, so subsets match the full operator bitwise
    with np.errstate(invalid="ignore"):
        out = np.einsum("...ab,ab->...", win, W)
    return out if rows is None else out[rows, cols]


def comparison_qi(fun, degrees, grid: UniformGrid) -> np.ndarray:
    """Coefficient matrix of ``Q_hat(fun)`` on ``grid`` (layout as :mod:`tensor_qi`)."""
    xs, ys = sample_lattice(grid, degrees)
    X, Y = np.meshgrid(xs, ys)
    V = fun(X, Y)
    M = comparison_functionals(V, degrees)
    assert M.shape == coeff_shape(grid, degrees)
    return M
