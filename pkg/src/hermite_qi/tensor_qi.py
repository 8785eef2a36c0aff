"""Tensor-product Hermite BS quasi-interpolant ``Q = Q_2 Q_1``.

Layout conventions (shared by every module):

* Hermite data arrays have shape ``(N2 + 2 d2 - 1, N1 + 2 d1 - 1)``; entry
  ``[p, q]`` is the value at ``(x_{q - d1 + 1}, y_{p - d2 + 1})``.
* Coefficient matrices have shape ``(N2 + d2, N1 + d1)``; entry ``[p, q]``
  multiplies ``B_{d1}(x/h_x - i) B_{d2}(y/h_y - j)`` with ``i = q - d1``,
  ``j = p - d2``.  A multi-index ``J`` is always the pair ``(j, i)``.

With these offsets the ``d2 x d1`` data window of ``lambda_J`` starts at the
same array position as the coefficient of ``J``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import UniformGrid, basis_matrix, local_basis, locate
from .uniform_qi import OutOfDomainError, qi_coefficients

_window = np.lib.stride_tricks.sliding_window_view


def data_shape(grid: UniformGrid, degrees) -> tuple:
    d1, d2 = degrees
    n1, n2 = grid.n
    return (n2 + 2 * d2 - 1, n1 + 2 * d1 - 1)


def coeff_shape(grid: UniformGrid, degrees) -> tuple:
    d1, d2 = degrees
    n1, n2 = grid.n
    return (n2 + d2, n1 + d1)


def lattice(grid: UniformGrid, degrees):
    """1D coordinates of the inner points of the extended lattice."""
    d1, d2 = degrees
    n1, n2 = grid.n
    return grid.xs(np.arange(-d1 + 1, n1 + d1)), grid.ys(np.arange(-d2 + 1, n2 + d2))


@dataclass
class HermiteData:
    grid: UniformGrid
    degrees: tuple
    F: np.ndarray
    Fx: np.ndarray
    Fy: np.ndarray
    Fxy: np.ndarray

    def __post_init__(self):
        shape = data_shape(self.grid, self.degrees)
        for name in ("F", "Fx", "Fy", "Fxy"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)

    @classmethod
    def from_function(cls, fun, grid: UniformGrid, degrees) -> "HermiteData":
        xs, ys = lattice(grid, degrees)
        X, Y = np.meshgrid(xs, ys)
        return cls(grid, tuple(degrees), *fun.hermite(X, Y))


@dataclass(frozen=True)
class BoundConstants:
    k00: float
    k10: float
    k01: float
    k11: float


def bound_constants(degrees) -> BoundConstants:
    c1, c2 = qi_coefficients(degrees[0]), qi_coefficients(degrees[1])
    return BoundConstants(
        k00=c2.alpha_norm1 * c1.alpha_norm1,
        k10=c2.alpha_norm1 * c1.beta_norm1,
        k01=c2.beta_norm1 * c1.alpha_norm1,
        k11=c2.beta_norm1 * c1.beta_norm1,
    )


def _weights(degrees, h):
    c1, c2 = qi_coefficients(degrees[0]), qi_coefficients(degrees[1])
    return c1.alpha, c1.beta, c2.alpha, c2.beta, h[0], h[1]


def lambda_J(data: HermiteData, J) -> float:
    """Single functional ``lambda_J`` from its ``d2 x d1`` data windows."""
    d1, d2 = data.degrees
    j, i = J
    p, q = j + d2, i + d1
    rows, cols = data.F.shape
    if p < 0 or q < 0 or p + d2 > rows or q + d1 > cols:
        raise IndexError(f"functional window of J={J} falls outside the data grid")
    a1, b1, a2, b2, hx, hy = _weights(data.degrees, data.grid.h)
    win = lambda A: A[p : p + d2, q : q + d1]
    return float(
        a2 @ win(data.F) @ a1
        - hx * (a2 @ win(data.Fx) @ b1)
        - hy * (b2 @ win(data.Fy) @ a1)
        + hx * hy * (b2 @ win(data.Fxy) @ b1)
    )


def window_functionals(F, Fx, Fy, Fxy, degrees, h, rows=None, cols=None):
    """Vectorised ``lambda_J`` for every window (or the selected ones)."""
    d1, d2 = degrees
    a1, b1, a2, b2, hx, hy = _weights(degrees, h)

    def form(A, w2, w1):
        return np.einsum("...rs,r,s->...", _window(A, (d2, d1)), w2, w1)

    # all windows, then select: keeps results bitwise equal to the full operator
    with np.errstate(invalid="ignore"):
        out = (
            form(F, a2, a1)
            - hx * form(Fx, a2, b1)
            - hy * form(Fy, b2, a1)
            + hx * hy * form(Fxy, b2, b1)
        )
    return out if rows is None else out[rows, cols]


def tensor_qi(data: HermiteData) -> np.ndarray:
    """Coefficient matrix ``M`` of ``Q(f)`` over the level's B-spline basis."""
    return window_functionals(
        data.F, data.Fx, data.Fy, data.Fxy, data.degrees, data.grid.h
    )


def functional_support(J, degrees, grid: UniformGrid):
    """``[x_{i+1}, x_{i+d1}] x [y_{j+1}, y_{j+d2}]`` as ``((x0, x1), (y0, y1))``."""
    j, i = J
    d1, d2 = degrees
    return (
        (float(grid.xs(i + 1)), float(grid.xs(i + d1))),
        (float(grid.ys(j + 1)), float(grid.ys(j + d2))),
    )


@dataclass
class TensorSpline:
    """``B_2(y)^T M B_1(x)`` on a uniform grid."""

    coeffs: np.ndarray
    degrees: tuple
    grid: UniformGrid

    def _scaled(self, x, y):
        (ox, oy), (hx, hy) = self.grid.origin, self.grid.h
        return (np.asarray(x, float) - ox) / hx, (np.asarray(y, float) - oy) / hy

    def __call__(self, x, y, deriv=(0, 0)):
        return tensor_qi_eval(self.coeffs, self.degrees, self.grid, x, y, deriv)

    def on_grid(self, xs, ys, deriv=(0, 0)) -> np.ndarray:
        """Values on the tensor grid ``ys x xs`` (rows follow ``y``)."""
        d1, d2 = self.degrees
        tx, ty = self._scaled(xs, ys)
        n1, n2 = self.grid.n
        Bx = basis_matrix(d1, tx, n1, deriv[0], self.grid.h[0])
        By = basis_matrix(d2, ty, n2, deriv[1], self.grid.h[1])
        return By @ self.coeffs @ Bx.T


def tensor_qi_eval(M, degrees, grid: UniformGrid, x, y, deriv=(0, 0)):
    """Evaluate the tensor spline with coefficients ``M`` at scattered points.

    Only the ``(d1+1)(d2+1)`` functions non-zero on each point's cell are
    summed.
    """
    r, s = deriv
    d1, d2 = degrees
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    if not np.all(grid.contains(x, y)):
        raise OutOfDomainError("evaluation point outside the grid domain")
    (ox, oy), (hx, hy) = grid.origin, grid.h
    n1, n2 = grid.n
    kx, ux = locate((x - ox) / hx, n1)
    ky, uy = locate((y - oy) / hy, n2)
    Vx = local_basis(d1, ux.ravel(), r) / hx**r
    Vy = local_basis(d2, uy.ravel(), s) / hy**s
    M = np.asarray(M, dtype=float)
    rows = ky.ravel()[:, None] + np.arange(d2 + 1)
    cols = kx.ravel()[:, None] + np.arange(d1 + 1)
    block = M[rows[:, :, None], cols[:, None, :]]
    out = np.einsum("nb,nba,na->n", Vy, block, Vx).reshape(x.shape)
    return float(out.ravel()[0]) if scalar else out


def tensor_spline(fun, degrees, grid: UniformGrid) -> TensorSpline:
    """Convenience: sample ``fun`` and build ``Q(fun)`` on ``grid``."""
    data = HermiteData.from_function(fun, grid, degrees)
    return TensorSpline(tensor_qi(data), tuple(degrees), grid)
