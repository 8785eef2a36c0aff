"""Independent reference implementations used only by the tests."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from hermite_qi.bspline import bspline_deriv
from hermite_qi.uniform_qi import qi_coefficients


def b2_unrolled(x):
    # quadratic cardinal B-spline, pieces written out by hand
    if 0 <= x < 1:
        return x * x / 2
    if 1 <= x < 2:
        return (-2 * x * x + 6 * x - 3) / 2
    if 2 <= x < 3:
        return (3 - x) ** 2 / 2
    return 0.0


def b3_unrolled(x):
    if 0 <= x < 1:
        return x**3 / 6
    if 1 <= x < 2:
        return (-3 * x**3 + 12 * x**2 - 12 * x + 4) / 6
    if 2 <= x < 3:
        return (3 * x**3 - 24 * x**2 + 60 * x - 44) / 6
    if 3 <= x < 4:
        return (4 - x) ** 3 / 6
    return 0.0


def cox_de_boor(knots, k, d, x):
    """General-knot recursion (no integer-knot shortcuts)."""
    if d == 0:
        return 1.0 if knots[k] <= x < knots[k + 1] else 0.0
    out = 0.0
    den = knots[k + d] - knots[k]
    if den:
        out += (x - knots[k]) / den * cox_de_boor(knots, k, d - 1, x)
    den = knots[k + d + 1] - knots[k + 1]
    if den:
        out += (knots[k + d + 1] - x) / den * cox_de_boor(knots, k + 1, d - 1, x)
    return out


def toeplitz_AB(d, n):
    """Dense ``(n + d) x (n + 2d - 1)`` banded matrices with rows ``alpha``/``beta``."""
    co = qi_coefficients(d)
    A = np.zeros((n + d, n + 2 * d - 1))
    B = np.zeros_like(A)
    for r in range(n + d):
        A[r, r : r + d] = co.alpha
        B[r, r : r + d] = co.beta
    return A, B


def dense_tensor_qi(F, Fx, Fy, Fxy, degrees, h, n):
    """The global matrix form of the tensor quasi-interpolant."""
    A1, B1 = toeplitz_AB(degrees[0], n[0])
    A2, B2 = toeplitz_AB(degrees[1], n[1])
    hx, hy = h
    return A2 @ F @ A1.T - hx * A2 @ Fx @ B1.T - hy * B2 @ Fy @ A1.T + hx * hy * B2 @ Fxy @ B1.T


def naive_tensor_eval(M, degrees, grid, x, y, deriv=(0, 0)):
    """Sum over every basis function, no locality."""

    d1, d2 = degrees
    (ox, oy), (hx, hy) = grid.origin, grid.h
    tx, ty = (x - ox) / hx, (y - oy) / hy
    n1, n2 = grid.n
    if tx >= n1:  # closed right edge: use the left limit
        tx = n1 - 1e-13
    if ty >= n2:
        ty = n2 - 1e-13
    total = 0.0
    for p in range(M.shape[0]):
        j = p - d2
        by = bspline_deriv(d2, ty - j, deriv[1]) / hy ** deriv[1]
        if by == 0:
            continue
        for q in range(M.shape[1]):
            i = q - d1
            total += M[p, q] * by * bspline_deriv(d1, tx - i, deriv[0]) / hx ** deriv[0]
    return total


def support_cells_1d(idx, d, n):
    """Cells (clipped to ``[0, n)``) covered by the B-spline of global index ``idx``."""
    return [c for c in range(idx, idx + d + 1) if 0 <= c < n]


def brute_active_sets(mesh, degrees):
    """``A^l`` per level from the definition, by enumerating every index."""
    d1, d2 = degrees
    out = []
    for l in range(mesh.depth):
        n1, n2 = mesh.grid(l).n
        om = mesh.omega(l)
        om_next = mesh.omega(l + 1, at=l)
        act = set()
        for j in range(-d2, n2):
            for i in range(-d1, n1):
                cells = [(a, b) for a in support_cells_1d(i, d1, n1) for b in support_cells_1d(j, d2, n2)]
                if all(om[b, a] for a, b in cells) and not all(om_next[b, a] for a, b in cells):
                    act.add((j, i))
        out.append(act)
    return out


def brute_assign(mesh, x, y):
    """Owner of every point by scanning all active cells in lexicographic order."""
    cells = sorted(mesh.cells())
    out = []
    for px, py in zip(x, y):
        for c in cells:
            (x0, x1), (y0, y1) = mesh.cell_bounds(c)
            if x0 - 1e-12 <= px <= x1 + 1e-12 and y0 - 1e-12 <= py <= y1 + 1e-12:
                out.append(c)
                break
    return np.array(out)


def rational_fd_check(order):
    """Taylor moments of the stencil, exact."""
    from hermite_qi.hqi import fd_weights

    offs, w = fd_weights(order)
    ws = [Fraction(v).limit_denominator(1000) for v in w]
    return [sum(wk * Fraction(int(s)) ** p for wk, s in zip(ws, offs)) for p in range(order + 2)]


def _ext_basis(d, t, n, order=0):
    # all level B-splines, evaluated also outside the domain
    return np.stack([bspline_deriv(d, t - j, order) for j in range(-d, n)], axis=-1)


def spline_hermite_data(coeffs, degrees, grid):
    """Hermite data of the tensor spline with ``coeffs`` on the extended lattice."""
    from hermite_qi.tensor_qi import HermiteData, lattice

    d1, d2 = degrees
    xs, ys = lattice(grid, degrees)
    tx = (xs - grid.origin[0]) / grid.h[0]
    ty = (ys - grid.origin[1]) / grid.h[1]
    n1, n2 = grid.n
    Bx = [_ext_basis(d1, tx, n1, r) / grid.h[0] ** r for r in (0, 1)]
    By = [_ext_basis(d2, ty, n2, s) / grid.h[1] ** s for s in (0, 1)]
    return HermiteData(
        grid, tuple(degrees),
        By[0] @ coeffs @ Bx[0].T, By[0] @ coeffs @ Bx[1].T,
        By[1] @ coeffs @ Bx[0].T, By[1] @ coeffs @ Bx[1].T,
    )


def extended_spline(coeffs, degrees, grid):
    """The tensor spline as a plain callable that also works outside the domain."""
    d1, d2 = degrees
    n1, n2 = grid.n

    def f(X, Y):
        tx = (np.asarray(X) - grid.origin[0]) / grid.h[0]
        ty = (np.asarray(Y) - grid.origin[1]) / grid.h[1]
        return np.einsum("...b,ba,...a->...", _ext_basis(d2, ty, n2), coeffs, _ext_basis(d1, tx, n1))

    return f
