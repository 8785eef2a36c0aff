"""Hierarchical quasi-interpolants on THB-spline spaces and their error bounds.

``Q_H(f) = sum_l sum_{J in A^l} lambda_J^l(f) T_J^l`` where ``lambda_J^l`` is
the tensor functional of level ``l``.  The same construction is applied to the
collocation operator (``Q_hat_H``) and to the finite-difference variant
(``Q^a_H``), which only differs in the data provider.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import collocation_qi
from .bspline import UniformGrid
from .hierarchy import HierarchicalBasis, HierarchicalMesh, ThbBasis
from .tensor_qi import (
    TensorSpline,
    bound_constants,
    coeff_shape,
    data_shape,
    lattice,
    window_functionals,
)

_window = np.lib.stride_tricks.sliding_window_view

# finest sub-grid used to key sample points: 2^12 dyadic levels times 12
_KEY_SCALE = 12 * 2**12


class DataCoverageError(LookupError):
    def __init__(self, level, point, reason="no data"):
        super().__init__(f"{reason} at level {level}, point {point}")
        self.level = level
        self.point = point


class EvaluationCounter:
    """Records distinct ``(quantity, point)`` queries against a data source.

    Points are keyed on an exact dyadic/ternary sub-lattice of the base grid,
    so the same physical location requested from two levels counts once in
    :attr:`count`; :attr:`count_by_level` keeps the level apart.
    """

    def __init__(self, base: UniformGrid):
        self.origin = base.origin
        self.h = base.h
        self.keys = set()

    def record(self, quantity: str, level: int, x, y):
        kx = np.rint((np.asarray(x) - self.origin[0]) / self.h[0] * _KEY_SCALE).astype(np.int64)
        ky = np.rint((np.asarray(y) - self.origin[1]) / self.h[1] * _KEY_SCALE).astype(np.int64)
        self.keys.update(zip([quantity] * kx.size, [level] * kx.size, kx.ravel().tolist(), ky.ravel().tolist()))

    @property
    def count(self) -> int:
        return len({(q, x, y) for q, _, x, y in self.keys})

    @property
    def count_by_level(self) -> int:
        return len(self.keys)


class FunctionSource:
    """Values of ``f`` only, optionally restricted to a rectangle."""

    def __init__(self, fun, bounds=None, counter: EvaluationCounter | None = None):
        self.fun = fun
        self.bounds = bounds
        self.counter = counter

    def values(self, level, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.bounds is not None:
            a1, b1, a2, b2 = self.bounds
            tol = 1e-12
            bad = (x < a1 - tol) | (x > b1 + tol) | (y < a2 - tol) | (y > b2 + tol)
            if np.any(bad):
                k = int(np.argmax(bad.ravel()))
                raise DataCoverageError(level, (float(x.ravel()[k]), float(y.ravel()[k])), "outside data region")
        if self.counter is not None:
            self.counter.record("f", level, x, y)
        return self.fun(x, y)


class AnalyticProvider:
    """Exact ``f, f_x, f_y, f_xy`` from a closed-form function."""

    def __init__(self, fun, counter: EvaluationCounter | None = None):
        self.fun = fun
        self.counter = counter

    def hermite(self, level, x, y):
        if self.counter is not None:
            for q in ("f", "fx", "fy", "fxy"):
                self.counter.record(q, level, x, y)
        return self.fun.hermite(np.asarray(x, float), np.asarray(y, float))


def fd_weights(order: int):
    """First-derivative stencil of accuracy ``order`` on ``order + 1`` points.

    Offsets run from ``-order//2`` to ``order - order//2``; order 3 gives
    ``(-2, -3, 6, -1)/6`` on offsets ``(-1, 0, 1, 2)``.
    """
    offsets = list(range(-(order // 2), order - order // 2 + 1))
    n = len(offsets)
    # Vandermonde conditions sum_k w_k s_k^p = [p == 1], exact in rationals
    A = [[Fraction(s) ** p for s in offsets] for p in range(n)]
    b = [Fraction(int(p == 1)) for p in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                fac = A[r][col] / A[col][col]
                A[r] = [u - fac * v for u, v in zip(A[r], A[col])]
                b[r] -= fac * b[col]
    w = [b[r] / A[r][r] for r in range(n)]
    return np.array(offsets), np.array([float(v) for v in w])


class FiniteDifferenceProvider:
    """Hermite data synthesised from function values on the level-``l`` grid.

    ``f_x`` and ``f_y`` use the order-``k`` stencils of :func:`fd_weights`;
    ``f_xy`` applies the x stencil and then the y stencil.  The same stencil is
    used everywhere, so values are read up to ``order - order//2`` steps
    beyond the extended lattice (see :func:`required_enlargement`).
    """

    def __init__(self, source, degrees, orders=(3, 3), base: UniformGrid | None = None):
        k1, k2 = orders
        d1, d2 = degrees
        if k1 < d1 or k2 < d2:
            raise ValueError(f"finite-difference orders {orders} must be >= degrees {degrees}")
        self.source = source
        self.orders = tuple(orders)
        self.base = base or UniformGrid()
        self.ox, self.wx = fd_weights(k1)
        self.oy, self.wy = fd_weights(k2)

    def hermite(self, level, x, y):
        hx, hy = self.base.refined(level).h
        x, y = np.asarray(x, float), np.asarray(y, float)
        X = x[..., None, None] + self.ox[None, :] * hx
        Y = y[..., None, None] + self.oy[:, None] * hy
        X, Y = np.broadcast_arrays(X, Y)
        V = self.source.values(level, X, Y)  # [..., y-offset, x-offset]
        ix0 = int(np.nonzero(self.ox == 0)[0][0])
        iy0 = int(np.nonzero(self.oy == 0)[0][0])
        f = V[..., iy0, ix0]
        fx = V[..., iy0, :] @ self.wx / hx
        fy = V[..., :, ix0] @ self.wy / hy
        fxy = np.einsum("...ab,a,b->...", V, self.wy, self.wx) / (hx * hy)
        return f, fx, fy, fxy


def required_enlargement(orders) -> tuple:
    """Extra steps per side (left, right) beyond the extended lattice, per direction."""
    return tuple((k // 2, k - k // 2) for k in orders)


def fd_hermite_provider(source, degrees, orders=(3, 3), base=None) -> FiniteDifferenceProvider:
    return FiniteDifferenceProvider(source, degrees, orders, base)


@dataclass
class HierSpline:
    """A spline in the THB space of ``mesh`` given by per-level coefficient arrays."""

    mesh: HierarchicalMesh
    degrees: tuple
    level_coeffs: list
    basis: HierarchicalBasis = field(repr=False, default=None)

    def __post_init__(self):
        if self.basis is None:
            self.basis = HierarchicalBasis(self.mesh, self.degrees)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def coefficient(self, level, J) -> float:
        d1, d2 = self.degrees
        return float(self.level_coeffs[level][J[0] + d2, J[1] + d1])

    def active_coefficients(self) -> dict:
        return {
            (l, J): self.coefficient(l, J)
            for l in range(self.mesh.depth)
            for J in self.basis.active_indices(l)
        }

    @cached_property
    def finest(self) -> TensorSpline:
        """Exact representation in the finest tensor B-spline basis."""
        c = self.basis.to_finest(self.level_coeffs)
        return TensorSpline(c, self.degrees, self.mesh.grid(self.mesh.depth - 1))

    def __call__(self, x, y, deriv=(0, 0)):
        return self.finest(x, y, deriv)

    def on_grid(self, xs, ys, deriv=(0, 0)):
        return self.finest.on_grid(xs, ys, deriv)


def _needed(active, win_shape):
    """Data positions touched by windows of shape ``win_shape`` anchored at active entries."""
    r, c = win_shape
    pad = np.pad(active, ((r - 1, r - 1), (c - 1, c - 1)))
    return _window(pad, (r, c)).any(axis=(2, 3))


def hierarchical_qi(mesh: HierarchicalMesh, degrees, provider, basis=None) -> HierSpline:
    """``Q_H(f)``: only active functionals are computed, and only their data is queried."""
    degrees = tuple(degrees)
    d1, d2 = degrees
    basis = basis or HierarchicalBasis(mesh, degrees)
    coeffs = []
    for l in range(mesh.depth):
        grid = mesh.grid(l)
        act = basis.active[l]
        c = np.zeros(coeff_shape(grid, degrees))
        if act.any():
            xs, ys = lattice(grid, degrees)
            need = _needed(act, (d2, d1))
            assert need.shape == data_shape(grid, degrees)
            jj, ii = np.nonzero(need)
            vals = provider.hermite(l, xs[ii], ys[jj])
            arrays = []
            for v in vals:
                A = np.full(need.shape, np.nan)
                A[jj, ii] = v
                arrays.append(A)
            rows, cols = np.nonzero(act)
            c[rows, cols] = window_functionals(*arrays, degrees, grid.h, rows, cols)
        coeffs.append(c)
    return HierSpline(mesh, degrees, coeffs, basis)


def hierarchical_comparison_qi(mesh: HierarchicalMesh, degrees, source, basis=None) -> HierSpline:
    """``Q_hat_H(f)`` from function values at the collocation points of active functionals."""
    degrees = tuple(degrees)
    d1, d2 = degrees
    basis = basis or HierarchicalBasis(mesh, degrees)
    coeffs = []
    for l in range(mesh.depth):
        grid = mesh.grid(l)
        act = basis.active[l]
        c = np.zeros(coeff_shape(grid, degrees))
        if act.any():
            xs, ys = collocation_qi.sample_lattice(grid, degrees)
            need = np.zeros((len(ys), len(xs)), dtype=bool)
            rows, cols = np.nonzero(act)
            pr, pc = collocation_qi.point_rows_cols(degrees, rows, cols)
            need[pr[:, :, None], pc[:, None, :]] = True
            jj, ii = np.nonzero(need)
            V = np.full(need.shape, np.nan)
            V[jj, ii] = source.values(l, xs[ii], ys[jj])
            c[rows, cols] = collocation_qi.comparison_functionals(V, degrees, rows, cols)
        coeffs.append(c)
    return HierSpline(mesh, degrees, coeffs, basis)


# ----------------------------------------------------------------------------
# Error-bound utilities


@dataclass(frozen=True)
class Region:
    """``C`` for one cell: constituent cells ``(level, i, j)`` and enclosing box."""

    cell: tuple
    cells: frozenset
    box: tuple  # ((x0, x1), (y0, y1))

    @property
    def width(self) -> float:
        return self.box[0][1] - self.box[0][0]

    @property
    def height(self) -> float:
        return self.box[1][1] - self.box[1][0]

    def contains_cell(self, bounds) -> bool:
        (x0, x1), (y0, y1) = bounds
        (X0, X1), (Y0, Y1) = self.box
        return X0 <= x0 and x1 <= X1 and Y0 <= y0 and y1 <= Y1


def region_C(thb: ThbBasis, cell) -> Region:
    """Union of the functional supports of all THB functions non-zero on ``cell``, with ``cell``."""
    d1, d2 = thb.degrees
    mesh = thb.mesh
    parts = {tuple(cell)}
    for l, J in thb.cell_index().get(tuple(cell), []):
        j, i = J
        for a in range(i + 1, i + d1):
            for b in range(j + 1, j + d2):
                parts.add((l, a, b))
    xs, ys = [], []
    for l, a, b in parts:
        g = mesh.grid(l)
        xs += [float(g.xs(a)), float(g.xs(a + 1))]
        ys += [float(g.ys(b)), float(g.ys(b + 1))]
    return Region(tuple(cell), frozenset(parts), ((min(xs), max(xs)), (min(ys), max(ys))))


@dataclass(frozen=True)
class TheoremConstants:
    m: int
    w1: float
    w2: float
    k_m: int
    K: float
    gamma: float
    v1: float
    v2: float
    v3: float


def diameter_factors(degrees, m) -> tuple:
    """``w_i`` with ``H_x(C) <= w_1 h_{x,k}``, ``H_y(C) <= w_2 h_{y,k}`` on class-``m`` meshes.

    A level-``l`` cell is covered by functionals spanning ``2 d_i - 1`` steps,
    and ``h_l <= 2^{m-1} h_k``, hence ``w_i = 2^{m-1} (2 d_i - 1)``.
    """
    return tuple(2 ** (m - 1) * (2 * d - 1) for d in degrees)


def theorem_constants(degrees, m: int, cell_level: int, base_h) -> TheoremConstants:
    d1, d2 = degrees
    kap = bound_constants(degrees)
    w1, w2 = diameter_factors(degrees, m)
    gamma = 2 ** (m - 1) * max(1.0, base_h[0], base_h[1])
    K = 1 + kap.k00 + (kap.k10 + kap.k01 + kap.k11) * gamma
    return TheoremConstants(
        m=m,
        w1=w1,
        w2=w2,
        k_m=max(0, cell_level - m + 1),
        K=K,
        gamma=gamma,
        v1=K * w1 ** (d1 + 1),
        v2=K * w2 ** (d2 + 1),
        v3=K * w1 ** (d1 + 1) * w2 ** (d2 + 1),
    )


def lemma2_bound(mesh: HierarchicalMesh, degrees, cell, extrema, m: int) -> float:
    """Upper bound of ``|Q_H(f)|`` on ``cell``.

    ``extrema`` maps ``(r, s)`` in ``{(0,0), (1,0), (0,1), (1,1)}`` to
    ``max |f^{(r,s)}|`` over the cell's region ``C``.
    """
    kap = bound_constants(degrees)
    hx, hy = mesh.grid(cell[0]).h
    s = 2 ** (m - 1)
    return (
        kap.k00 * extrema[(0, 0)]
        + s * hx * kap.k10 * extrema[(1, 0)]
        + s * hy * kap.k01 * extrema[(0, 1)]
        + s * s * hx * hy * kap.k11 * extrema[(1, 1)]
    )


def theorem1_bound(mesh: HierarchicalMesh, degrees, cell, extrema, m: int) -> float:
    """Upper bound of ``|f - Q_H(f)|`` on ``cell``.

    ``extrema`` maps ``(d1+1, 0)``, ``(0, d2+1)`` and ``(d1+1, d2+1)`` to the
    maxima of those partial derivatives over ``C``.
    """
    d1, d2 = degrees
    hx, hy = mesh.grid(cell[0]).h
    tc = theorem_constants(degrees, m, cell[0], mesh.base.h)
    return (
        tc.v1 * extrema[(d1 + 1, 0)] * hx ** (d1 + 1)
        + tc.v2 * extrema[(0, d2 + 1)] * hy ** (d2 + 1)
        + tc.v3 * extrema[(d1 + 1, d2 + 1)] * hx ** (d1 + 1) * hy ** (d2 + 1)
    )


class CellExtrema:
    """Sampled ``max |f^{(r,s)}|`` per cell, on an ``11 x 11`` grid per cell.

    Cells outside the domain (up to ``margin`` per side) are included because
    functional supports of boundary functions leave ``Omega``.
    """

    def __init__(self, fun, base: UniformGrid, margin: int = 5, samples: int = 10):
        self.fun = fun
        self.base = base
        self.margin = margin
        self.samples = samples
        self._tables = {}

    def table(self, level, deriv):
        key = (level, deriv)
        if key not in self._tables:
            g = self.base.refined(level)
            n1, n2 = g.n
            e, s = self.margin, self.samples
            tx = (np.arange(s * (n1 + 2 * e) + 1) / s) - e
            ty = (np.arange(s * (n2 + 2 * e) + 1) / s) - e
            X, Y = np.meshgrid(g.xs(tx), g.ys(ty))
            V = np.abs(self.fun.derivative(*deriv)(X, Y))
            rows = np.max([V[k : k + s * (n2 + 2 * e) : s] for k in range(s + 1)], axis=0)
            self._tables[key] = np.max(
                [rows[:, k : k + s * (n1 + 2 * e) : s] for k in range(s + 1)], axis=0
            )
        return self._tables[key]

    def over(self, cells, deriv) -> float:
        best = 0.0
        for l, i, j in cells:
            best = max(best, float(self.table(l, deriv)[j + self.margin, i + self.margin]))
        return best

    def region(self, region: Region, derivs) -> dict:
        return {rs: self.over(region.cells, rs) for rs in derivs}


def cell_samples(mesh: HierarchicalMesh, cell, samples: int = 10):
    """Sample points (11 x 11 by default) of a cell, flattened."""
    (x0, x1), (y0, y1) = mesh.cell_bounds(cell)
    t = np.linspace(0.0, 1.0, samples + 1)
    X, Y = np.meshgrid(x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    return X.ravel(), Y.ravel()
