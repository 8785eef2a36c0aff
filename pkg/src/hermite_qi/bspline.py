"""Uniform (cardinal) B-spline kernels.

The cardinal B-spline ``B_d`` of degree ``d`` has integer knots ``0, ..., d+1``.
A uniform spline space of step ``h`` on ``[a, b]`` is spanned by the translates
``B_d((x - a)/h - j)``, ``j = -d, ..., N-1``.  Functions in this module work on
those integer-knot translates; callers scale by ``h``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


class InvalidDegreeError(ValueError):
    pass


class InvalidOrderError(ValueError):
    pass


def _check_degree(d):
    if int(d) != d or d < 1:
        raise InvalidDegreeError(f"degree must be an integer >= 1, got {d!r}")


def _cardinal(d, x):
    # Cox-de Boor on integer knots, right-continuous (B_0 = 1 on [0, 1)).
    x = np.asarray(x, dtype=float)
    if d == 0:
        return ((x >= 0.0) & (x < 1.0)).astype(float)
    return (x * _cardinal(d - 1, x) + (d + 1 - x) * _cardinal(d - 1, x - 1.0)) / d


def bspline_eval(d: int, x):
    """Value of the cardinal B-spline ``B_d`` at ``x`` (scalar or array)."""
    _check_degree(d)
    out = _cardinal(d, x)
    return float(out) if np.ndim(out) == 0 else out


def bspline_deriv(d: int, x, order: int):
    """``order``-th derivative of ``B_d`` at ``x``.

    Uses ``B_d' (x) = B_{d-1}(x) - B_{d-1}(x - 1)`` repeatedly, so the
    result is an alternating binomial combination of shifted ``B_{d-order}``.
    """
    _check_degree(d)
    if order < 0 or order > d:
        raise InvalidOrderError(f"derivative order must lie in [0, {d}], got {order}")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in range(order + 1):
        out = out + (-1) ** i * comb(order, i) * _cardinal(d - order, x - i)
    return float(out) if np.ndim(out) == 0 else out


def subdivision_coeffs(d: int) -> np.ndarray:
    """Two-scale coefficients ``c_k`` with ``B_d(x) = sum_k c_k B_d(2x - k)``."""
    _check_degree(d)
    return np.array([comb(d + 1, k) for k in range(d + 2)], dtype=float) / 2**d


def refine_coeffs_1d(d: int, coeffs) -> np.ndarray:
    """Coefficients over the dyadically refined basis for the same spline.

    ``coeffs[k]`` multiplies ``B_d(t - (k + o))`` for some offset ``o``; the
    result ``out[m]`` multiplies ``B_d(2t - (m + 2o))``.  With the global
    index convention ``j = -d, ..., N-1`` at the coarse level the fine indices
    run ``-2d, ..., 2N + d - 1``; callers that keep only the fine basis
    ``-d, ..., 2N - 1`` slice ``out[d:-d]`` (the discarded functions vanish on
    the domain).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    c = subdivision_coeffs(d)
    out = np.zeros(2 * len(coeffs) + d)
    for k, s in enumerate(c):
        out[k : k + 2 * len(coeffs) : 2] += s * coeffs
    return out


def refine_matrix(d: int, n_coarse: int) -> np.ndarray:
    """Matrix ``R`` mapping coarse domain-basis coefficients to fine ones.

    Coarse basis ``j = -d..n_coarse-1``, fine basis ``m = -d..2*n_coarse-1``.
    """
    c = subdivision_coeffs(d)
    nc, nf = n_coarse + d, 2 * n_coarse + d
    R = np.zeros((nf, nc))
    for col in range(nc):
        j = col - d
        for k, s in enumerate(c):
            m = 2 * j + k
            row = m + d
            if 0 <= row < nf:
                R[row, col] = s
    return R


def local_basis(d: int, u, order: int = 0) -> np.ndarray:
    """Values of the ``d+1`` B-splines that are non-zero on a unit cell.

    For local coordinate ``u`` in the closed interval ``[0, 1]`` of cell ``k``
    column ``r`` holds ``B_d^{(order)}(u + d - r)``, i.e. the function with
    global index ``k - d + r``.  The polynomial pieces are used directly, so
    ``u = 1`` gives left limits (closed right cell edge).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if order > d:
        return np.zeros(u.shape + (d + 1,))
    p = d - order
    N = np.ones(u.shape + (1,))
    for q in range(1, p + 1):
        new = np.zeros(u.shape + (q + 1,))
        for r in range(q + 1):
            if r >= 1:
                new[..., r] += (u + q - r) * N[..., r - 1]
            if r <= q - 1:
                new[..., r] += (r + 1 - u) * N[..., r]
        N = new / q
    # Each derivative turns N^{q}_r into N^{q-1}_{r-1} - N^{q-1}_r.
    for q in range(p + 1, d + 1):
        new = np.zeros(u.shape + (q + 1,))
        new[..., 1:] += N
        new[..., :-1] -= N
        N = new
    return N


@dataclass(frozen=True)
class UniformGrid:
    """Uniform tensor grid over a rectangle, dyadically refined ``level`` times."""

    domain: tuple = (-1.0, 1.0, -1.0, 1.0)  # (a1, b1, a2, b2)
    n_base: tuple = (8, 8)
    level: int = 0

    def __post_init__(self):
        a1, b1, a2, b2 = self.domain
        if not (b1 > a1 and b2 > a2):
            raise ValueError(f"degenerate domain {self.domain}")
        if min(self.n_base) < 1 or self.level < 0:
            raise ValueError("cell counts must be positive and level >= 0")

    @property
    def n(self) -> tuple:
        return (self.n_base[0] * 2**self.level, self.n_base[1] * 2**self.level)

    @property
    def h(self) -> tuple:
        a1, b1, a2, b2 = self.domain
        return ((b1 - a1) / self.n[0], (b2 - a2) / self.n[1])

    @property
    def origin(self) -> tuple:
        return (self.domain[0], self.domain[2])

    def refined(self, levels: int = 1) -> "UniformGrid":
        return UniformGrid(self.domain, self.n_base, self.level + levels)

    def xs(self, i):
        return self.domain[0] + np.asarray(i) * self.h[0]

    def ys(self, j):
        return self.domain[2] + np.asarray(j) * self.h[1]

    def contains(self, x, y) -> np.ndarray:
        a1, b1, a2, b2 = self.domain
        tol = 1e-12 * max(b1 - a1, b2 - a2)
        x, y = np.asarray(x), np.asarray(y)
        return (x >= a1 - tol) & (x <= b1 + tol) & (y >= a2 - tol) & (y <= b2 + tol)


def locate(t, n: int):
    """Cell index and local coordinate for scaled coordinates ``t``.

    ``t`` is measured in cell widths from the left edge; the last cell is
    closed on the right.
    """
    t = np.asarray(t, dtype=float)
    k = np.clip(np.floor(t).astype(int), 0, n - 1)
    return k, t - k


def basis_matrix(d: int, t, n: int, order: int = 0, h: float = 1.0) -> np.ndarray:
    """Dense collocation matrix of the ``n + d`` domain B-splines at ``t``.

    ``t`` are scaled coordinates ``(x - a)/h`` in ``[0, n]``; column ``c``
    is the function of global index ``c - d``.  Derivatives include the
    ``h**-order`` chain-rule factor.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k, u = locate(t, n)
    vals = local_basis(d, u, order) / h**order
    B = np.zeros((len(t), n + d))
    rows = np.arange(len(t))
    for r in range(d + 1):
        B[rows, k + r] = vals[:, r]
    return B
