"""Univariate Hermite BS quasi-interpolation on a uniform partition.

Given ``f`` and ``f'`` at the abscissae ``x_i = a + i h``, ``i = -d+1, ...,
N+d-1``, the quasi-interpolant is ``Q(f) = sum_j lambda_j(f) B_d((x-a)/h - j)``
over ``j = -d, ..., N-1`` with

    lambda_j(f) = sum_r alpha_r f(x_{j+r}) - h sum_r beta_r f'(x_{j+r}),  r = 1..d.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bspline import basis_matrix


class UnsupportedDegreeError(ValueError):
    pass


class MalformedSamplesError(ValueError):
    pass


class OutOfDomainError(ValueError):
    pass


_TABLE = {
    2: ((Fraction(1, 2), Fraction(1, 2)), (Fraction(-1, 4), Fraction(1, 4))),
    3: (
        (Fraction(-1, 2), Fraction(2), Fraction(-1, 2)),
        (Fraction(1, 6), Fraction(0), Fraction(-1, 6)),
    ),
    4: (
        (Fraction(5, 12), Fraction(1, 12), Fraction(1, 12), Fraction(5, 12)),
        (Fraction(-5, 48), Fraction(-41, 48), Fraction(41, 48), Fraction(5, 48)),
    ),
}

SUPPORTED_DEGREES = tuple(sorted(_TABLE))


@dataclass(frozen=True)
class QiCoefficients:
    degree: int
    alpha_exact: tuple
    beta_exact: tuple

    @property
    def alpha(self) -> np.ndarray:
        return np.array([float(v) for v in self.alpha_exact])

    @property
    def beta(self) -> np.ndarray:
        return np.array([float(v) for v in self.beta_exact])

    @property
    def alpha_norm1(self) -> float:
        return float(sum(abs(v) for v in self.alpha_exact))

    @property
    def beta_norm1(self) -> float:
        return float(sum(abs(v) for v in self.beta_exact))


def qi_coefficients(d: int) -> QiCoefficients:
    """Exact ``alpha``/``beta`` vectors for degrees 2, 3 and 4."""
    if d not in _TABLE:
        raise UnsupportedDegreeError(
            f"degree {d} not supported; available: {SUPPORTED_DEGREES}"
        )
    alpha, beta = _TABLE[d]
    return QiCoefficients(d, alpha, beta)


@dataclass
class UnivariateHermiteSamples:
    """``f`` and ``f'`` at ``x_i = a + i h`` for ``i = -d+1, ..., N+d-1``."""

    degree: int
    h: float
    values: np.ndarray
    derivs: np.ndarray
    a: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.derivs = np.asarray(self.derivs, dtype=float)
        if self.values.shape != self.derivs.shape or self.values.ndim != 1:
            raise MalformedSamplesError(
                f"value/derivative arrays differ: {self.values.shape} vs {self.derivs.shape}"
            )
        if len(self.values) < 2 * self.degree:
            raise MalformedSamplesError(
                f"need at least {2 * self.degree} samples for degree {self.degree}"
            )

    @property
    def n_cells(self) -> int:
        return len(self.values) - 2 * self.degree + 1

    @classmethod
    def from_function(cls, f, df, d, a, b, n):
        h = (b - a) / n
        x = a + np.arange(-d + 1, n + d) * h
        return cls(d, h, f(x), df(x), a)


def univariate_functionals(samples: UnivariateHermiteSamples) -> np.ndarray:
    """``lambda_j`` for ``j = -d, ..., N-1`` as a length ``N + d`` array."""
    d = samples.degree
    co = qi_coefficients(d)
    win_f = np.lib.stride_tricks.sliding_window_view(samples.values, d)
    win_df = np.lib.stride_tricks.sliding_window_view(samples.derivs, d)
    return win_f @ co.alpha - samples.h * (win_df @ co.beta)


def univariate_qi_eval(lam, d: int, h: float, domain, x, deriv_order: int = 0):
    """Evaluate ``sum_j lam[j+d] B_d^{(deriv_order)}((x-a)/h - j)``."""
    a, b = domain
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * (b - a)
    if np.any((x < a - tol) | (x > b + tol)):
        raise OutOfDomainError(f"points outside [{a}, {b}]")
    n = int(round((b - a) / h))
    B = basis_matrix(d, (np.atleast_1d(x) - a) / h, n, deriv_order, h)
    out = B @ np.asarray(lam, dtype=float)
    return float(out[0]) if x.ndim == 0 else out
