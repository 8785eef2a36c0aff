"""Closed-form test functions with arbitrary-order partial derivatives.

New functions can be registered in :data:`FUNCTIONS`; each needs a callable
``derivative(r, s) -> g(x, y)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import hermite as H
from numpy.polynomial import polynomial as P


@dataclass
class TestFunction:
    __test__ = False  # keep pytest from collecting this

    name: str
    partial: Callable  # (r, s) -> callable(x, y)
    domain: tuple = (-1.0, 1.0, -1.0, 1.0)
    _cache: dict = field(default_factory=dict, repr=False)

    def derivative(self, r: int = 0, s: int = 0):
        key = (r, s)
        if key not in self._cache:
            self._cache[key] = self.partial(r, s)
        return self._cache[key]

    def __call__(self, x, y):
        return self.derivative(0, 0)(x, y)

    def f(self, x, y):
        return self.derivative(0, 0)(x, y)

    def fx(self, x, y):
        return self.derivative(1, 0)(x, y)

    def fy(self, x, y):
        return self.derivative(0, 1)(x, y)

    def fxy(self, x, y):
        return self.derivative(1, 1)(x, y)

    def hermite(self, x, y):
        return self.f(x, y), self.fx(x, y), self.fy(x, y), self.fxy(x, y)


def _tanh_derivative_poly(n):
    # d^n/dz^n tanh(z) = p_n(tanh z), p_{k+1}(t) = p_k'(t) (1 - t^2)
    p = np.array([0.0, 1.0])
    for _ in range(n):
        p = P.polymul(P.polyder(p), [1.0, 0.0, -1.0])
    return p


def _f1_partial(r, s):
    # f1 = (tanh(9(y - x)) + 1) / 9
    n = r + s
    poly = _tanh_derivative_poly(n)
    scale = (-1.0) ** r * 9.0**n / 9.0
    shift = 1.0 / 9.0 if n == 0 else 0.0

    def g(x, y):
        t = np.tanh(9.0 * (np.asarray(y) - np.asarray(x)))
        return scale * P.polyval(t, poly) + shift

    return g


def _gauss_deriv(n, u, k):
    # d^n/dx^n exp(-u^2) with u = k x + c is (-k)^n H_n(u) exp(-u^2)
    c = np.zeros(n + 1)
    c[n] = 1.0
    return (-k) ** n * H.hermval(u, c) * np.exp(-(u**2))


def _f2_partial(r, s):
    # f2 = (2/3) exp(-(10x - 3)^2 - (10y + 4)^2)
    def g(x, y):
        u = 10.0 * np.asarray(x) - 3.0
        v = 10.0 * np.asarray(y) + 4.0
        return (2.0 / 3.0) * _gauss_deriv(r, u, 10.0) * _gauss_deriv(s, v, 10.0)

    return g


def polynomial_function(coeffs, name="poly", domain=(-1.0, 1.0, -1.0, 1.0)):
    """``p(x, y) = sum_{a,b} coeffs[a, b] x^a y^b`` as a :class:`TestFunction`."""
    coeffs = np.asarray(coeffs, dtype=float)

    def partial(r, s):
        c = coeffs
        for _ in range(r):
            c = P.polyder(c, axis=0) if c.shape[0] > 1 else np.zeros((1, c.shape[1]))
        for _ in range(s):
            c = P.polyder(c, axis=1) if c.shape[1] > 1 else np.zeros((c.shape[0], 1))
        return lambda x, y: P.polyval2d(np.asarray(x, float), np.asarray(y, float), c)

    return TestFunction(name, partial, domain)


def plane_wave(kx: float = 2.0, ky: float = 1.0, name="wave"):
    """``cos(kx x + ky y)``: smooth, with every derivative bounded by a power of ``k``."""

    def partial(r, s):
        c = (1j * kx) ** r * (1j * ky) ** s
        return lambda x, y: np.real(c * np.exp(1j * (kx * np.asarray(x, float) + ky * np.asarray(y, float))))

    return TestFunction(name, partial)


f1 = TestFunction("f1", _f1_partial)
f2 = TestFunction("f2", _f2_partial)

FUNCTIONS = {"f1": f1, "f2": f2}
