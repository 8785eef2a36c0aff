import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermite_qi.bspline import (
    InvalidDegreeError,
    InvalidOrderError,
    UniformGrid,
    basis_matrix,
    bspline_deriv,
    bspline_eval,
    local_basis,
    refine_coeffs_1d,
    refine_matrix,
    subdivision_coeffs,
)
from oracles import b2_unrolled, b3_unrolled, cox_de_boor


@pytest.mark.parametrize("d, x, want", [(1, 1.0, 1.0), (2, 1.5, 0.75), (3, -0.1, 0.0)])
def test_eval_examples(d, x, want):
    assert bspline_eval(d, x) == pytest.approx(want, abs=1e-15)


def test_eval_matches_unrolled_pieces():
    xs = np.linspace(-1, 5, 601)
    assert np.allclose(bspline_eval(2, xs), [b2_unrolled(x) for x in xs], atol=1e-14)
    assert np.allclose(bspline_eval(3, xs), [b3_unrolled(x) for x in xs], atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_eval_matches_general_knot_recursion(d):
    knots = list(range(d + 2))
    xs = np.linspace(-0.5, d + 1.5, 97)
    assert np.allclose(bspline_eval(d, xs), [cox_de_boor(knots, 0, d, x) for x in xs], atol=1e-14)


def test_zero_outside_support():
    for d in (2, 3, 4):
        assert bspline_eval(d, d + 1.0) == 0.0
        assert bspline_eval(d, -1e-9) == 0.0


@pytest.mark.parametrize("bad", [0, -1, 2.5])
def test_invalid_degree(bad):
    with pytest.raises(InvalidDegreeError):
        bspline_eval(bad, 0.5)


def test_deriv_examples():
    assert bspline_deriv(2, 1.5, 1) == pytest.approx(0.0, abs=1e-15)
    xs = np.linspace(-1, 5, 50)
    assert np.array_equal(bspline_deriv(3, xs, 0), bspline_eval(3, xs))
    h = 1e-5
    fd = (bspline_eval(2, 0.5 + h) - bspline_eval(2, 0.5 - h)) / (2 * h)
    assert bspline_deriv(2, 0.5, 1) == pytest.approx(fd, abs=1e-6)


def test_deriv_order_too_high():
    with pytest.raises(InvalidOrderError):
        bspline_deriv(2, 0.5, 3)


@given(st.sampled_from([2, 3, 4]), st.floats(0.01, 4.9))
def test_deriv_central_difference(d, x):
    h = 1e-5
    # stay away from knots where B_2' has kinks
    if min(abs(x - k) for k in range(d + 2)) < 1e-3:
        return
    fd = (bspline_eval(d, x + h) - bspline_eval(d, x - h)) / (2 * h)
    assert bspline_deriv(d, x, 1) == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize(
    "d, want", [(1, [0.5, 1, 0.5]), (2, [0.25, 0.75, 0.75, 0.25]), (3, [1 / 8, 1 / 2, 3 / 4, 1 / 2, 1 / 8])]
)
def test_subdivision_coeffs(d, want):
    c = subdivision_coeffs(d)
    assert np.array_equal(c, want)
    assert c.sum() == 2
    xs = np.linspace(-0.5, d + 1.5, 301)
    two_scale = sum(ck * bspline_eval(d, 2 * xs - k) for k, ck in enumerate(c))
    assert np.max(np.abs(two_scale - bspline_eval(d, xs))) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_partition_of_unity(d, rng):
    x = rng.uniform(0, 20, 1000)
    s = sum(bspline_eval(d, x - j) for j in range(-d - 1, 22))
    assert np.max(np.abs(s - 1)) < 1e-12


def _eval_coeffs(d, c, x, scale, offset):
    return sum(ck * bspline_eval(d, scale * x - (k + offset)) for k, ck in enumerate(c))


def test_refine_single_unit_d2():
    out = refine_coeffs_1d(2, [1.0])
    assert np.array_equal(out, [0.25, 0.75, 0.75, 0.25])
    x = np.linspace(-1, 4, 201)
    assert np.max(np.abs(_eval_coeffs(2, out, x, 2, 0) - bspline_eval(2, x))) < 1e-12


def test_refine_ones_and_greville():
    d, n = 3, 6
    ones = refine_coeffs_1d(d, np.ones(n + d))[d:-d]
    assert np.allclose(ones, 1.0)
    # coefficient of B_d(t - j) for f(t) = t is the Greville abscissa j + (d+1)/2
    g = np.arange(-d, n) + (d + 1) / 2
    fine = refine_matrix(d, n) @ g
    assert np.allclose(fine, (np.arange(-d, 2 * n) + (d + 1) / 2) / 2)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_refinement_exactness(d, rng):
    n = 8
    c = rng.uniform(-1, 1, n + d)
    fine = refine_matrix(d, n) @ c
    t = rng.uniform(0, n, 500)
    coarse_vals = basis_matrix(d, t, n) @ c
    fine_vals = basis_matrix(d, 2 * t, 2 * n) @ fine
    assert np.max(np.abs(coarse_vals - fine_vals)) < 1e-12
    # the vector form agrees with the matrix restricted to the domain basis
    assert np.allclose(refine_coeffs_1d(d, c)[d:-d], fine)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("order", [0, 1, 2])
def test_local_basis_matches_kernel(d, order):
    u = np.linspace(0, 0.999, 17)
    V = local_basis(d, u, order)
    for r in range(d + 1):
        assert np.allclose(V[:, r], bspline_deriv(d, u + d - r, order), atol=1e-13)


def test_basis_matrix_closed_right_edge():
    B = basis_matrix(2, [0.0, 4.0], 4)
    assert np.allclose(B.sum(axis=1), 1.0)
    assert B[1, -1] == pytest.approx(0.5)


def test_uniform_grid():
    g = UniformGrid()
    assert g.n == (8, 8) and g.h == (0.25, 0.25)
    assert g.refined(2).n == (32, 32)
    assert g.xs(4) == 0.0
    with pytest.raises(ValueError):
        UniformGrid(domain=(0, 0, 0, 1))
