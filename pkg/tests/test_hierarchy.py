import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermite_qi.bspline import UniformGrid
from hermite_qi.hierarchy import (
    HierarchicalBasis,
    HierarchicalMesh,
    InvalidIndexError,
    MeshError,
    ThbBasis,
    active_indices,
    admissibility_class,
    build_thb,
    local_active_set,
    support_inside,
    uniform_mesh,
)
from conftest import DEGREE_PAIRS, random_mesh
from oracles import brute_active_sets


def test_left_half_cells(left_half_mesh):
    m = left_half_mesh
    assert m.depth == 2
    assert len(m.active_cells(0)) == 32 and len(m.active_cells(1)) == 128
    assert all(i >= 4 for _, i, _ in m.active_cells(0))


@pytest.mark.parametrize("d, dim", [(2, 204), (3, 229), (4, 256)])
def test_left_half_dims(left_half_mesh, d, dim):
    assert HierarchicalBasis(left_half_mesh, (d, d)).dim == dim


@pytest.mark.parametrize("degrees", DEGREE_PAIRS + [(2, 4)])
def test_active_sets_match_definition(degrees, rng):
    for _ in range(4):
        mesh = random_mesh(rng, levels=3)
        got = [set(a) for a in active_indices(mesh, degrees)]
        assert got == brute_active_sets(mesh, degrees)


def test_uniform_mesh_dims():
    m = uniform_mesh(3)
    hb = HierarchicalBasis(m, (3, 3))
    # only the finest level survives on a fully refined mesh
    assert hb.dim == (32 + 3) ** 2
    assert [len(a) for a in active_indices(m, (3, 3))] == [0, 0, 35 * 35]


def test_support_inside_box():
    mask = np.zeros((8, 8), dtype=bool)
    mask[2:6, 2:6] = True
    s = support_inside(mask, (2, 2))
    # supports of 3x3 cells fit only in a 4x4 box at 2 x 2 positions
    assert s[2 + 2 : 4 + 2, 2 + 2 : 4 + 2].all()
    assert s.sum() - s[:2].sum() - s[-2:].sum() <= 4 + 2 * 10 * 2


@pytest.mark.parametrize("degrees", DEGREE_PAIRS)
def test_thb_matches_finest_expansion(degrees, rng):
    mesh = random_mesh(rng, levels=3)
    thb = ThbBasis(mesh, degrees)
    hb = thb.hb
    fine = mesh.grid(mesh.depth - 1)
    from hermite_qi.tensor_qi import TensorSpline, coeff_shape

    x, y = rng.uniform(-1, 1, 200), rng.uniform(-1, 1, 200)
    evals = [thb.eval_at(px, py) for px, py in zip(x, y)]
    keys = list(thb.functions)
    for k in rng.choice(len(keys), size=min(15, len(keys)), replace=False):
        l, J = keys[k]
        level_coeffs = [np.zeros(coeff_shape(mesh.grid(q), degrees)) for q in range(mesh.depth)]
        level_coeffs[l][J[0] + degrees[1], J[1] + degrees[0]] = 1.0
        want = TensorSpline(hb.to_finest(level_coeffs), degrees, fine)(x, y)
        got = np.array([e.get((l, J), 0.0) for e in evals])
        assert np.max(np.abs(got - want)) < 1e-12
        # and build_thb is a pure function of (level, J)
        T = build_thb(hb, l, J)
        assert T.maps.keys() == thb.functions[(l, J)].maps.keys()


@pytest.mark.parametrize("degrees", DEGREE_PAIRS)
def test_partition_of_unity(degrees, rng):
    for _ in range(3):
        mesh = random_mesh(rng, levels=3)
        thb = ThbBasis(mesh, degrees)
        hb = thb.hb
        ones = [np.where(a, 1.0, 0.0) for a in hb.active]
        from hermite_qi.tensor_qi import TensorSpline

        S = TensorSpline(hb.to_finest(ones), degrees, mesh.grid(mesh.depth - 1))
        x, y = rng.uniform(-1, 1, 300), rng.uniform(-1, 1, 300)
        assert np.max(np.abs(S(x, y) - 1)) < 1e-12
        pts = list(zip(x[:40], y[:40])) + [(1.0, 1.0), (-1.0, -1.0), (0.0, 0.0)]
        for px, py in pts:
            vals = thb.eval_at(px, py)
            assert sum(vals.values()) == pytest.approx(1.0, abs=1e-12)
            assert min(vals.values()) >= -1e-14


def test_truncation_drops_fine_terms(left_half_mesh):
    thb = ThbBasis(left_half_mesh, (2, 2))
    # a level-0 function straddling the interface loses level-1 terms inside Omega^1
    T = thb.functions[(0, (3, 2))]
    r0, c0, block = T.maps[1]
    inside = thb.hb.inside[1][r0 : r0 + block.shape[0], c0 : c0 + block.shape[1]]
    assert np.all(block[inside] == 0) and block.sum() > 0


def test_invalid_thb_index(left_half_mesh):
    hb = HierarchicalBasis(left_half_mesh, (2, 2))
    with pytest.raises(InvalidIndexError):
        build_thb(hb, 0, (0, 0))


def test_admissibility():
    assert admissibility_class(uniform_mesh(1), (2, 2)) == 1
    assert admissibility_class(uniform_mesh(3), (3, 3)) == 1
    island = HierarchicalMesh().split([(0, 3, 3)])
    assert admissibility_class(island, (2, 2)) == 2
    deeper = island.split([(1, 6, 6)])
    assert admissibility_class(deeper, (2, 2)) == 3


@given(st.integers(0, 2**32 - 1), st.sampled_from(DEGREE_PAIRS))
def test_admissibility_range(seed, degrees):
    mesh = random_mesh(np.random.default_rng(seed), levels=3)
    assert 1 <= admissibility_class(mesh, degrees) <= mesh.depth


def test_local_active_set_interior():
    mesh = uniform_mesh(1)
    assert sum(len(v) for v in local_active_set(mesh, (2, 2), (0, 3, 3)).values()) == 9


@pytest.mark.parametrize("degrees", DEGREE_PAIRS)
def test_local_active_set_bounds(degrees, rng):
    d1, d2 = degrees
    for _ in range(3):
        mesh = random_mesh(rng, levels=3)
        thb = ThbBasis(mesh, degrees)
        m = thb.admissibility_class()
        assert thb.hb.dim == len(thb)
        assert thb.hb.dim <= (mesh.grid(mesh.depth - 1).n[0] + d1) * (mesh.grid(mesh.depth - 1).n[1] + d2)
        for cell in mesh.cells():
            sets = thb.local_active_set(cell)
            assert sum(len(v) for v in sets.values()) <= m * (d1 + 1) * (d2 + 1)
            k_m = max(0, cell[0] - m + 1)
            assert all(l >= k_m for l in sets)
            # brute force: a function is listed iff it is non-zero somewhere on the cell
            (x0, x1), (y0, y1) = mesh.cell_bounds(cell)
            t = np.array([0.1, 0.7])
            listed = {(l, J) for l, Js in sets.items() for J in Js}
            for px in x0 + t * (x1 - x0):
                for py in y0 + t * (y1 - y0):
                    vals = thb.eval_at(px, py)
                    assert set(k for k, v in vals.items() if abs(v) > 1e-14) <= listed


def test_locate_and_split(left_half_mesh):
    m = left_half_mesh
    assert m.locate(-0.9, 0.1)[0] == 1
    assert m.locate(0.9, 0.1)[0] == 0
    # half-open cells: the interface belongs to the cell on its right
    assert m.locate(0.0, 0.1) == (0, 4, 4)
    assert m.locate(1.0, 1.0) == (0, 7, 7)
    m2 = m.split([(1, 0, 0)])
    assert m2.depth == 3 and len(m2.active_cells(2)) == 4
    assert m2.active_owner((2, 9, 0)) == (1, 4, 0)
    assert m2.active_owner((1, 9, 0)) == (0, 4, 0)
    with pytest.raises(MeshError):
        m.split([(0, 0, 0)])


def test_text_round_trip(rng):
    for _ in range(5):
        mesh = random_mesh(rng, levels=4)
        assert HierarchicalMesh.from_text(mesh.to_text()) == mesh


@pytest.mark.parametrize(
    "text, match",
    [
        ("base 8 8\n", "domain"),
        ("domain -1 1 -1 1\nbase 8 8\nlevel x\n", "line 3"),
        ("domain -1 1 -1 1\nbase 8 8\nfoo 1\n", "unknown"),
        ("domain -1 1 -1 1\nbase 8 8\nlevel 2 0,0\n", "not contained"),
    ],
)
def test_text_errors(text, match):
    with pytest.raises(MeshError, match=match):
        HierarchicalMesh.from_text(text)


def test_bad_refined_shape():
    with pytest.raises(MeshError, match="shape"):
        HierarchicalMesh(UniformGrid(), [np.ones((4, 4), dtype=bool)])
