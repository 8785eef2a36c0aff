"""Hierarchical meshes, hierarchical B-splines and their truncated basis.

Cells are addressed as ``(level, i, j)`` with ``i`` the x index and ``j`` the
y index; the dyadic children of ``(l, i, j)`` are ``(l+1, 2i+a, 2j+b)``.
Masks over cells of level ``l`` are boolean arrays of shape ``(ny_l, nx_l)``
indexed ``[j, i]``.  Coefficient arrays follow the layout of
:mod:`hermite_qi.tensor_qi`.

The nested domains are stored as ``refined[l]``, the mask of level-``l``
cells that make up ``Omega^{l+1}``.  Every support-inclusion test therefore
reduces to integer box containment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bspline import UniformGrid, local_basis, locate, refine_matrix
from .tensor_qi import coeff_shape

_window = np.lib.stride_tricks.sliding_window_view


class MeshError(ValueError):
    pass


class InvalidIndexError(KeyError):
    pass


def _upsample(mask, times=1):
    for _ in range(times):
        mask = np.repeat(np.repeat(mask, 2, axis=0), 2, axis=1)
    return mask


def _coarsen_any(mask):
    n2, n1 = mask.shape
    return mask.reshape(n2 // 2, 2, n1 // 2, 2).any(axis=(1, 3))


@dataclass
class HierarchicalMesh:
    base: UniformGrid = field(default_factory=UniformGrid)
    refined: list = field(default_factory=list)

    def __post_init__(self):
        self.refined = [np.asarray(r, dtype=bool).copy() for r in self.refined]
        while self.refined and not self.refined[-1].any():
            self.refined.pop()
        for l, r in enumerate(self.refined):
            expected = self.grid(l).n[::-1]
            if r.shape != expected:
                raise MeshError(f"refined[{l}] has shape {r.shape}, expected {expected}")
            if l > 0 and not np.all(self.omega(l)[r]):
                raise MeshError(f"Omega^{l + 1} is not contained in Omega^{l}")

    @property
    def depth(self) -> int:
        return len(self.refined) + 1

    def grid(self, level: int) -> UniformGrid:
        return UniformGrid(self.base.domain, self.base.n_base, self.base.level + level)

    def omega(self, level: int, at: int | None = None) -> np.ndarray:
        """Mask of ``Omega^level`` at the resolution of level ``at``."""
        at = level if at is None else at
        if level == 0:
            return np.ones(self.grid(at).n[::-1], dtype=bool)
        if level >= self.depth:
            return np.zeros(self.grid(at).n[::-1], dtype=bool)
        if at < level - 1:
            raise ValueError("Omega^l is only resolved on levels >= l-1")
        return _upsample(self.refined[level - 1], at - level + 1)

    def active_mask(self, level: int) -> np.ndarray:
        mask = self.omega(level)
        if level < self.depth - 1:
            mask = mask & ~self.refined[level]
        return mask

    def active_cells(self, level: int) -> list:
        jj, ii = np.nonzero(self.active_mask(level))
        return [(level, int(i), int(j)) for i, j in zip(ii, jj)]

    def cells(self) -> list:
        return [c for l in range(self.depth) for c in self.active_cells(l)]

    def cell_bounds(self, cell):
        l, i, j = cell
        g = self.grid(l)
        return (float(g.xs(i)), float(g.xs(i + 1))), (float(g.ys(j)), float(g.ys(j + 1)))

    def is_active(self, cell) -> bool:
        l, i, j = cell
        if l < 0 or l >= self.depth:
            return False
        n1, n2 = self.grid(l).n
        if not (0 <= i < n1 and 0 <= j < n2):
            return False
        return bool(self.active_mask(l)[j, i])

    def active_owner(self, cell):
        """The active cell equal to or containing ``cell``; ``None`` if finer."""
        l, i, j = cell
        for q in range(l, -1, -1):
            s = l - q
            c = (q, i >> s, j >> s)
            if self.is_active(c):
                return c
        return None

    def locate(self, x, y):
        """Active cell containing ``(x, y)``; cells are half-open except at the right/top boundary."""
        for l in range(self.depth - 1, -1, -1):
            g = self.grid(l)
            (ox, oy), (hx, hy) = g.origin, g.h
            i, _ = locate((x - ox) / hx, g.n[0])
            j, _ = locate((y - oy) / hy, g.n[1])
            if self.active_mask(l)[int(j), int(i)]:
                return (l, int(i), int(j))
        raise MeshError(f"no active cell contains ({x}, {y})")

    def split(self, cells) -> "HierarchicalMesh":
        """New mesh where each listed active cell is replaced by its 4 children."""
        refined = [r.copy() for r in self.refined]
        for l, i, j in cells:
            if not self.is_active((l, i, j)):
                raise MeshError(f"cell {(l, i, j)} is not active")
            while len(refined) <= l:
                refined.append(np.zeros(self.grid(len(refined)).n[::-1], dtype=bool))
            refined[l][j, i] = True
        return HierarchicalMesh(self.base, refined)

    def __eq__(self, other):
        if not isinstance(other, HierarchicalMesh):
            return NotImplemented
        return (
            self.base == other.base
            and len(self.refined) == len(other.refined)
            and all(np.array_equal(a, b) for a, b in zip(self.refined, other.refined))
        )

    # serialization -------------------------------------------------------

    def to_text(self) -> str:
        a1, b1, a2, b2 = self.base.domain
        lines = [
            "# hierarchical mesh: 'level L' lists level-(L-1) cells i,j forming Omega^L",
            f"domain {a1!r} {b1!r} {a2!r} {b2!r}",
            f"base {self.base.n[0]} {self.base.n[1]}",
        ]
        for l, r in enumerate(self.refined):
            jj, ii = np.nonzero(r)
            pairs = " ".join(f"{i},{j}" for i, j in sorted(zip(ii.tolist(), jj.tolist())))
            lines.append(f"level {l + 1} {pairs}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HierarchicalMesh":
        domain, base, levels = None, None, {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *rest = line.split()
            try:
                if key == "domain":
                    domain = tuple(float(v) for v in rest)
                elif key == "base":
                    base = (int(rest[0]), int(rest[1]))
                elif key == "level":
                    levels[int(rest[0])] = [tuple(int(v) for v in p.split(",")) for p in rest[1:]]
                else:
                    raise MeshError(f"unknown record {key!r}")
            except MeshError:
                raise
            except (ValueError, IndexError) as exc:
                raise MeshError(f"line {lineno}: cannot parse {raw!r}") from exc
        if domain is None or base is None:
            raise MeshError("mesh text needs 'domain' and 'base' records")
        grid = UniformGrid(domain, base)
        refined = []
        for l in range(1, max(levels, default=0) + 1):
            r = np.zeros(grid.refined(l - 1).n[::-1], dtype=bool)
            for i, j in levels.get(l, []):
                r[j, i] = True
            refined.append(r)
        return cls(grid, refined)


def uniform_mesh(levels: int = 1, base: UniformGrid | None = None) -> HierarchicalMesh:
    """Mesh whose every level covers the whole domain."""
    base = base or UniformGrid()
    refined = [np.ones(base.refined(l).n[::-1], dtype=bool) for l in range(levels - 1)]
    return HierarchicalMesh(base, refined)


def support_inside(mask: np.ndarray, degrees) -> np.ndarray:
    """For every coefficient of the level, whether its (clipped) support lies in ``mask``."""
    d1, d2 = degrees
    padded = np.pad(mask, ((d2, d2), (d1, d1)), constant_values=True)
    return _window(padded, (d2 + 1, d1 + 1)).all(axis=(2, 3))


class HierarchicalBasis:
    """Active index sets ``A^l`` and truncation masks for one mesh/degree pair."""

    def __init__(self, mesh: HierarchicalMesh, degrees):
        self.mesh = mesh
        self.degrees = tuple(degrees)
        M = mesh.depth
        # inside[l]: level-l coefficients whose support lies in Omega^l
        self.inside = [support_inside(mesh.omega(l), self.degrees) for l in range(M)]
        # inside_next[l]: level-l coefficients whose support lies in Omega^{l+1}
        self.inside_next = [
            support_inside(mesh.omega(l + 1, at=l), self.degrees) for l in range(M)
        ]
        self.active = [self.inside[l] & ~self.inside_next[l] for l in range(M)]
        self._refine = {}

    @property
    def dim(self) -> int:
        return int(sum(a.sum() for a in self.active))

    def active_indices(self, level: int) -> list:
        d1, d2 = self.degrees
        pp, qq = np.nonzero(self.active[level])
        return [(int(p - d2), int(q - d1)) for p, q in zip(pp, qq)]

    def is_active(self, level, J) -> bool:
        d1, d2 = self.degrees
        p, q = J[0] + d2, J[1] + d1
        a = self.active[level]
        return 0 <= p < a.shape[0] and 0 <= q < a.shape[1] and bool(a[p, q])

    def refine_matrices(self, level: int):
        """Two-scale matrices (rows, cols) from level to level + 1."""
        if level not in self._refine:
            d1, d2 = self.degrees
            n1, n2 = self.mesh.grid(level).n
            self._refine[level] = (refine_matrix(d2, n2), refine_matrix(d1, n1))
        return self._refine[level]

    def truncate(self, level: int, coeffs: np.ndarray) -> np.ndarray:
        """``trunc^{level+1}``: drop level+1 terms whose support lies in ``Omega^{level+1}``."""
        out = np.array(coeffs, dtype=float, copy=True)
        out[self.inside[level + 1]] = 0.0
        return out

    def to_finest(self, level_coeffs) -> np.ndarray:
        """Finest-level B-spline coefficients of ``sum_l sum_J c_J^l T_J^l``."""
        c = np.asarray(level_coeffs[0], dtype=float)
        for l in range(self.mesh.depth - 1):
            Rr, Rc = self.refine_matrices(l)
            c = self.truncate(l, Rr @ c @ Rc.T) + level_coeffs[l + 1]
        return c


def active_cells(mesh: HierarchicalMesh, level: int) -> list:
    return mesh.active_cells(level)


def active_indices(mesh: HierarchicalMesh, degrees) -> list:
    """Per level, the list of active multi-indices ``J = (j, i)``."""
    basis = HierarchicalBasis(mesh, degrees)
    return [basis.active_indices(l) for l in range(mesh.depth)]


def truncate(mesh: HierarchicalMesh, level: int, coeffs, degrees) -> np.ndarray:
    return HierarchicalBasis(mesh, degrees).truncate(level, coeffs)


@dataclass
class ThbFunction:
    """One truncated basis function with its surviving terms on every level.

    ``maps[q] = (row0, col0, block)``: ``block`` holds level-``q``
    coefficients starting at array position ``(row0, col0)``.
    """

    level: int
    J: tuple
    degrees: tuple
    maps: dict

    def coefficients(self, q: int, shape) -> np.ndarray:
        r0, c0, block = self.maps[q]
        out = np.zeros(shape)
        out[r0 : r0 + block.shape[0], c0 : c0 + block.shape[1]] = block
        return out

    def value_on_cell(self, cell, ux, uy, deriv=(0, 0), h=(1.0, 1.0)):
        """Value at local coordinates of an active cell of level ``>= self.level``."""
        d1, d2 = self.degrees
        Vx = local_basis(d1, ux, deriv[0]) / h[0] ** deriv[0]
        Vy = local_basis(d2, uy, deriv[1]) / h[1] ** deriv[1]
        return self.value_from_basis(cell, Vx, Vy)

    def value_from_basis(self, cell, Vx, Vy):
        """As :meth:`value_on_cell` with the local B-spline values precomputed."""
        k, i, j = cell
        if k < self.level:
            return np.zeros(Vx.shape[0])
        d1, d2 = self.degrees
        r0, c0, block = self.maps[k]
        rs, cs = j - r0, i - c0
        sub = np.zeros((d2 + 1, d1 + 1))
        lo_r, hi_r = max(rs, 0), min(rs + d2 + 1, block.shape[0])
        lo_c, hi_c = max(cs, 0), min(cs + d1 + 1, block.shape[1])
        if lo_r < hi_r and lo_c < hi_c:
            sub[lo_r - rs : hi_r - rs, lo_c - cs : hi_c - cs] = block[lo_r:hi_r, lo_c:hi_c]
        return np.einsum("nb,ba,na->n", Vy, sub, Vx)

    def support_cells(self, q: int) -> np.ndarray:
        """Mask (over level-``q`` cells) where the level-``q`` terms are non-zero."""
        d1, d2 = self.degrees
        r0, c0, block = self.maps[q]
        nz = block > 0
        pad = np.pad(nz, ((d2, d2), (d1, d1)))
        win = _window(pad, (d2 + 1, d1 + 1)).any(axis=(2, 3))
        # win[a, b] covers coefficient rows a-d2..a -> cell row a-d2+r0
        return win, r0 - d2, c0 - d1


def build_thb(basis: HierarchicalBasis, level: int, J) -> ThbFunction:
    """Successive refine/truncate passes of ``B_J^level`` up to the finest level."""
    if not basis.is_active(level, J):
        raise InvalidIndexError(f"J={J} is not active on level {level}")
    d1, d2 = basis.degrees
    mesh = basis.mesh
    r0, c0 = J[0] + d2, J[1] + d1
    block = np.ones((1, 1))
    maps = {level: (r0, c0, block)}
    for q in range(level, mesh.depth - 1):
        Rr, Rc = basis.refine_matrices(q)
        rows = slice(r0, r0 + block.shape[0])
        cols = slice(c0, c0 + block.shape[1])
        fine_r = Rr[:, rows]
        fine_c = Rc[:, cols]
        nzr = np.nonzero(fine_r.any(axis=1))[0]
        nzc = np.nonzero(fine_c.any(axis=1))[0]
        r0, c0 = int(nzr[0]), int(nzc[0])
        fr = fine_r[r0 : nzr[-1] + 1]
        fc = fine_c[c0 : nzc[-1] + 1]
        block = fr @ block @ fc.T
        inside = basis.inside[q + 1][r0 : r0 + block.shape[0], c0 : c0 + block.shape[1]]
        block = np.where(inside, 0.0, block)
        maps[q + 1] = (r0, c0, block)
    return ThbFunction(level, tuple(J), basis.degrees, maps)


class ThbBasis:
    """All truncated basis functions of a mesh plus a cell -> functions index."""

    def __init__(self, mesh: HierarchicalMesh, degrees):
        self.hb = HierarchicalBasis(mesh, degrees)
        self.mesh = mesh
        self.degrees = tuple(degrees)
        self.functions = {
            (l, J): build_thb(self.hb, l, J)
            for l in range(mesh.depth)
            for J in self.hb.active_indices(l)
        }
        self._by_cell = None

    def __len__(self):
        return len(self.functions)

    def cell_index(self) -> dict:
        """Active cell -> keys of the functions that do not vanish on it."""
        if self._by_cell is None:
            by_cell = {}
            for key, T in self.functions.items():
                for q in range(T.level, self.mesh.depth):
                    win, row0, col0 = T.support_cells(q)
                    act = self.mesh.active_mask(q)
                    jj, ii = np.nonzero(win)
                    jj, ii = jj + row0, ii + col0
                    ok = (jj >= 0) & (ii >= 0) & (jj < act.shape[0]) & (ii < act.shape[1])
                    jj, ii = jj[ok], ii[ok]
                    ok = act[jj, ii]
                    for i, j in zip(ii[ok].tolist(), jj[ok].tolist()):
                        by_cell.setdefault((q, i, j), []).append(key)
            self._by_cell = by_cell
        return self._by_cell

    def local_active_set(self, cell) -> dict:
        """``A^l(c)`` for every level ``l`` (empty levels omitted)."""
        out = {}
        for l, J in self.cell_index().get(tuple(cell), []):
            out.setdefault(l, []).append(J)
        return out

    def eval_at(self, x, y, deriv=(0, 0)) -> dict:
        """Values of every THB function that does not vanish on the cell of ``(x, y)``."""
        cell = self.mesh.locate(x, y)
        k, i, j = cell
        g = self.mesh.grid(k)
        ux = (x - g.origin[0]) / g.h[0] - i
        uy = (y - g.origin[1]) / g.h[1] - j
        d1, d2 = self.degrees
        Vx = local_basis(d1, [ux], deriv[0]) / g.h[0] ** deriv[0]
        Vy = local_basis(d2, [uy], deriv[1]) / g.h[1] ** deriv[1]
        return {
            key: float(self.functions[key].value_from_basis(cell, Vx, Vy)[0])
            for key in self.cell_index().get(cell, [])
        }

    def admissibility_class(self) -> int:
        m = 1
        for (k, _, _), keys in self.cell_index().items():
            lowest = min(l for l, _ in keys)
            m = max(m, k - lowest + 1)
        return m


def thb_eval(basis: ThbBasis, point, deriv=(0, 0)) -> dict:
    return basis.eval_at(point[0], point[1], deriv)


def admissibility_class(mesh: HierarchicalMesh, degrees) -> int:
    """Smallest ``m`` with every cell of level ``k`` only touched by levels ``>= k-m+1``."""
    return ThbBasis(mesh, degrees).admissibility_class()


def local_active_set(mesh: HierarchicalMesh, degrees, cell) -> dict:
    return ThbBasis(mesh, degrees).local_active_set(cell)
