"""Automatic adaptive refinement driven by a pointwise per-cell error indicator."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bspline import UniformGrid
from .hierarchy import HierarchicalBasis, HierarchicalMesh

log = logging.getLogger(__name__)

_NEIGHBOURS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]


@dataclass
class RefinementConfig:
    max_levels: int = 5
    tolerance: float | None = None  # None: derive from the tensor operator
    tolerance_factor: float = 1.5
    points: tuple | None = None  # (x, y) arrays; None: level K-1 vertices
    membership: str = "owner"  # or "closed"

    def __post_init__(self):
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")
        if self.tolerance is not None and not self.tolerance >= 0:
            raise ValueError("tolerance must be >= 0")
        if self.membership not in ("owner", "closed"):
            raise ValueError(f"membership must be 'owner' or 'closed', got {self.membership!r}")


@dataclass
class IterationRecord:
    iteration: int
    depth: int
    dim: int
    max_delta: float
    cells_split: int
    mesh: HierarchicalMesh = field(repr=False)
    spline: object = field(repr=False)

    def as_row(self) -> dict:
        return {
            "iteration": self.iteration,
            "M": self.depth,
            "dim": self.dim,
            "max_delta": self.max_delta,
            "cells_split": self.cells_split,
        }


@dataclass
class RefinementResult:
    mesh: HierarchicalMesh
    spline: object
    trace: list
    epsilon: float
    stopped_by_tolerance: bool


def vertex_points(base: UniformGrid, level: int):
    """Vertices of the level grid, i.e. the extended lattice restricted to the domain."""
    g = base.refined(level)
    X, Y = np.meshgrid(g.xs(np.arange(g.n[0] + 1)), g.ys(np.arange(g.n[1] + 1)))
    return X.ravel(), Y.ravel()


def _candidates(mesh: HierarchicalMesh, x, y):
    """Yield ``(level, point_idx, i, j)`` for active closed cells containing points.

    Within a level candidates come in lexicographic ``(i, j)`` order; a point
    on an edge is also tried against the cells to its left/below.
    """
    for l in range(mesh.depth):
        g = mesh.grid(l)
        act = mesh.active_mask(l)
        n1, n2 = g.n
        tx = (x - g.origin[0]) / g.h[0]
        ty = (y - g.origin[1]) / g.h[1]
        rx, ry = np.rint(tx), np.rint(ty)
        ex = np.abs(tx - rx) < 1e-9
        ey = np.abs(ty - ry) < 1e-9
        i0 = np.where(ex, rx, np.floor(tx)).astype(int)
        j0 = np.where(ey, ry, np.floor(ty)).astype(int)
        for di, dj in ((-1, -1), (-1, 0), (0, -1), (0, 0)):
            ci = i0 + di
            cj = j0 + dj
            ok = (ci >= 0) & (ci < n1) & (cj >= 0) & (cj < n2)
            if di:
                ok &= ex
            if dj:
                ok &= ey
            idx = np.nonzero(ok)[0]
            hit = idx[act[cj[idx], ci[idx]]]
            yield l, hit, ci[hit], cj[hit]


def assign_points(mesh: HierarchicalMesh, x, y) -> np.ndarray:
    """Active cell ``(level, i, j)`` of every point, one row per point.

    A point on an edge shared by several active cells goes to the
    lexicographically smallest ``(level, i, j)``.
    """
    x, y = np.asarray(x, float).ravel(), np.asarray(y, float).ravel()
    out = np.full((x.size, 3), -1, dtype=int)
    todo = np.ones(x.size, dtype=bool)
    for l, hit, ci, cj in _candidates(mesh, x, y):
        keep = todo[hit]
        hit, ci, cj = hit[keep], ci[keep], cj[keep]
        out[hit] = np.column_stack([np.full(hit.size, l), ci, cj])
        todo[hit] = False
    if todo.any():
        k = int(np.argmax(todo))
        raise ValueError(f"point ({x[k]}, {y[k]}) lies outside the mesh")
    return out


def cell_errors(spline, f_values, points, mesh: HierarchicalMesh | None = None,
                membership: str = "owner") -> dict:
    """``delta(F_H; c) = max_{p in P and c} |F_H(p) - f(p)|`` for every active cell.

    ``membership="owner"`` gives each point to exactly one cell (see
    :func:`assign_points`); ``"closed"`` lets a point on a shared edge count
    for every closed cell that contains it.
    """
    mesh = mesh or spline.mesh
    x, y = (np.asarray(v, float).ravel() for v in points)
    err = np.abs(np.asarray(spline(x, y)).ravel() - np.asarray(f_values).ravel())
    if membership == "owner":
        owner = assign_points(mesh, x, y)
    elif membership == "closed":
        rows = [np.column_stack([np.full(h.size, l), ci, cj, h]) for l, h, ci, cj in _candidates(mesh, x, y)]
        allr = np.concatenate(rows)
        owner, err = allr[:, :3], err[allr[:, 3]]
    else:
        raise ValueError(f"unknown membership rule {membership!r}")
    delta = {c: 0.0 for c in mesh.cells()}
    if owner.size == 0:
        return delta
    order = np.lexsort((owner[:, 2], owner[:, 1], owner[:, 0]))
    keys, start = np.unique(owner[order], axis=0, return_index=True)
    maxima = np.maximum.reduceat(err[order], start)
    for (l, i, j), v in zip(keys.tolist(), maxima.tolist()):
        delta[(l, i, j)] = v
    return delta


def marked_cells(mesh: HierarchicalMesh, indicator: dict, eps: float) -> set:
    """Cells over tolerance plus their (at most 8) neighbours, no cascading.

    A neighbour position that is covered by a coarser active cell marks that
    cell; positions already refined further are left alone.
    """
    over = [c for c, v in indicator.items() if v > eps]
    marked = set(over)
    for l, i, j in over:
        n1, n2 = mesh.grid(l).n
        for di, dj in _NEIGHBOURS:
            a, b = i + di, j + dj
            if 0 <= a < n1 and 0 <= b < n2:
                owner = mesh.active_owner((l, a, b))
                if owner is not None:
                    marked.add(owner)
    return marked


def mark_and_split(mesh: HierarchicalMesh, indicator: dict, eps: float) -> HierarchicalMesh:
    marked = marked_cells(mesh, indicator, eps)
    if not marked:
        return mesh
    return mesh.split(sorted(marked))


def epsilon_from_tensor(build, f_values, points, factor: float = 1.5) -> float:
    """``factor * max_P |F - f|`` for the tensor operator ``F`` returned by ``build()``."""
    F = build()
    x, y = points
    return factor * float(np.max(np.abs(np.asarray(F(x, y)).ravel() - np.asarray(f_values).ravel())))


def adaptive_refine(build, f_values, points, max_levels: int, eps: float,
                    base: UniformGrid | None = None, membership: str = "owner") -> RefinementResult:
    """Refine until every cell indicator is within ``eps`` or ``max_levels`` iterations ran.

    ``build(mesh, basis)`` returns the hierarchical quasi-interpolant on
    ``mesh``; ``f_values`` are the exact values at ``points``.
    """
    mesh = HierarchicalMesh(base or UniformGrid())
    trace = []
    by_tol = False
    for it in range(1, max_levels + 1):
        basis = HierarchicalBasis(mesh, build.degrees)
        spline = build(mesh, basis)
        delta = cell_errors(spline, f_values, points, mesh, membership)
        worst = max(delta.values())
        if worst <= eps or it == max_levels:
            by_tol = worst <= eps
            trace.append(IterationRecord(it, mesh.depth, basis.dim, worst, 0, mesh, spline))
            break
        marked = marked_cells(mesh, delta, eps)
        trace.append(IterationRecord(it, mesh.depth, basis.dim, worst, len(marked), mesh, spline))
        log.info("iteration %d: M=%d dim=%d max delta=%.3e split=%d",
                 it, mesh.depth, basis.dim, worst, len(marked))
        mesh = mesh.split(sorted(marked))
    if eps == 0:
        log.warning("tolerance is zero: refinement runs until the level limit")
    return RefinementResult(mesh, spline, trace, eps, by_tol)
