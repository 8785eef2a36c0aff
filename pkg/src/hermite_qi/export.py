"""Mesh export: SVG drawings and the plain-text interchange format."""
from __future__ import annotations

from pathlib import Path

from .hierarchy import HierarchicalMesh

LEVEL_COLOURS = ("#1f3b73", "#2f6db5", "#4f9bd9", "#8cc4ec", "#c6e3f7", "#e8f4fc")


def mesh_svg(mesh: HierarchicalMesh, size: int = 600) -> str:
    """SVG with one ``rect`` per active cell; coarser levels get heavier strokes.

    The view box is the domain itself with ``y`` flipped so that the picture
    has the usual orientation.
    """
    a1, b1, a2, b2 = mesh.base.domain
    w, h = b1 - a1, b2 - a2
    unit = max(w, h) / size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size * w / max(w, h):.0f}" '
        f'height="{size * h / max(w, h):.0f}" viewBox="{a1} {-b2} {w} {h}">',
        f'<g transform="scale(1,-1)" fill="none" stroke="black">',
    ]
    for l, i, j in mesh.cells():
        (x0, x1), (y0, y1) = mesh.cell_bounds((l, i, j))
        stroke = unit * max(2.0 - 0.4 * l, 0.3)
        colour = LEVEL_COLOURS[min(l, len(LEVEL_COLOURS) - 1)]
        parts.append(
            f'<rect x="{x0!r}" y="{y0!r}" width="{x1 - x0!r}" height="{y1 - y0!r}" '
            f'stroke="{colour}" stroke-width="{stroke:.6g}" data-level="{l}"/>'
        )
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"


def _write(path, text):
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def export_mesh_svg(mesh: HierarchicalMesh, path, size: int = 600) -> Path:
    return _write(path, mesh_svg(mesh, size))


def export_mesh_text(mesh: HierarchicalMesh, path) -> Path:
    return _write(path, mesh.to_text())


def import_mesh_text(path) -> HierarchicalMesh:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return HierarchicalMesh.from_text(text)
