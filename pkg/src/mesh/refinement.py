import logging
from typing import Callable

import numpy as np

from src.mesh.background_mesh import BackgroundMesh, LOCAL_EDGES

logger = logging.getLogger(__name__)

RegionPredicate = Callable[[np.ndarray], np.ndarray]

# Barycentric sample points used to decide whether a triangle meets the region:
# vertices, edge midpoints and the centroid
_SAMPLES = np.array([
    [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5],
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
])


def marked_elements(mesh: BackgroundMesh, region: RegionPredicate) -> np.ndarray:
    """Triangles with at least one sample point inside the region"""
    xy = mesh.vertices[mesh.triangles]
    samples = np.einsum("sk,nkd->nsd", _SAMPLES, xy).reshape(-1, 2)
    inside = np.asarray(region(samples), dtype=bool).reshape(mesh.n_elements, len(_SAMPLES))
    return inside.any(axis=1)


def refine_region(mesh: BackgroundMesh, region: RegionPredicate, levels: int) -> BackgroundMesh:
    """
    Red-green refinement of the triangles meeting a region

    Each level red-refines (4 children) every marked triangle, upgrades triangles
    with two split edges to red until the marking is closed, and bisects
    triangles with a single split edge (green closure). The result is conforming.

    Args:
        mesh: Mesh to refine
        region: Vectorized point predicate, (n, 2) -> (n,) bool
        levels: Number of refinement passes

    Returns:
        Refined mesh (the input itself when levels is 0)
    """
    if levels < 0:
        raise ValueError(f"Refinement levels must be non-negative, got {levels}")
    for level in range(levels):
        marked = marked_elements(mesh, region)
        if not marked.any():
            logger.info("Refinement level %d: no triangle meets the region", level + 1)
            break
        mesh = _refine_once(mesh, marked)
        logger.info("Refinement level %d: %s", level + 1, mesh.summary())
    return mesh


def _refine_once(mesh: BackgroundMesh, marked: np.ndarray) -> BackgroundMesh:
    split = np.zeros(mesh.n_faces, dtype=bool)
    split[mesh.element_faces[marked].ravel()] = True
    while True:
        count = split[mesh.element_faces].sum(axis=1)
        upgrade = count == 2
        if not upgrade.any():
            break
        split[mesh.element_faces[upgrade].ravel()] = True

    split_ids = np.flatnonzero(split)
    midpoint_of = -np.ones(mesh.n_faces, dtype=np.int64)
    midpoint_of[split_ids] = mesh.n_vertices + np.arange(split_ids.size)
    midpoints = mesh.vertices[mesh.faces[split_ids]].mean(axis=1)
    vertices = np.vstack([mesh.vertices, midpoints])

    tri = mesh.triangles
    mids = midpoint_of[mesh.element_faces]
    count = split[mesh.element_faces].sum(axis=1)

    keep = tri[count == 0]

    red = count == 3
    a, b, c = tri[red, 0], tri[red, 1], tri[red, 2]
    m_ab, m_bc, m_ca = mids[red, 0], mids[red, 1], mids[red, 2]
    red_children = np.concatenate([
        np.column_stack([a, m_ab, m_ca]),
        np.column_stack([m_ab, b, m_bc]),
        np.column_stack([m_ca, m_bc, c]),
        np.column_stack([m_ab, m_bc, m_ca]),
    ])

    green = np.flatnonzero(count == 1)
    edge = np.argmax(split[mesh.element_faces[green]], axis=1)
    start = tri[green, LOCAL_EDGES[edge, 0]]
    end = tri[green, LOCAL_EDGES[edge, 1]]
    opposite = tri[green, (edge + 2) % 3]
    middle = mids[green, edge]
    green_children = np.concatenate([
        np.column_stack([start, middle, opposite]),
        np.column_stack([middle, end, opposite]),
    ])

    triangles = np.concatenate([keep, red_children, green_children])
    return BackgroundMesh(vertices, triangles, mesh.domain)


def box_region(x0: float, x1: float, y0: float, y1: float) -> RegionPredicate:
    """Predicate of an axis-aligned box"""
    def inside(points: np.ndarray) -> np.ndarray:
        return (points[:, 0] >= x0) & (points[:, 0] <= x1) & (points[:, 1] >= y0) & (points[:, 1] <= y1)
    return inside
