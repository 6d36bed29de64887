from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from src.geometry.classification import ElementLabel
from src.geometry.interface import InterfaceMesh
from src.mesh.background_mesh import BackgroundMesh


@dataclass(frozen=True, eq=False)
class CutDecomposition:
    """
    Phase split of the mesh: uncut elements carry a phase label, cut elements
    are covered by sub-triangles (one corner triangle and two triangles
    splitting the remaining quadrilateral), each labelled with its phase.
    """
    mesh: BackgroundMesh = field(repr=False)
    labels: np.ndarray
    sub_triangles: np.ndarray   # (ns, 3, 2)
    sub_elements: np.ndarray    # (ns,) parent element
    sub_phases: np.ndarray      # (ns,)

    @property
    def sub_areas(self) -> np.ndarray:
        return _areas(self.sub_triangles)

    def phase_area(self, phase: int) -> float:
        full = self.mesh.areas[self.labels == phase].sum()
        return float(full + self.sub_areas[self.sub_phases == phase].sum())

    def parts_of(self, element: int) -> List[Tuple[np.ndarray, int]]:
        if self.labels[element] != ElementLabel.CUT:
            return [(self.mesh.vertices[self.mesh.triangles[element]], int(self.labels[element]))]
        pick = np.flatnonzero(self.sub_elements == element)
        return [(self.sub_triangles[s], int(self.sub_phases[s])) for s in pick]


def _areas(triangles: np.ndarray) -> np.ndarray:
    e1 = triangles[:, 1] - triangles[:, 0]
    e2 = triangles[:, 2] - triangles[:, 0]
    return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _phase_of(value: np.ndarray) -> np.ndarray:
    return np.where(value > 0.0, int(ElementLabel.PHASE1), int(ElementLabel.PHASE2))


def _split(coords: np.ndarray, values: np.ndarray, p: np.ndarray, q: np.ndarray):
    """
    Sub-triangles of cut elements whose lone-sign vertex is local vertex 0

    coords (n, 3, 2) and values (n, 3) are rotated so that vertex 0 is the lone
    vertex; p lies on edge (0, 1), q on edge (0, 2).
    """
    x_i, x_j, x_k = coords[:, 0], coords[:, 1], coords[:, 2]
    triangles = np.stack([
        np.stack([x_i, p, q], axis=1),
        np.stack([p, x_j, x_k], axis=1),
        np.stack([p, x_k, q], axis=1),
    ], axis=1)
    centroid_values = np.stack([
        values[:, 0] / 3.0,
        (values[:, 1] + values[:, 2]) / 3.0,
        values[:, 2] / 3.0,
    ], axis=1)
    return triangles, _phase_of(centroid_values)


def _lone_vertex(values: np.ndarray) -> np.ndarray:
    positive = values > 0.0
    lone_positive = positive.sum(axis=1) == 1
    return np.where(lone_positive, np.argmax(positive, axis=1), np.argmax(~positive, axis=1))


def _rotate(array: np.ndarray, lone: np.ndarray) -> np.ndarray:
    order = (lone[:, None] + np.arange(3)[None, :]) % 3
    if array.ndim == 3:
        return np.take_along_axis(array, order[:, :, None], axis=1)
    return np.take_along_axis(array, order, axis=1)


def decompose_cut_element(coords: np.ndarray, values: np.ndarray) -> List[Tuple[np.ndarray, int]]:
    """
    Split one triangle by the zero set of the linear interpolant of its vertex values

    Args:
        coords: (3, 2) vertex coordinates
        values: (3,) level-set values (already snapped)

    Returns:
        List of (sub-triangle coordinates, phase); a single entry for uncut triangles
    """
    coords = np.asarray(coords, dtype=float).reshape(1, 3, 2)
    values = np.asarray(values, dtype=float).reshape(1, 3)
    positive = (values > 0.0).sum()
    if positive in (0, 3):
        return [(coords[0], int(_phase_of(values[0, :1])[0]))]
    lone = _lone_vertex(values)
    c, v = _rotate(coords, lone), _rotate(values, lone)
    s_ij = v[:, 0] / (v[:, 0] - v[:, 1])
    s_ik = v[:, 0] / (v[:, 0] - v[:, 2])
    p = c[:, 0] + s_ij[:, None] * (c[:, 1] - c[:, 0])
    q = c[:, 0] + s_ik[:, None] * (c[:, 2] - c[:, 0])
    triangles, phases = _split(c, v, p, q)
    return [(triangles[0, s], int(phases[0, s])) for s in range(3)]


def decompose_elements(interface: InterfaceMesh) -> CutDecomposition:
    """Sub-triangulate all cut elements of an interface, reusing its face crossings"""
    mesh = interface.mesh
    cut = interface.elements
    if len(cut) == 0:
        return CutDecomposition(mesh, interface.labels, np.zeros((0, 3, 2)),
                                np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    values = interface.values[mesh.triangles[cut]]
    lone = _lone_vertex(values)
    coords = _rotate(mesh.vertices[mesh.triangles[cut]], lone)
    rotated_values = _rotate(values, lone)
    element_faces = mesh.element_faces[cut]
    rows = np.arange(len(cut))
    p = interface.face_points[element_faces[rows, lone]]
    q = interface.face_points[element_faces[rows, (lone + 2) % 3]]
    triangles, phases = _split(coords, rotated_values, p, q)
    return CutDecomposition(
        mesh, interface.labels, triangles.reshape(-1, 3, 2),
        np.repeat(cut, 3), phases.ravel(),
    )
