"""Quadrature rules in time, on triangles and on segments, and point-set containers"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.mesh.background_mesh import BackgroundMesh


@dataclass(frozen=True)
class TimeQuadrature:
    points: np.ndarray
    weights: np.ndarray
    t_n: float
    dt: float

    def normalized(self) -> np.ndarray:
        """Quadrature points mapped to theta = (t - t_n) / dt in [0, 1]"""
        return (self.points - self.t_n) / self.dt

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def simpson_rule(t_n: float, dt: float) -> TimeQuadrature:
    """Simpson rule on [t_n, t_n + dt]: exact for polynomials of degree 3"""
    if not dt > 0.0:
        raise ValueError(f"Time step must be positive, got {dt}")
    points = np.array([t_n, t_n + 0.5 * dt, t_n + dt])
    weights = np.array([dt / 6.0, 4.0 * dt / 6.0, dt / 6.0])
    return TimeQuadrature(points, weights, float(t_n), float(dt))


# Degree-4 Dunavant rule: barycentric points and weights summing to one
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322
TRIANGLE_BARYCENTRIC = np.array([
    [_A1, _A1, 1.0 - 2.0 * _A1],
    [_A1, 1.0 - 2.0 * _A1, _A1],
    [1.0 - 2.0 * _A1, _A1, _A1],
    [_A2, _A2, 1.0 - 2.0 * _A2],
    [_A2, 1.0 - 2.0 * _A2, _A2],
    [1.0 - 2.0 * _A2, _A2, _A2],
])
TRIANGLE_WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])
# Reference coordinates (xi, eta) of the same points on the reference triangle
TRIANGLE_REFERENCE = TRIANGLE_BARYCENTRIC[:, 1:]

# Three-point Gauss rule on [0, 1]
GAUSS_POINTS = np.array([0.5 - np.sqrt(15.0) / 10.0, 0.5, 0.5 + np.sqrt(15.0) / 10.0])
GAUSS_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


def triangle_rule(coords: np.ndarray):
    """
    Map the triangle rule onto a batch of physical triangles

    Args:
        coords: (n, 3, 2) vertex coordinates

    Returns:
        points (n, nq, 2) and weights (n, nq) including the triangle areas
    """
    points = np.einsum("qk,nkd->nqd", TRIANGLE_BARYCENTRIC, coords)
    e1, e2 = coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return points, area[:, None] * TRIANGLE_WEIGHTS[None, :]


def segment_rule(endpoints: np.ndarray):
    """
    Three-point Gauss rule on a batch of segments

    Args:
        endpoints: (n, 2, 2) segment endpoints

    Returns:
        points (n, 3, 2) and weights (n, 3) including the segment lengths
    """
    a, b = endpoints[:, 0], endpoints[:, 1]
    points = a[:, None, :] + GAUSS_POINTS[None, :, None] * (b - a)[:, None, :]
    length = np.linalg.norm(b - a, axis=1)
    return points, length[:, None] * GAUSS_WEIGHTS[None, :]


@dataclass(frozen=True)
class PointSet:
    """
    Flat batch of quadrature points located in background elements

    ``normals`` is set for interface and boundary points; ``tags`` carries the
    boundary side of boundary points.
    """
    elements: np.ndarray
    reference: np.ndarray
    weights: np.ndarray
    points: np.ndarray
    normals: Optional[np.ndarray] = None
    tags: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.elements)

    def subset(self, mask: np.ndarray) -> "PointSet":
        pick = lambda a: None if a is None else a[mask]
        return PointSet(self.elements[mask], self.reference[mask], self.weights[mask],
                        self.points[mask], pick(self.normals), pick(self.tags))

    @classmethod
    def empty(cls, with_normals: bool = False) -> "PointSet":
        return cls(np.zeros(0, dtype=np.int64), np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2)),
                   np.zeros((0, 2)) if with_normals else None)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def element_point_set(mesh: BackgroundMesh, elements: np.ndarray) -> PointSet:
    """Full-element quadrature on the given background elements"""
    elements = np.asarray(elements, dtype=np.int64)
    nq = len(TRIANGLE_WEIGHTS)
    weights = mesh.areas[elements, None] * TRIANGLE_WEIGHTS[None, :]
    reference = np.broadcast_to(TRIANGLE_REFERENCE, (len(elements), nq, 2)).reshape(-1, 2)
    owners = np.repeat(elements, nq)
    return PointSet(owners, reference, weights.ravel(), mesh.to_physical(owners, reference))


def boundary_point_set(mesh: BackgroundMesh, faces: Optional[np.ndarray] = None) -> PointSet:
    """Gauss points on boundary faces with outward unit normals and side tags"""
    if faces is None:
        faces = mesh.boundary_faces()
    faces = np.asarray(faces, dtype=np.int64)
    endpoints = mesh.vertices[mesh.faces[faces]]
    points, weights = segment_rule(endpoints)
    owners = mesh.face_elements[faces, 0]
    tangent = endpoints[:, 1] - endpoints[:, 0]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    normal /= np.linalg.norm(normal, axis=1)[:, None]
    outward = np.einsum("nd,nd->n", normal, endpoints[:, 0] - mesh.centroids[owners])
    normal[outward < 0] *= -1.0
    nq = points.shape[1]
    owners_q = np.repeat(owners, nq)
    flat = points.reshape(-1, 2)
    return PointSet(owners_q, mesh.to_reference(owners_q, flat), weights.ravel(), flat,
                    np.repeat(normal, nq, axis=0), np.repeat(mesh.boundary_tags[faces], nq))


@dataclass(frozen=True)
class FacePointSet:
    """Gauss points on interior faces, with reference coordinates in both neighbours"""
    faces: np.ndarray
    elements: np.ndarray    # (nf, 2)
    reference: np.ndarray   # (nf, nq, 2, 2): face, point, side, coordinate
    weights: np.ndarray     # (nf, nq)
    normals: np.ndarray     # (nf, 2), pointing from elements[:, 0] to elements[:, 1]
    h: np.ndarray           # (nf,) max diameter of the two neighbours
    lengths: np.ndarray     # (nf,)


def face_point_set(mesh: BackgroundMesh, faces: np.ndarray) -> FacePointSet:
    faces = np.asarray(faces, dtype=np.int64)
    pair = mesh.face_elements[faces]
    if np.any(pair[:, 1] < 0):
        raise ValueError("Face point sets are only defined on interior faces")
    endpoints = mesh.vertices[mesh.faces[faces]]
    points, weights = segment_rule(endpoints)
    tangent = endpoints[:, 1] - endpoints[:, 0]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    normal /= np.linalg.norm(normal, axis=1)[:, None]
    towards = np.einsum("nd,nd->n", normal, mesh.centroids[pair[:, 1]] - mesh.centroids[pair[:, 0]])
    normal[towards < 0] *= -1.0
    nq = points.shape[1]
    flat = points.reshape(-1, 2)
    reference = np.stack([
        mesh.to_reference(np.repeat(pair[:, side], nq), flat).reshape(-1, nq, 2) for side in (0, 1)
    ], axis=2)
    h = np.maximum(mesh.h_per_element[pair[:, 0]], mesh.h_per_element[pair[:, 1]])
    return FacePointSet(faces, pair, reference, weights, normal, h, mesh.face_lengths[faces])
