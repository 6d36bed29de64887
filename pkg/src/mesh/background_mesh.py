import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

BOUNDARY_TAGS = ("left", "right", "bottom", "top")
# Local edge k of a triangle joins local vertices k and (k + 1) % 3
LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangular domain [x0, x1] x [y0, y1]"""
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"Degenerate rectangle {self}")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @classmethod
    def from_bounds(cls, bounds) -> "Rectangle":
        x0, x1, y0, y1 = (float(b) for b in bounds)
        return cls(x0, x1, y0, y1)


@dataclass(frozen=True)
class ElementMaps:
    """Affine maps x = origin + J xi of every triangle"""
    origin: np.ndarray       # (nt, 2)
    jacobian: np.ndarray     # (nt, 2, 2), columns are the edge vectors
    inverse: np.ndarray      # (nt, 2, 2)
    determinant: np.ndarray  # (nt,)


class BackgroundMesh:
    """
    Fixed conforming triangulation of a rectangle with face adjacency

    Triangles are stored positively oriented. Faces are the unique edges;
    ``face_elements[f]`` holds the two adjacent triangles, with -1 in the second
    slot on the boundary. ``element_faces[K, k]`` is the face of local edge k.
    """

    def __init__(self, vertices: np.ndarray, triangles: np.ndarray, domain: Rectangle):
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError(f"Vertices must have shape (n, 2), got {vertices.shape}")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError(f"Triangles must have shape (n, 3), got {triangles.shape}")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise ValueError("Triangle references a vertex that does not exist")

        signed = _signed_areas(vertices, triangles)
        if np.any(signed == 0.0):
            raise ValueError("Mesh contains zero-area triangles")
        flip = signed < 0
        triangles[flip] = triangles[flip][:, [0, 2, 1]]

        self.vertices = vertices
        self.triangles = triangles
        self.domain = domain
        self._build_faces()
        self._tag_boundary()

    def _build_faces(self) -> None:
        nt = len(self.triangles)
        edges = self.triangles[:, LOCAL_EDGES].reshape(-1, 2)
        faces, inverse = np.unique(np.sort(edges, axis=1), axis=0, return_inverse=True)
        inverse = inverse.ravel()
        counts = np.bincount(inverse, minlength=len(faces))
        if counts.max(initial=0) > 2:
            raise ValueError("Non-conforming mesh: an edge is shared by more than two triangles")

        owners = np.repeat(np.arange(nt), 3)
        order = np.argsort(inverse, kind="stable")
        sorted_faces = inverse[order]
        first = np.r_[True, sorted_faces[1:] != sorted_faces[:-1]]
        face_elements = -np.ones((len(faces), 2), dtype=np.int64)
        face_elements[sorted_faces[first], 0] = owners[order][first]
        face_elements[sorted_faces[~first], 1] = owners[order][~first]

        self.faces = faces
        self.face_elements = face_elements
        self.element_faces = inverse.reshape(nt, 3)

    def _tag_boundary(self) -> None:
        tags = np.full(len(self.faces), "", dtype=object)
        boundary = np.flatnonzero(self.face_elements[:, 1] < 0)
        mid = self.vertices[self.faces[boundary]].mean(axis=1)
        d = self.domain
        tol = 1e-10 * max(d.width, d.height)
        sides = {
            "left": np.abs(mid[:, 0] - d.x0) < tol,
            "right": np.abs(mid[:, 0] - d.x1) < tol,
            "bottom": np.abs(mid[:, 1] - d.y0) < tol,
            "top": np.abs(mid[:, 1] - d.y1) < tol,
        }
        for name, mask in sides.items():
            tags[boundary[mask]] = name
        untagged = boundary[tags[boundary] == ""]
        if untagged.size:
            raise ValueError(f"{untagged.size} boundary faces do not lie on the domain rectangle")
        self.boundary_tags = tags

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def areas(self) -> np.ndarray:
        return 0.5 * _signed_areas(self.vertices, self.triangles)

    @cached_property
    def h_per_element(self) -> np.ndarray:
        """Element diameter h_K (longest edge)"""
        xy = self.vertices[self.triangles]
        lengths = np.linalg.norm(xy[:, [1, 2, 0]] - xy, axis=2)
        return lengths.max(axis=1)

    @cached_property
    def h_per_vertex(self) -> np.ndarray:
        """Smallest diameter of the triangles sharing each vertex"""
        h = np.full(self.n_vertices, np.inf)
        np.minimum.at(h, self.triangles.ravel(), np.repeat(self.h_per_element, 3))
        return h

    @cached_property
    def face_lengths(self) -> np.ndarray:
        a, b = self.vertices[self.faces[:, 0]], self.vertices[self.faces[:, 1]]
        return np.linalg.norm(b - a, axis=1)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_elements[:, 1] >= 0)

    @cached_property
    def maps(self) -> ElementMaps:
        xy = self.vertices[self.triangles]
        jac = np.stack([xy[:, 1] - xy[:, 0], xy[:, 2] - xy[:, 0]], axis=2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0.0):
            raise ValueError("Degenerate element Jacobian")
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1] / det
        inv[:, 1, 1] = jac[:, 0, 0] / det
        inv[:, 0, 1] = -jac[:, 0, 1] / det
        inv[:, 1, 0] = -jac[:, 1, 0] / det
        return ElementMaps(xy[:, 0].copy(), jac, inv, det)

    def boundary_faces(self, tag: str = None) -> np.ndarray:
        """Boundary face ids, optionally restricted to one side"""
        mask = self.face_elements[:, 1] < 0
        if tag is not None:
            if tag not in BOUNDARY_TAGS:
                raise ValueError(f"Unknown boundary tag '{tag}'. Available tags: {list(BOUNDARY_TAGS)}")
            mask &= self.boundary_tags == tag
        return np.flatnonzero(mask)

    def face_neighbors(self, face_id: int) -> Tuple[int, ...]:
        """Adjacent triangle ids of a face (one id on the boundary)"""
        if not 0 <= face_id < self.n_faces:
            raise ValueError(f"Face id {face_id} out of range [0, {self.n_faces})")
        first, second = self.face_elements[face_id]
        return (int(first),) if second < 0 else (int(first), int(second))

    def element_diameter(self, element: int) -> float:
        if not 0 <= element < self.n_elements:
            raise ValueError(f"Element id {element} out of range [0, {self.n_elements})")
        return float(self.h_per_element[element])

    def to_reference(self, elements: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Reference coordinates of physical points inside the given elements"""
        maps = self.maps
        return np.einsum("nij,nj->ni", maps.inverse[elements], points - maps.origin[elements])

    def to_physical(self, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        maps = self.maps
        return maps.origin[elements] + np.einsum("nij,nj->ni", maps.jacobian[elements], reference)

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        return cKDTree(self.centroids)

    def locate(self, points: np.ndarray, tol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
        """
        Find the triangle containing each point

        Args:
            points: (n, 2) physical points inside the domain
            tol: Barycentric tolerance for points on element boundaries

        Returns:
            Element ids and reference coordinates of each point
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k = min(12, self.n_elements)
        _, candidates = self._centroid_tree.query(points, k=k)
        candidates = np.asarray(candidates).reshape(len(points), k)
        elements = -np.ones(len(points), dtype=np.int64)
        for column in range(k):
            todo = np.flatnonzero(elements < 0)
            if todo.size == 0:
                break
            trial = candidates[todo, column]
            inside = _inside(self.to_reference(trial, points[todo]), tol)
            elements[todo[inside]] = trial[inside]
        for index in np.flatnonzero(elements < 0):
            everywhere = np.arange(self.n_elements)
            ref = self.to_reference(everywhere, np.repeat(points[index:index + 1], self.n_elements, axis=0))
            hits = np.flatnonzero(_inside(ref, tol))
            if hits.size == 0:
                raise ValueError(f"Point {points[index]} lies outside the mesh")
            elements[index] = hits[0]
        return elements, self.to_reference(elements, points)

    def summary(self) -> Dict[str, float]:
        return {
            "vertices": self.n_vertices,
            "elements": self.n_elements,
            "faces": self.n_faces,
            "h_min": float(self.h_per_element.min()),
            "h_max": float(self.h_per_element.max()),
        }

    def dump(self, path: Union[str, Path]) -> Path:
        """Plain-text dump: 'x y' per vertex, a blank line, then 'i j k' per triangle"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as handle:
            for x, y in self.vertices:
                handle.write(f"{x:.17g} {y:.17g}\n")
            handle.write("\n")
            for i, j, k in self.triangles:
                handle.write(f"{i} {j} {k}\n")
        return path


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Twice the signed area of each triangle"""
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])


def _inside(reference: np.ndarray, tol: float) -> np.ndarray:
    xi, eta = reference[:, 0], reference[:, 1]
    return (xi >= -tol) & (eta >= -tol) & (xi + eta <= 1.0 + tol)


def build_uniform_mesh(domain: Rectangle, nx: int, ny: int) -> BackgroundMesh:
    """
    Structured mesh of nx x ny quads, each split along its lower-left to upper-right diagonal

    Args:
        domain: Rectangle to mesh
        nx: Number of cells in x
        ny: Number of cells in y

    Returns:
        BackgroundMesh with 2 nx ny triangles
    """
    if int(nx) < 1 or int(ny) < 1:
        raise ValueError(f"Cell counts must be positive, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(domain.x0, domain.x1, nx + 1)
    ys = np.linspace(domain.y0, domain.y1, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    vertices = np.column_stack([gx.ravel(), gy.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    v00 = (j * (nx + 1) + i).ravel()
    v10, v01 = v00 + 1, v00 + nx + 1
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)
    mesh = BackgroundMesh(vertices, triangles, domain)
    logger.debug("Uniform mesh %dx%d on %s: %s", nx, ny, domain, mesh.summary())
    return mesh
