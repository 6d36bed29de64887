"""
Nodal Lagrange bases on the reference triangle (0,0), (1,0), (0,1)

P2 local node order: the three vertices, then the midpoints of the local edges
(0,1), (1,2), (2,0). Global P2 node numbering: mesh vertices first, then
``n_vertices + face_id`` for edge midpoints.
"""
from typing import Tuple

import numpy as np

from src.mesh.background_mesh import BackgroundMesh

_GRAD_LAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
_P2_EDGES = ((0, 1), (1, 2), (2, 0))


def n_local(degree: int) -> int:
    if degree == 1:
        return 3
    if degree == 2:
        return 6
    raise ValueError(f"Unsupported polynomial degree {degree}; expected 1 or 2")


def _barycentric(reference: np.ndarray) -> np.ndarray:
    xi, eta = reference[..., 0], reference[..., 1]
    return np.stack([1.0 - xi - eta, xi, eta], axis=-1)


def reference_values(degree: int, reference: np.ndarray) -> np.ndarray:
    """Basis values at reference points, shape (n, n_local)"""
    lam = _barycentric(np.atleast_2d(reference))
    if n_local(degree) == 3:
        return lam
    vertex = lam * (2.0 * lam - 1.0)
    edge = np.stack([4.0 * lam[:, a] * lam[:, b] for a, b in _P2_EDGES], axis=1)
    return np.hstack([vertex, edge])


def reference_gradients(degree: int, reference: np.ndarray) -> np.ndarray:
    """Basis gradients with respect to reference coordinates, shape (n, n_local, 2)"""
    reference = np.atleast_2d(reference)
    if n_local(degree) == 3:
        return np.broadcast_to(_GRAD_LAMBDA, (len(reference), 3, 2)).copy()
    lam = _barycentric(reference)
    g = _GRAD_LAMBDA
    vertex = (4.0 * lam - 1.0)[:, :, None] * g[None, :, :]
    edge = np.stack([
        4.0 * (lam[:, b, None] * g[a] + lam[:, a, None] * g[b]) for a, b in _P2_EDGES
    ], axis=1)
    return np.concatenate([vertex, edge], axis=1)


def reference_hessians(degree: int) -> np.ndarray:
    """Constant reference Hessians, shape (n_local, 2, 2); zero for P1"""
    if n_local(degree) == 3:
        return np.zeros((3, 2, 2))
    g = _GRAD_LAMBDA
    vertex = [4.0 * np.outer(g[i], g[i]) for i in range(3)]
    edge = [4.0 * (np.outer(g[a], g[b]) + np.outer(g[b], g[a])) for a, b in _P2_EDGES]
    return np.array(vertex + edge)


def element_dofs(mesh: BackgroundMesh, degree: int) -> np.ndarray:
    """Global node ids per element, shape (nt, n_local)"""
    if n_local(degree) == 3:
        return mesh.triangles
    return np.hstack([mesh.triangles, mesh.n_vertices + mesh.element_faces])


def n_nodes(mesh: BackgroundMesh, degree: int) -> int:
    return mesh.n_vertices if n_local(degree) == 3 else mesh.n_vertices + mesh.n_faces


def lagrange_nodes(mesh: BackgroundMesh, degree: int) -> np.ndarray:
    """Coordinates of all global nodes"""
    if n_local(degree) == 3:
        return mesh.vertices
    midpoints = mesh.vertices[mesh.faces].mean(axis=1)
    return np.vstack([mesh.vertices, midpoints])


def physical_basis(mesh: BackgroundMesh, degree: int, elements: np.ndarray,
                   reference: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Basis values and physical gradients at a batch of points

    Args:
        mesh: Background mesh
        degree: 1 or 2
        elements: (n,) element of each point
        reference: (n, 2) reference coordinates of each point

    Returns:
        values (n, n_local) and gradients (n, n_local, 2)
    """
    values = reference_values(degree, reference)
    ref_grads = reference_gradients(degree, reference)
    grads = np.einsum("nad,nde->nae", ref_grads, mesh.maps.inverse[elements])
    return values, grads


def physical_hessians(mesh: BackgroundMesh, degree: int, elements: np.ndarray) -> np.ndarray:
    """Physical Hessians J^-T H J^-1 per element, shape (n, n_local, 2, 2)"""
    inv = mesh.maps.inverse[elements]
    ref = reference_hessians(degree)
    return np.einsum("nki,akl,nlj->naij", inv, ref, inv)


def eval_basis(mesh: BackgroundMesh, degree: int, element: int,
               reference_point) -> Tuple[np.ndarray, np.ndarray]:
    """Values and physical gradients of the local basis of one element at one reference point"""
    point = np.asarray(reference_point, dtype=float).reshape(1, 2)
    if point[0, 0] < -1e-12 or point[0, 1] < -1e-12 or point.sum() > 1.0 + 1e-12:
        raise ValueError(f"Reference point {reference_point} lies outside the reference triangle")
    if mesh.maps.determinant[element] <= 0.0:
        raise ValueError(f"Degenerate Jacobian on element {element}")
    values, grads = physical_basis(mesh, degree, np.array([element]), point)
    return values[0], grads[0]


def interpolate(mesh: BackgroundMesh, degree: int, coeffs: np.ndarray, elements: np.ndarray,
                reference: np.ndarray) -> np.ndarray:
    """Evaluate a nodal field (scalar or with trailing components) at points"""
    values = reference_values(degree, reference)
    local = coeffs[element_dofs(mesh, degree)[elements]]
    return np.einsum("na,na...->n...", values, local)


def interpolate_gradient(mesh: BackgroundMesh, degree: int, coeffs: np.ndarray,
                         elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Gradient of a nodal field; (n, 2) for scalars, (n, c, 2) for c components"""
    _, grads = physical_basis(mesh, degree, elements, reference)
    local = coeffs[element_dofs(mesh, degree)[elements]]
    if local.ndim == 2:
        return np.einsum("nad,na->nd", grads, local)
    return np.einsum("nad,nac->ncd", grads, local)
