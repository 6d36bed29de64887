import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from src.geometry.classification import (
    ElementLabel, labels_from_values, snap_vertex_values
)
from src.levelset.level_set import LevelSetField
from src.mesh.background_mesh import BackgroundMesh, LOCAL_EDGES
from src.spaces.lagrange import reference_gradients

logger = logging.getLogger(__name__)

DEGENERATE_FACTOR = 1e-14


@dataclass(frozen=True, eq=False)
class InterfaceMesh:
    """
    Piecewise linear interface: one segment per cut element

    Normals are unit vectors pointing from Omega_1 into Omega_2 (towards phi < 0).
    ``labels`` is the element classification after degenerate cuts were removed;
    ``face_points`` holds the zero crossing of every crossed face (NaN elsewhere).
    """
    mesh: BackgroundMesh = field(repr=False)
    endpoints: np.ndarray
    elements: np.ndarray
    normals: np.ndarray
    faces: np.ndarray
    time: float
    labels: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    face_points: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.endpoints[:, 1] - self.endpoints[:, 0], axis=1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.endpoints.mean(axis=1)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


def edge_crossings(mesh: BackgroundMesh, snapped: np.ndarray) -> np.ndarray:
    """Zero crossing of the linear interpolant on every face with a sign change (NaN elsewhere)"""
    a, b = mesh.faces[:, 0], mesh.faces[:, 1]
    va, vb = snapped[a], snapped[b]
    crossed = (va > 0.0) != (vb > 0.0)
    points = np.full((mesh.n_faces, 2), np.nan)
    s = va[crossed] / (va[crossed] - vb[crossed])
    xa, xb = mesh.vertices[a[crossed]], mesh.vertices[b[crossed]]
    points[crossed] = xa + s[:, None] * (xb - xa)
    return points


def reconstruct_interface(phi: LevelSetField, labels: Optional[np.ndarray] = None) -> InterfaceMesh:
    """
    Cut every element with mixed vertex signs along the zero set of phi

    Args:
        phi: P1 level set
        labels: Classification from classify_elements (recomputed when omitted)

    Returns:
        InterfaceMesh; segments shorter than 1e-14 h_K are dropped and their
        element relabelled by the sign of the vertex majority
    """
    if phi.degree != 1:
        raise ValueError("Interface reconstruction works on P1 level sets")
    mesh = phi.mesh
    snapped = snap_vertex_values(mesh, phi.vertex_values)
    labels = labels_from_values(mesh, snapped) if labels is None else np.array(labels, dtype=np.int64)

    points = edge_crossings(mesh, snapped)
    cut = np.flatnonzero(labels == ElementLabel.CUT)
    local_values = snapped[mesh.triangles[cut]]
    positive = local_values > 0.0
    changes = positive[:, LOCAL_EDGES[:, 0]] != positive[:, LOCAL_EDGES[:, 1]]
    if np.any(changes.sum(axis=1) != 2):
        raise ValueError("Cut elements must have exactly two crossed edges")
    local_edges = np.argsort(~changes, axis=1, kind="stable")[:, :2]
    faces = np.take_along_axis(mesh.element_faces[cut], local_edges, axis=1)
    endpoints = points[faces]

    length = np.linalg.norm(endpoints[:, 1] - endpoints[:, 0], axis=1)
    degenerate = length < DEGENERATE_FACTOR * mesh.h_per_element[cut]
    if degenerate.any():
        majority = np.where(positive[degenerate].sum(axis=1) >= 2, ElementLabel.PHASE1, ElementLabel.PHASE2)
        labels[cut[degenerate]] = majority
        logger.warning("Dropped %d degenerate interface segments at t=%.6g", degenerate.sum(), phi.time)
        keep = ~degenerate
        cut, local_values, faces, endpoints = cut[keep], local_values[keep], faces[keep], endpoints[keep]

    grads = np.einsum("ad,nde->nae", reference_gradients(1, np.zeros((1, 2)))[0], mesh.maps.inverse[cut])
    gradient = np.einsum("nad,na->nd", grads, local_values)
    normals = -gradient / np.linalg.norm(gradient, axis=1)[:, None]
    return InterfaceMesh(mesh, endpoints, cut, normals, faces, float(phi.time), labels, snapped, points)


def tangential_projector(normal: np.ndarray) -> np.ndarray:
    """
    P = I - n (x) n for one normal (2,) or a batch (n, 2)

    Raises:
        ValueError: If a normal is not of unit length within 1e-12
    """
    normal = np.asarray(normal, dtype=float)
    batch = np.atleast_2d(normal)
    if np.any(np.abs(np.linalg.norm(batch, axis=1) - 1.0) > 1e-12):
        raise ValueError("Tangential projector needs unit normals")
    projector = np.eye(2)[None, :, :] - batch[:, :, None] * batch[:, None, :]
    return projector[0] if normal.ndim == 1 else projector


def count_interface_components(interface: InterfaceMesh) -> int:
    """Connected components of the graph whose nodes are crossed faces and whose edges are segments"""
    if len(interface) == 0:
        return 0
    used, inverse = np.unique(interface.faces.ravel(), return_inverse=True)
    pairs = inverse.reshape(-1, 2)
    graph = sp.coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(used), len(used))
    )
    count, _ = connected_components(graph, directed=False)
    return int(count)
