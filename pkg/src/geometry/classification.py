from enum import IntEnum

import numpy as np

from src.levelset.level_set import LevelSetField
from src.mesh.background_mesh import BackgroundMesh

# Vertex values with |phi| below SNAP_FACTOR * h are pushed into Omega_1
SNAP_FACTOR = 1e-12


class ElementLabel(IntEnum):
    CUT = 0
    PHASE1 = 1
    PHASE2 = 2


def snap_vertex_values(mesh: BackgroundMesh, values: np.ndarray) -> np.ndarray:
    tol = SNAP_FACTOR * mesh.h_per_vertex
    snapped = np.array(values, dtype=float)
    small = np.abs(snapped) < tol
    snapped[small] = tol[small]
    return snapped


def labels_from_values(mesh: BackgroundMesh, snapped: np.ndarray) -> np.ndarray:
    positive = (snapped[mesh.triangles] > 0.0).sum(axis=1)
    labels = np.full(mesh.n_elements, int(ElementLabel.CUT), dtype=np.int64)
    labels[positive == 3] = ElementLabel.PHASE1
    labels[positive == 0] = ElementLabel.PHASE2
    return labels


def classify_elements(phi: LevelSetField) -> np.ndarray:
    """
    Label every element cut, phase 1 (phi > 0) or phase 2 (phi < 0)

    An element is cut iff its snapped vertex values have strictly mixed signs.
    """
    if phi.degree != 1:
        raise ValueError("Classification works on P1 level sets; project the field first")
    return labels_from_values(phi.mesh, snap_vertex_values(phi.mesh, phi.vertex_values))
