"""Jumps of normal derivatives across interior faces, shared by all ghost penalties"""
from typing import TYPE_CHECKING, Tuple

import numpy as np
import scipy.sparse as sp

from src.linalg.sparse_system import scatter_matrix
from src.spaces.lagrange import physical_basis, physical_hessians
from src.spaces.scalar_space import ScalarSpace

if TYPE_CHECKING:
    from src.geometry.quadrature import FacePointSet


def normal_derivative_jumps(space: ScalarSpace, faces: "FacePointSet",
                            order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Jump of the order-th normal derivative of every basis function on each face

    Returns:
        dofs (nf, 2a) and jumps (nf, nq, 2a); the second neighbour's functions
        enter with a minus sign
    """
    nf, nq = faces.weights.shape
    sides = []
    for side in (0, 1):
        elements = faces.elements[:, side]
        if order == 1:
            _, grads = physical_basis(space.mesh, space.degree, np.repeat(elements, nq),
                                      faces.reference[:, :, side].reshape(-1, 2))
            normals = np.repeat(faces.normals, nq, axis=0)
            derivative = np.einsum("nad,nd->na", grads, normals).reshape(nf, nq, -1)
        elif order == 2:
            hessians = physical_hessians(space.mesh, space.degree, elements)
            second = np.einsum("fi,faij,fj->fa", faces.normals, hessians, faces.normals)
            derivative = np.repeat(second[:, None, :], nq, axis=1)
        else:
            raise ValueError(f"Normal-derivative order must be 1 or 2, got {order}")
        sides.append(derivative)
    dofs = np.hstack([space.dofs_of(faces.elements[:, 0]), space.dofs_of(faces.elements[:, 1])])
    return dofs, np.concatenate([sides[0], -sides[1]], axis=2)


def ghost_penalty_matrix(space: ScalarSpace, faces: "FacePointSet", order: int,
                         scale: np.ndarray) -> sp.csr_matrix:
    """
    sum_F scale_F (jump D^order_n u, jump D^order_n v)_F on the space's DOFs

    Args:
        space: Space whose active mesh contains both neighbours of every face
        faces: Face quadrature
        order: 1 or 2
        scale: (nf,) per-face coefficient (constants and powers of h)
    """
    shape = (space.n_dofs, space.n_dofs)
    if len(faces.faces) == 0:
        return sp.csr_matrix(shape)
    dofs, jumps = normal_derivative_jumps(space, faces, order)
    weighted = jumps * (faces.weights * np.asarray(scale)[:, None])[:, :, None]
    local = np.einsum("fqa,fqb->fab", weighted, jumps)
    return scatter_matrix(dofs, dofs, local, shape)
