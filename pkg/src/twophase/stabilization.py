from typing import Dict

import scipy.sparse as sp

from src.geometry.quadrature import face_point_set
from src.geometry.slab import SlabGeometry
from src.spaces.face_jumps import ghost_penalty_matrix
from src.twophase.forms import MatrixBlocks, PHASES, COMPONENTS, p_key, u_key
from src.twophase.layout import FlowLayout
from src.twophase.params import FluidParams, StabParams


def stab_sp(slab: SlabGeometry, layout: FlowLayout, fluid: FluidParams,
            stab: StabParams) -> MatrixBlocks:
    """Pressure ghost penalty C_p mu_i^-1 h^3 (jump d_n p, jump d_n q) on the ghost faces of each phase"""
    blocks: MatrixBlocks = {}
    for phase in PHASES:
        faces = face_point_set(slab.mesh, slab.ghost_faces[phase])
        scale = stab.c_p / fluid.mu(phase) * faces.h ** 3
        key = p_key(phase)
        blocks[(key, key)] = ghost_penalty_matrix(layout.space(key), faces, 1, scale)
    return blocks


def stab_su(slab: SlabGeometry, layout: FlowLayout, fluid: FluidParams,
            stab: StabParams) -> MatrixBlocks:
    """
    Velocity ghost penalty of first and second normal derivatives

    sum_m C_{u,m} mu_i h^(2m - 1) (jump D^m_n u_l, jump D^m_n v_l), the same
    matrix for both components of a phase.
    """
    blocks: MatrixBlocks = {}
    constants: Dict[int, float] = {1: stab.c_u1, 2: stab.c_u2}
    for phase in PHASES:
        faces = face_point_set(slab.mesh, slab.ghost_faces[phase])
        space = layout.space(u_key(phase, 0))
        matrix = sp.csr_matrix((space.n_dofs, space.n_dofs))
        for order, constant in constants.items():
            scale = constant * fluid.mu(phase) * faces.h ** (2 * order - 1)
            matrix = matrix + ghost_penalty_matrix(space, faces, order, scale)
        for component in COMPONENTS:
            key = u_key(phase, component)
            blocks[(key, key)] = matrix
    return blocks
