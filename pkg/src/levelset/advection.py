import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from src.geometry.quadrature import element_point_set
from src.levelset.level_set import LevelSetField
from src.levelset.velocity import VelocitySampler
from src.linalg.solver import lu_solve
from src.linalg.sparse_system import scatter_matrix
from src.spaces.lagrange import element_dofs, n_nodes, physical_basis
from src.utils.errors import SingularSystemError

logger = logging.getLogger(__name__)


def streamline_parameter(speed: np.ndarray, h: np.ndarray, dt: float, c_sd: float = 1.0) -> np.ndarray:
    """tau_K = C_sd ((2/dt)^2 + (2|u|/h_K)^2)^(-1/2)"""
    return c_sd / np.sqrt((2.0 / dt) ** 2 + (2.0 * speed / h) ** 2)


def assemble_transport(phi: LevelSetField, velocity: VelocitySampler, t: float, dt: float,
                       c_sd: float = 1.0):
    """
    Streamline-diffusion mass and convection matrices of the level-set space

    M[i, j] = (phi_j, phi_i + tau u.grad phi_i), C[i, j] = (u.grad phi_j, phi_i + tau u.grad phi_i)
    """
    mesh = phi.mesh
    points = element_point_set(mesh, np.arange(mesh.n_elements))
    values, grads = physical_basis(mesh, phi.degree, points.elements, points.reference)
    u = velocity.value(t, points.points, points.elements)
    tau = streamline_parameter(np.linalg.norm(u, axis=1), mesh.h_per_element[points.elements], dt, c_sd)
    convective = np.einsum("nad,nd->na", grads, u)
    test = (values + tau[:, None] * convective) * points.weights[:, None]
    dofs = element_dofs(mesh, phi.degree)[points.elements]
    shape = (n_nodes(mesh, phi.degree),) * 2
    mass = scatter_matrix(dofs, dofs, test[:, :, None] * values[:, None, :], shape)
    convection = scatter_matrix(dofs, dofs, test[:, :, None] * convective[:, None, :], shape)
    return mass, convection


def advect(phi: LevelSetField, velocity: VelocitySampler, t_n: float, dt: float,
           targets: Sequence[float], c_sd: float = 1.0,
           slab_index: Optional[int] = None) -> List[LevelSetField]:
    """
    Transport the level set from t_n to each target time

    Every target is reached by one Crank-Nicolson step of length target - t_n
    taken directly from t_n (no chaining), with the velocity sampled at the
    step midpoint and streamline-diffusion test functions. No inflow condition
    is imposed.

    Args:
        phi: Level set at t_n
        velocity: Velocity sampler
        t_n: Slab start
        dt: Slab length (enters the stabilization parameter)
        targets: Sorted times in [t_n, t_n + dt]
        c_sd: Streamline-diffusion constant
        slab_index: Reported in solver errors

    Returns:
        One LevelSetField per target
    """
    targets = [float(t) for t in targets]
    tol = 1e-12 * max(1.0, abs(t_n) + dt)
    if any(b < a for a, b in zip(targets, targets[1:])):
        raise ValueError(f"Advection targets must be sorted, got {targets}")
    if targets and (targets[0] < t_n - tol or targets[-1] > t_n + dt + tol):
        raise ValueError(f"Advection targets {targets} leave the slab [{t_n}, {t_n + dt}]")

    fields = []
    for target in targets:
        step = target - t_n
        if step <= tol:
            fields.append(phi.with_coeffs(phi.coeffs.copy(), target))
            continue
        mass, convection = assemble_transport(phi, velocity, t_n + 0.5 * step, dt, c_sd)
        lhs = (mass + 0.5 * step * convection).tocsc()
        rhs = (mass - 0.5 * step * convection) @ phi.coeffs
        try:
            coeffs = lu_solve((lhs, rhs), context="level-set advection")
        except SingularSystemError as exc:
            where = f"slab {slab_index}" if slab_index is not None else f"t={t_n}"
            raise exc.with_context(f"level-set advection on {where}") from exc
        fields.append(phi.with_coeffs(coeffs, target))
        logger.debug("Advected level set from %.6g to %.6g (%d nodes)", t_n, target, coeffs.size)
    return fields
