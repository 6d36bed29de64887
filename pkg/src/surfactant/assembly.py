import logging
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp

from src.geometry.interface import tangential_projector
from src.geometry.quadrature import face_point_set
from src.geometry.slab import SlabGeometry, TimeSlice
from src.levelset.velocity import VelocitySampler
from src.linalg.sparse_system import SparseSystem, scatter_matrix, scatter_vector
from src.spaces.face_jumps import ghost_penalty_matrix
from src.spaces.scalar_space import ScalarSpace
from src.spaces.spacetime import spacetime_block, time_basis, time_basis_derivative
from src.surfactant.params import SurfactantParams

logger = logging.getLogger(__name__)

SourceFunction = Callable[[float, np.ndarray], np.ndarray]


def interface_mass(space: ScalarSpace, time_slice: TimeSlice) -> sp.csr_matrix:
    """(w, r) on the interface of one time slice"""
    points = time_slice.interface_points
    tab = space.tabulate(points.elements, points.reference)
    local = points.weights[:, None, None] * tab.values[:, :, None] * tab.values[:, None, :]
    return scatter_matrix(tab.dofs, tab.dofs, local, (space.n_dofs, space.n_dofs))


def surface_stiffness(space: ScalarSpace, time_slice: TimeSlice, diffusion: float) -> sp.csr_matrix:
    """D (P grad w, P grad r) on the interface"""
    points = time_slice.interface_points
    tab = space.tabulate(points.elements, points.reference)
    surface = np.einsum("nij,naj->nai", tangential_projector(points.normals), tab.grads)
    local = diffusion * points.weights[:, None, None] * np.einsum("nai,nbi->nab", surface, surface)
    return scatter_matrix(tab.dofs, tab.dofs, local, (space.n_dofs, space.n_dofs))


def transport_matrix(space: ScalarSpace, time_slice: TimeSlice, velocity: np.ndarray) -> sp.csr_matrix:
    """(w, u . grad r) on the interface: rows test r, columns trial w"""
    points = time_slice.interface_points
    tab = space.tabulate(points.elements, points.reference)
    advective = np.einsum("nad,nd->na", tab.grads, velocity)
    local = points.weights[:, None, None] * advective[:, :, None] * tab.values[:, None, :]
    return scatter_matrix(tab.dofs, tab.dofs, local, (space.n_dofs, space.n_dofs))


def surface_divergence(velocity_gradient: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """div_Gamma u = tr(P grad u P) = div u - n . (grad u) n"""
    trace = velocity_gradient[:, 0, 0] + velocity_gradient[:, 1, 1]
    return trace - np.einsum("nl,nlk,nk->n", normals, velocity_gradient, normals)


def normal_gradient_stabilization(space: ScalarSpace, time_slice: TimeSlice,
                                  c_gamma: float) -> sp.csr_matrix:
    """c_Gamma h_K (n . grad w, n . grad r) on the interface"""
    points = time_slice.interface_points
    tab = space.tabulate(points.elements, points.reference)
    normal_derivative = np.einsum("nad,nd->na", tab.grads, points.normals)
    scale = c_gamma * space.mesh.h_per_element[points.elements] * points.weights
    local = scale[:, None, None] * normal_derivative[:, :, None] * normal_derivative[:, None, :]
    return scatter_matrix(tab.dofs, tab.dofs, local, (space.n_dofs, space.n_dofs))


def face_stabilization(space: ScalarSpace, slab: SlabGeometry, c_f: float) -> sp.csr_matrix:
    """c_F h_F (jump n_F . grad w, jump n_F . grad r) over the band's interior faces"""
    faces = face_point_set(slab.mesh, slab.ghost_faces[0])
    return ghost_penalty_matrix(space, faces, 1, c_f * faces.h)


def interface_load(space: ScalarSpace, time_slice: TimeSlice, values: np.ndarray) -> np.ndarray:
    """(g, r) on the interface for g sampled at the interface points"""
    points = time_slice.interface_points
    tab = space.tabulate(points.elements, points.reference)
    return scatter_vector(tab.dofs, (points.weights * values)[:, None] * tab.values, space.n_dofs)


def interface_integral(space: ScalarSpace, time_slice: TimeSlice, coeffs: np.ndarray) -> float:
    """Integral of a band function over the interface of a slice"""
    points = time_slice.interface_points
    if len(points) == 0:
        return 0.0
    return points.integrate(space.evaluate(coeffs, points.elements, points.reference))


class SurfactantAssembler:
    """
    Space-time matrices of the surface transport equation on one slab

    Unknowns are ordered time mode by time mode over the band space
    (index j * n_space + i). Spatial operators are built once per slab time
    and combined with time-mode matrices through Kronecker products.
    """

    def __init__(self, slab: SlabGeometry, params: SurfactantParams,
                 space: Optional[ScalarSpace] = None):
        slab.require_interface()
        self.slab = slab
        self.params = params
        self.space = space or ScalarSpace(slab.mesh, 1, slab.active_elements[0])
        self.k = params.time_degree
        self.n_space = self.space.n_dofs
        self.size = (self.k + 1) * self.n_space
        quadrature = slab.quadrature
        self.thetas = quadrature.normalized()
        self.alphas = quadrature.weights
        self.psi = [time_basis(theta, self.k) for theta in self.thetas]
        self.dpsi = time_basis_derivative(slab.dt, self.k)
        self.masses = [interface_mass(self.space, s) for s in slab.slices]
        self.face_matrix = face_stabilization(self.space, slab, params.c_f1)
        self._stabilized_stiffness = [
            surface_stiffness(self.space, s, params.diffusion)
            + normal_gradient_stabilization(self.space, s, params.c_gamma1)
            + self.face_matrix
            for s in slab.slices
        ]

    def _value_value(self, q: int) -> np.ndarray:
        return np.outer(self.psi[q], self.psi[q])

    def linear_matrix(self, formulation: Optional[str] = None) -> sp.csr_matrix:
        """All terms that do not involve the transport velocity"""
        formulation = formulation or self.params.formulation
        last = len(self.slab.slices) - 1
        if formulation == "conservative":
            matrix = spacetime_block(self._value_value(last), self.masses[last])
            for q, alpha in enumerate(self.alphas):
                test_derivative = np.outer(self.dpsi, self.psi[q])
                matrix = matrix - alpha * spacetime_block(test_derivative, self.masses[q])
                matrix = matrix + alpha * spacetime_block(self._value_value(q), self._stabilized_stiffness[q])
        elif formulation == "nonconservative":
            matrix = spacetime_block(self._value_value(0), self.masses[0])
            for q, alpha in enumerate(self.alphas):
                trial_derivative = np.outer(self.psi[q], self.dpsi)
                matrix = matrix + alpha * spacetime_block(trial_derivative, self.masses[q])
                matrix = matrix + alpha * spacetime_block(self._value_value(q), self._stabilized_stiffness[q])
        else:
            raise ValueError(f"Unknown formulation '{formulation}'")
        return matrix.tocsr()

    def transport(self, velocities: List[np.ndarray]) -> sp.csr_matrix:
        """-sum_q alpha_q (w, u . grad r) for velocities sampled at each slice's interface points"""
        matrix = sp.csr_matrix((self.size, self.size))
        for q, (alpha, u) in enumerate(zip(self.alphas, velocities)):
            spatial = transport_matrix(self.space, self.slab.slices[q], u)
            matrix = matrix - alpha * spacetime_block(self._value_value(q), spatial)
        return matrix

    def nonconservative_transport(self, velocities: List[np.ndarray],
                                  gradients: List[np.ndarray]) -> sp.csr_matrix:
        """sum_q alpha_q [(u . grad w, r) + (w div_Gamma u, r)]"""
        matrix = sp.csr_matrix((self.size, self.size))
        for q, (alpha, u, grad) in enumerate(zip(self.alphas, velocities, gradients)):
            time_slice = self.slab.slices[q]
            spatial = transport_matrix(self.space, time_slice, u).T
            points = time_slice.interface_points
            divergence = surface_divergence(grad, points.normals)
            tab = self.space.tabulate(points.elements, points.reference)
            local = (points.weights * divergence)[:, None, None] * tab.values[:, :, None] * tab.values[:, None, :]
            spatial = spatial + scatter_matrix(tab.dofs, tab.dofs, local, (self.n_space, self.n_space))
            matrix = matrix + alpha * spacetime_block(self._value_value(q), spatial)
        return matrix

    def load(self, source: Optional[SourceFunction], w_minus: np.ndarray) -> np.ndarray:
        """sum_q alpha_q (f, r) at the slice times plus (w_minus, r) on the slab-start interface"""
        rhs = np.zeros(self.size)
        if source is not None:
            for q, alpha in enumerate(self.alphas):
                time_slice = self.slab.slices[q]
                values = source(time_slice.time, time_slice.interface_points.points)
                spatial = interface_load(self.space, time_slice, values)
                rhs += alpha * np.kron(self.psi[q], spatial)
        rhs += np.kron(self.psi[0], self.masses[0] @ w_minus)
        return rhs

    def interface_velocities(self, velocity: VelocitySampler) -> List[np.ndarray]:
        return [velocity.value(s.time, s.interface_points.points, s.interface_points.elements)
                for s in self.slab.slices]

    def interface_velocity_gradients(self, velocity: VelocitySampler) -> List[np.ndarray]:
        return [velocity.gradient(s.time, s.interface_points.points, s.interface_points.elements)
                for s in self.slab.slices]


def stab_sw(space: ScalarSpace, slab: SlabGeometry, q: int, params: SurfactantParams) -> sp.csr_matrix:
    """Surface stabilization at slab time index q: face ghost penalty plus normal-gradient term"""
    return (face_stabilization(space, slab, params.c_f1)
            + normal_gradient_stabilization(space, slab.slices[q], params.c_gamma1))


def _system(assembler: SurfactantAssembler, matrix: sp.spmatrix, rhs: np.ndarray) -> SparseSystem:
    system = SparseSystem(assembler.size, dof_map={"space": assembler.space, "k": assembler.k,
                                                   "slab": assembler.slab})
    system.add_block(0, 0, matrix)
    system.rhs[:] = rhs
    return system


def assemble_conservative(slab: SlabGeometry, velocity: VelocitySampler,
                          source: Optional[SourceFunction], params: SurfactantParams,
                          w_minus: np.ndarray, space: Optional[ScalarSpace] = None) -> SparseSystem:
    """
    Conservative space-time system of one slab

    Args:
        slab: Slab geometry
        velocity: Transport velocity sampler
        source: f(t, points) or None
        params: Surfactant parameters
        w_minus: Band coefficients of the slab-start trace
        space: Band space (built from the slab when omitted)

    Raises:
        GeometryError: If the interface is empty at a slab time
    """
    assembler = SurfactantAssembler(slab, params, space)
    matrix = assembler.linear_matrix("conservative") + assembler.transport(
        assembler.interface_velocities(velocity))
    return _system(assembler, matrix, assembler.load(source, w_minus))


def assemble_nonconservative(slab: SlabGeometry, velocity: VelocitySampler,
                             source: Optional[SourceFunction], params: SurfactantParams,
                             w_minus: np.ndarray, space: Optional[ScalarSpace] = None) -> SparseSystem:
    """Non-conservative variant; the velocity sampler must provide gradients"""
    assembler = SurfactantAssembler(slab, params, space)
    matrix = assembler.linear_matrix("nonconservative") + assembler.nonconservative_transport(
        assembler.interface_velocities(velocity), assembler.interface_velocity_gradients(velocity))
    return _system(assembler, matrix, assembler.load(source, w_minus))


def slab_source_integral(slab: SlabGeometry, source: Optional[SourceFunction]) -> float:
    """Simpson approximation of the time integral of int_Gamma f over the slab"""
    if source is None:
        return 0.0
    total = 0.0
    for alpha, time_slice in zip(slab.quadrature.weights, slab.slices):
        points = time_slice.interface_points
        total += alpha * points.integrate(source(time_slice.time, points.points))
    return total
