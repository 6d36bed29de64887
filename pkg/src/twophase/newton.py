import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.geometry.quadrature import PointSet, boundary_point_set
from src.geometry.slab import SlabGeometry
from src.linalg.solver import lu_solve
from src.linalg.sparse_system import SparseSystem, scatter_vector
from src.spaces.spacetime import spacetime_block, time_basis, time_basis_derivative
from src.surfactant.assembly import SurfactantAssembler
from src.surfactant.params import SurfactantParams
from src.twophase.eos import EquationOfState
from src.twophase.forms import (
    PHASES, COMPONENTS, W_KEY, MatrixBlocks, SliceBasis, VectorBlocks, bulk_mass, form_a, form_b,
    form_c, form_c_jacobian, form_fGamma, form_fGamma_jacobian, form_l, p_key,
    surfactant_transport, surfactant_transport_jacobian, u_key
)
from src.twophase.layout import FlowLayout
from src.twophase.params import (
    FluidParams, NewtonParams, NitscheParams, StabParams, WallCondition
)
from src.twophase.stabilization import stab_sp, stab_su
from src.utils.errors import ConvergenceError, SingularSystemError

logger = logging.getLogger(__name__)


def place_blocks(system: SparseSystem, layout: FlowLayout, blocks: MatrixBlocks,
                 time_matrix: np.ndarray, scale: float = 1.0) -> None:
    """Add kron(time_matrix, S) for every spatial block S at its layout position"""
    for (row_key, col_key), spatial in blocks.items():
        system.add_block(layout.offset(row_key), layout.offset(col_key),
                         spacetime_block(time_matrix, spatial), scale)


def place_vectors(rhs: np.ndarray, layout: FlowLayout, blocks: VectorBlocks,
                  time_vector: np.ndarray, scale: float = 1.0) -> None:
    for key, spatial in blocks.items():
        start = layout.offset(key)
        rhs[start:start + layout.sizes[key]] += scale * np.kron(time_vector, spatial)


def pressure_gauge(system: SparseSystem, layout: FlowLayout, slab: SlabGeometry,
                   fluid: FluidParams) -> None:
    """
    Append the pressure constraints sum_i (mu_i^-1 p_i, 1)_{Omega_i(t_{n+1})} = 0

    One multiplier per time mode, placed symmetrically in the last rows and
    columns of the system.
    """
    end = slab.end
    for mode in range(layout.modes):
        row = layout.offset(("gauge",)) + mode
        for phase in PHASES:
            points = end.bulk_points(phase)
            if len(points) == 0:
                continue
            key = p_key(phase)
            space = layout.space(key)
            tab = space.tabulate(points.elements, points.reference)
            weights = scatter_vector(tab.dofs, (points.weights / fluid.mu(phase))[:, None] * tab.values,
                                     space.n_dofs)
            columns = layout.offset(key) + mode * space.n_dofs + np.flatnonzero(weights)
            values = weights[weights != 0.0]
            system.add_entries(np.full(columns.size, row), columns, values)
            system.add_entries(columns, np.full(columns.size, row), values)


class CoupledAssembler:
    """
    Space-time residual and Jacobian of the coupled flow/surfactant slab problem

    The terms that are linear in the unknowns are assembled once per slab;
    convection, surface tension and surfactant transport are re-evaluated at
    every Newton iterate.

    Args:
        slab: Slab geometry
        layout: DOF layout (spaces of the slab)
        fluid: Fluid parameters
        eos: Equation of state
        walls: Wall conditions by side
        nitsche: Nitsche parameters
        stab: Ghost-penalty constants
        surfactant: Surface transport parameters (ignored without a w block)
        u_minus: Phase -> (n_space, 2) velocity trace at t_n on the slab spaces
        w_minus: Band coefficients of the surfactant trace at t_n
    """

    def __init__(self, slab: SlabGeometry, layout: FlowLayout, fluid: FluidParams,
                 eos: EquationOfState, walls: Dict[str, WallCondition], nitsche: NitscheParams,
                 stab: StabParams, surfactant: Optional[SurfactantParams],
                 u_minus: Dict[int, np.ndarray], w_minus: Optional[np.ndarray] = None):
        slab.require_interface()
        self.slab = slab
        self.layout = layout
        self.fluid = fluid
        self.eos = eos
        self.walls = walls
        self.nitsche = nitsche
        self.stab = stab
        k = layout.k
        quadrature = slab.quadrature
        self.alphas = quadrature.weights
        self.psi = [time_basis(theta, k) for theta in quadrature.normalized()]
        self.dpsi = time_basis_derivative(slab.dt, k)
        boundary: PointSet = boundary_point_set(slab.mesh)
        self.bases = [SliceBasis(s, layout, boundary) for s in slab.slices]
        self.surfactant_assembler = None
        if layout.with_surfactant:
            if surfactant is None:
                raise ValueError("A layout with a surfactant block needs surfactant parameters")
            params = surfactant.model_copy(update={"time_degree": k, "formulation": "conservative"})
            self.surfactant_assembler = SurfactantAssembler(slab, params, layout.surfactant)
        self.linear = self._assemble_linear()
        self.load = self._assemble_load(u_minus, w_minus)

    @property
    def is_linear(self) -> bool:
        """Without convection and surfactant coupling one Newton step is exact"""
        return not self.fluid.convection and not self.layout.with_surfactant

    def _value_value(self, q: int) -> np.ndarray:
        return np.outer(self.psi[q], self.psi[q])

    def form_B(self, system: Optional[SparseSystem] = None) -> SparseSystem:
        """
        Space-time momentum/continuity block: rho d_t u, the start-of-slab mass,
        a(u, v) and the b couplings -b(v, p) + b(u, q), integrated over the slab

        Args:
            system: System to add into (a new one when omitted)
        """
        layout = self.layout
        if system is None:
            system = SparseSystem(layout.n, dof_map={"layout": layout, "slab": self.slab})
        place_blocks(system, layout, bulk_mass(self.bases[0], self.fluid), self._value_value(0))
        for q, (alpha, basis) in enumerate(zip(self.alphas, self.bases)):
            value_value = self._value_value(q)
            place_blocks(system, layout, bulk_mass(basis, self.fluid),
                         np.outer(self.psi[q], self.dpsi), alpha)
            place_blocks(system, layout, form_a(basis, self.fluid, self.nitsche, self.walls),
                         value_value, alpha)
            divergence = form_b(basis, self.fluid, self.nitsche)
            place_blocks(system, layout, divergence, value_value, alpha)
            place_blocks(system, layout, {(c, r): -b.T.tocsr() for (r, c), b in divergence.items()},
                         value_value, alpha)
        return system

    def _assemble_linear(self) -> sp.csr_matrix:
        layout = self.layout
        system = self.form_B()
        integrated = sum(alpha * self._value_value(q) for q, alpha in enumerate(self.alphas))
        place_blocks(system, layout, stab_su(self.slab, layout, self.fluid, self.stab), integrated)
        place_blocks(system, layout, stab_sp(self.slab, layout, self.fluid, self.stab), integrated)
        if self.surfactant_assembler is not None:
            system.add_block(layout.offset(W_KEY), layout.offset(W_KEY),
                             self.surfactant_assembler.linear_matrix("conservative"))
        pressure_gauge(system, layout, self.slab, self.fluid)
        return system.finalize()

    def _assemble_load(self, u_minus: Dict[int, np.ndarray], w_minus: Optional[np.ndarray]) -> np.ndarray:
        layout = self.layout
        rhs = np.zeros(layout.n)
        for alpha, psi, basis in zip(self.alphas, self.psi, self.bases):
            place_vectors(rhs, layout, form_l(basis, self.fluid, self.nitsche, self.walls), psi, alpha)
        start_mass = bulk_mass(self.bases[0], self.fluid)
        trace = {}
        for phase in PHASES:
            for component in COMPONENTS:
                key = u_key(phase, component)
                if (key, key) in start_mass:
                    trace[key] = start_mass[(key, key)] @ u_minus[phase][:, component]
        place_vectors(rhs, layout, trace, self.psi[0])
        if self.surfactant_assembler is not None:
            if w_minus is None:
                raise ValueError("Surfactant trace w_minus is required")
            start = layout.offset(W_KEY)
            rhs[start:start + layout.sizes[W_KEY]] += self.surfactant_assembler.load(None, w_minus)
        return rhs

    def _fields_at(self, x: np.ndarray, q: int) -> Tuple[Dict[int, np.ndarray], Optional[np.ndarray]]:
        velocity = {phase: np.tensordot(self.psi[q], self.layout.velocity_coeffs(x, phase), axes=1)
                    for phase in PHASES}
        w = None
        if self.layout.with_surfactant:
            w = self.psi[q] @ self.layout.block(x, W_KEY)
        return velocity, w

    def nonlinear_residual(self, x: np.ndarray) -> np.ndarray:
        layout = self.layout
        residual = np.zeros(layout.n)
        for q, (alpha, psi, basis) in enumerate(zip(self.alphas, self.psi, self.bases)):
            velocity, w = self._fields_at(x, q)
            if self.fluid.convection:
                place_vectors(residual, layout, form_c(basis, self.fluid, velocity), psi, alpha)
            place_vectors(residual, layout, form_fGamma(basis, self.fluid, self.nitsche, self.eos, w),
                          psi, alpha)
            if w is not None:
                place_vectors(residual, layout,
                              surfactant_transport(basis, self.fluid, self.nitsche, velocity, w), psi, alpha)
        return residual

    def nonlinear_jacobian(self, x: np.ndarray) -> SparseSystem:
        layout = self.layout
        system = SparseSystem(layout.n, dof_map={"layout": layout, "slab": self.slab})
        for q, (alpha, basis) in enumerate(zip(self.alphas, self.bases)):
            velocity, w = self._fields_at(x, q)
            value_value = self._value_value(q)
            if self.fluid.convection:
                place_blocks(system, layout, form_c_jacobian(basis, self.fluid, velocity), value_value, alpha)
            if w is not None:
                place_blocks(system, layout,
                             form_fGamma_jacobian(basis, self.fluid, self.nitsche, self.eos, w),
                             value_value, alpha)
                place_blocks(system, layout,
                             surfactant_transport_jacobian(basis, self.fluid, self.nitsche, velocity, w),
                             value_value, alpha)
        return system

    def assemble_F(self, x: np.ndarray) -> np.ndarray:
        """F(x) = K x - L + N(x)"""
        self.layout.check(x)
        return self.linear @ x - self.load + self.nonlinear_residual(x)

    def assemble_DF(self, x: np.ndarray) -> SparseSystem:
        """Jacobian of F at x; the system's right-hand side holds F(x)"""
        self.layout.check(x)
        system = self.nonlinear_jacobian(x)
        system.add_block(0, 0, self.linear)
        system.rhs[:] = self.assemble_F(x)
        return system


def increment_norm(layout: FlowLayout, delta: np.ndarray, newton: NewtonParams,
                   eos: EquationOfState) -> float:
    """Root-sum-square of the scaled RMS increments of velocity, pressure and surfactant"""
    def rms(keys) -> float:
        values = np.concatenate([layout.block(delta, key).ravel() for key in keys])
        return float(np.sqrt(np.mean(values ** 2))) if values.size else 0.0

    parts = [
        rms([u_key(p, c) for p in PHASES for c in COMPONENTS]) / newton.velocity_scale,
        rms([p_key(p) for p in PHASES]) / (eos.sigma0 / newton.length_scale),
    ]
    if layout.with_surfactant:
        parts.append(rms([W_KEY]) / newton.surfactant_scale)
    return float(np.sqrt(np.sum(np.square(parts))))


def newton_solve(assembler: CoupledAssembler, x0: np.ndarray, newton: NewtonParams,
                 slab_index: Optional[int] = None) -> Tuple[np.ndarray, List[float], int]:
    """
    Newton iteration x <- x - DF(x)^-1 F(x) on one slab

    Stops when the scaled increment norm is below ``newton.tolerance`` or the
    residual has dropped by ``newton.residual_drop``; linear problems stop
    after one step.

    Returns:
        Solution, residual-norm history (initial residual first) and the
        number of iterations

    Raises:
        ConvergenceError: If max_iter iterations do not converge
        SingularSystemError: If a Jacobian factorization fails
    """
    x = np.array(x0, dtype=float)
    residual = assembler.assemble_F(x)
    history = [float(np.linalg.norm(residual))]
    if history[0] == 0.0:
        return x, history, 0
    for iteration in range(1, newton.max_iter + 1):
        jacobian = assembler.assemble_DF(x)
        try:
            delta = lu_solve(jacobian, context=f"Newton iteration {iteration}")
        except SingularSystemError as exc:
            raise exc.with_context(f"flow slab {slab_index}") from exc
        x -= delta
        residual = assembler.assemble_F(x)
        history.append(float(np.linalg.norm(residual)))
        step = increment_norm(assembler.layout, delta, newton, assembler.eos)
        logger.debug("Slab %s Newton %d: |F|=%.3e |delta|=%.3e", slab_index, iteration, history[-1], step)
        if (assembler.is_linear or step <= newton.tolerance
                or history[-1] <= newton.residual_drop * history[0]):
            return x, history, iteration
    logger.error("Newton did not converge on slab %s: %s", slab_index, history)
    raise ConvergenceError(history, slab_index)
