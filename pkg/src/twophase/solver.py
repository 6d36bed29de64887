import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.geometry.quadrature import simpson_rule
from src.geometry.slab import SlabGeometry, TimeSlice, build_slab_geometry, build_time_slice
from src.levelset.backends import AdvectedLevelSet, LevelSetBackend
from src.levelset.cases import AnalyticCase
from src.levelset.level_set import LevelSetField, init_from_function
from src.levelset.velocity import NodalVelocity
from src.mesh.background_mesh import BackgroundMesh
from src.spaces.lagrange import lagrange_nodes
from src.spaces.scalar_space import ScalarSpace
from src.surfactant.assembly import interface_integral
from src.surfactant.params import SurfactantParams
from src.twophase.benchmarks import benchmark_quantities
from src.twophase.eos import EquationOfState
from src.twophase.forms import PHASES, W_KEY, p_key, u_key
from src.twophase.layout import FlowLayout
from src.twophase.newton import CoupledAssembler, newton_solve
from src.twophase.params import (
    CoupledParams, FluidParams, NewtonParams, NitscheParams, StabParams, WallCondition, default_walls
)
from src.twophase.state import FlowState, extend_traces, restricted_nodal_velocity
from src.utils.errors import CutFlowError

logger = logging.getLogger(__name__)


@dataclass
class MarchState:
    """Hand-off data between slabs: nodal traces at the current time level"""
    time: float
    phi: LevelSetField = field(repr=False)
    velocity: Dict[int, np.ndarray] = field(repr=False)    # phase -> (n_p2_nodes, 2), NaN where undefined
    pressure: Dict[int, np.ndarray] = field(repr=False)    # phase -> (n_vertices,)
    surfactant: Optional[np.ndarray] = field(default=None, repr=False)  # (n_vertices,)
    last_slice: Optional[TimeSlice] = field(default=None, repr=False)


@dataclass
class TwoPhaseResult:
    """Per-step records and the last slab's solution"""
    records: List[Dict[str, float]] = field(default_factory=list)
    final: Optional[FlowState] = None
    march: Optional[MarchState] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([record[name] for record in self.records], dtype=float)


class TwoPhaseSolver:
    """
    Slab-by-slab solver of incompressible two-phase flow with insoluble surfactant

    Each slab advects the P2 level set with the frozen velocity trace of the
    previous slab, optionally refreshed by ``CoupledParams.geometry_updates``,
    builds the cut geometry and solves the coupled velocity/pressure/surfactant
    system with Newton's method.

    Args:
        mesh: Background mesh
        case: Initial level set, surfactant and velocity
        fluid: Fluid parameters
        eos: Equation of state
        walls: Wall conditions by side (no-slip with zero data by default)
        nitsche: Nitsche parameters
        stab: Ghost-penalty constants
        newton: Newton parameters
        coupled: Time degree, surfactant switch and level-set streamline constant
        surfactant: Surface transport parameters
        backend: Level-set backend (advected by default)
        show_progress: Display a progress bar over slabs
        on_step: Callback (slab index, FlowState, record) after each slab
    """

    def __init__(self, mesh: BackgroundMesh, case: AnalyticCase, fluid: FluidParams,
                 eos: EquationOfState, walls: Optional[Dict[str, WallCondition]] = None,
                 nitsche: Optional[NitscheParams] = None, stab: Optional[StabParams] = None,
                 newton: Optional[NewtonParams] = None, coupled: Optional[CoupledParams] = None,
                 surfactant: Optional[SurfactantParams] = None,
                 backend: Optional[LevelSetBackend] = None, show_progress: bool = False,
                 on_step: Optional[Callable[[int, FlowState, Dict[str, float]], None]] = None):
        self.mesh = mesh
        self.case = case
        self.fluid = fluid
        self.eos = eos
        self.walls = walls or default_walls()
        self.nitsche = nitsche or NitscheParams()
        self.stab = stab or StabParams()
        self.newton = newton or NewtonParams()
        self.coupled = coupled or CoupledParams()
        self.surfactant = surfactant or SurfactantParams()
        self.backend = backend or AdvectedLevelSet(self.coupled.c_sd)
        self.show_progress = show_progress
        self.on_step = on_step
        self.initial_area: Optional[float] = None
        self.initial_mass: Optional[float] = None

    def initial_state(self, t0: float = 0.0) -> MarchState:
        phi = init_from_function(self.mesh, 2, self.case.phi0, t0)
        nodes = lagrange_nodes(self.mesh, 2)
        if self.case.initial_velocity is not None:
            u0 = np.asarray(self.case.initial_velocity(nodes), dtype=float).reshape(len(nodes), 2)
        else:
            u0 = np.zeros((len(nodes), 2))
        surfactant = None
        if self.coupled.with_surfactant:
            surfactant = np.asarray(self.case.w0(self.mesh.vertices), dtype=float)
        zeros = np.zeros(self.mesh.n_vertices)
        return MarchState(t0, phi, {1: u0.copy(), 2: u0.copy()}, {1: zeros, 2: zeros.copy()},
                          surfactant, build_time_slice(phi))

    def _layout(self, slab: SlabGeometry) -> FlowLayout:
        velocity = tuple(ScalarSpace(self.mesh, 2, slab.active_elements[i]) for i in PHASES)
        pressure = tuple(ScalarSpace(self.mesh, 1, slab.active_elements[i]) for i in PHASES)
        surfactant = ScalarSpace(self.mesh, 1, slab.active_elements[0]) if self.coupled.with_surfactant else None
        return FlowLayout(velocity, pressure, surfactant, self.coupled.time_degree)

    def step(self, march: MarchState, t_next: float, index: int) -> FlowState:
        """
        Solve one slab [march.time, t_next]

        The level set is first advected with the restricted velocity trace
        u^-(t_n), frozen over the slab, so the interface lags the flow by
        O(dt); a slab started from rest does not move its interface. Each of
        ``coupled.geometry_updates`` passes re-advects phi_n with the current
        solution's mid-slab velocity and solves the slab again.
        """
        quadrature = simpson_rule(march.time, t_next - march.time)
        advecting = NodalVelocity(self.mesh, 2, restricted_nodal_velocity(march.velocity, march.phi))
        state, fields = self._solve(march, quadrature, advecting, index)
        for update in range(self.coupled.geometry_updates):
            middle = quadrature.points[1]
            advecting = NodalVelocity(self.mesh, 2, restricted_nodal_velocity(state.velocity_at(middle),
                                                                              fields[1]))
            state, fields = self._solve(march, quadrature, advecting, index)
            logger.debug("Slab %d geometry update %d: newton=%d", index, update + 1, state.iterations)
        march.time = float(t_next)
        march.phi = fields[-1]
        march.velocity = state.velocity_traces()
        march.pressure = state.pressure_traces()
        march.surfactant = state.surfactant_trace()
        march.last_slice = state.slab.end
        return state

    def _solve(self, march: MarchState, quadrature, advecting: NodalVelocity,
               index: int) -> Tuple[FlowState, List[LevelSetField]]:
        fields = self.backend.fields_for_slab(march.phi, list(quadrature.points), quadrature.dt,
                                              advecting, index)
        slab = build_slab_geometry(fields, quadrature, index, start=march.last_slice)
        layout = self._layout(slab)
        velocity = extend_traces(march.velocity)
        u_minus = {phase: layout.velocity[phase - 1].from_global(velocity[phase]) for phase in PHASES}
        w_minus = None
        if layout.with_surfactant:
            w_minus = layout.surfactant.from_global(march.surfactant)
        assembler = CoupledAssembler(slab, layout, self.fluid, self.eos, self.walls, self.nitsche,
                                     self.stab, self.surfactant, u_minus, w_minus)
        x0 = self._initial_guess(layout, u_minus, extend_traces(march.pressure), w_minus)
        x, history, iterations = newton_solve(assembler, x0, self.newton, index)
        return FlowState.from_solution(x, layout, slab, iterations, history), fields

    def _initial_guess(self, layout: FlowLayout, u_minus: Dict[int, np.ndarray],
                       pressure: Dict[int, np.ndarray], w_minus: Optional[np.ndarray]) -> np.ndarray:
        # previous traces, constant in time
        blocks = {}
        for phase in PHASES:
            for component in (0, 1):
                mode0 = np.zeros((layout.modes, layout.velocity[phase - 1].n_dofs))
                mode0[0] = u_minus[phase][:, component]
                blocks[u_key(phase, component)] = mode0
            mode0 = np.zeros((layout.modes, layout.pressure[phase - 1].n_dofs))
            mode0[0] = layout.pressure[phase - 1].from_global(pressure[phase])
            blocks[p_key(phase)] = mode0
        if w_minus is not None:
            mode0 = np.zeros((layout.modes, layout.surfactant.n_dofs))
            mode0[0] = w_minus
            blocks[W_KEY] = mode0
        return layout.pack(blocks)

    def record(self, state: Optional[FlowState], time_slice: TimeSlice,
               surfactant: Optional[np.ndarray]) -> Dict[str, float]:
        """Benchmark quantities, surfactant mass and its conservation error at a slice"""
        record = benchmark_quantities(state, time_slice)
        if self.initial_area is None:
            self.initial_area = record["area"]
        record["area_error"] = abs(record["area"] - self.initial_area) / self.initial_area
        mass = float("nan")
        if surfactant is not None:
            mass = interface_integral(ScalarSpace.full(self.mesh, 1), time_slice, surfactant)
            if self.initial_mass is None:
                self.initial_mass = mass
        record["mass"] = mass
        record["conservation_error"] = abs(mass - self.initial_mass) if self.initial_mass is not None else float("nan")
        record["newton_iterations"] = state.iterations if state is not None else 0
        return record

    def run(self, time_grid: Sequence[float]) -> TwoPhaseResult:
        """
        March over the slabs of a time grid

        Args:
            time_grid: Increasing times t_0 < t_1 < ... < t_N

        Returns:
            TwoPhaseResult with one record per time level (t_0 included)
        """
        grid = np.asarray(time_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("Time grid must be increasing with at least two entries")
        self.initial_area = self.initial_mass = None
        march = self.initial_state(float(grid[0]))
        result = TwoPhaseResult(march=march)
        result.records.append(self.record(None, march.last_slice, march.surfactant))
        logger.info("Two-phase run '%s': %d slabs on [%g, %g], k=%d, surfactant=%s, convection=%s",
                    self.case.name, grid.size - 1, grid[0], grid[-1], self.coupled.time_degree,
                    self.coupled.with_surfactant, self.fluid.convection)
        slabs = tqdm(range(grid.size - 1), desc="slabs", disable=not self.show_progress)
        for n in slabs:
            try:
                state = self.step(march, grid[n + 1], n)
                record = self.record(state, march.last_slice, march.surfactant)
            except CutFlowError as exc:
                logger.error("Two-phase run failed on slab %d (t=%.6g): %s", n, grid[n], exc)
                raise
            result.records.append(record)
            result.final = state
            logger.info("Slab %d: t=%.6g y_c=%.6f c=%.6f u_c=%.6f newton=%d e_c=%.3e",
                        n, record["t"], record["y_c"], record["circularity"], record["rise_velocity"],
                        record["newton_iterations"], record["conservation_error"])
            if self.on_step is not None:
                self.on_step(n, state, record)
        return result
