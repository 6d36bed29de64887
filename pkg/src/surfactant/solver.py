import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.geometry.quadrature import simpson_rule
from src.geometry.slab import SlabGeometry, TimeSlice, build_slab_geometry, build_time_slice
from src.levelset.backends import LevelSetBackend
from src.levelset.level_set import LevelSetField
from src.levelset.velocity import VelocitySampler
from src.linalg.solver import lu_solve
from src.linalg.sparse_system import SparseSystem
from src.spaces.scalar_space import ScalarSpace
from src.spaces.spacetime import SpaceTimeField, trace_at
from src.surfactant.assembly import (
    SourceFunction, assemble_conservative, assemble_nonconservative, interface_integral,
    slab_source_integral
)
from src.surfactant.metrics import conservation_error
from src.surfactant.params import SurfactantParams
from src.utils.errors import CutFlowError, SingularSystemError

logger = logging.getLogger(__name__)


@dataclass
class SurfactantState:
    """
    Surfactant solution history

    ``w_minus`` holds the latest trace on all mesh vertices (NaN outside the
    band it was computed on); ``masses[i]`` is M_h at ``times[i]``.
    """
    w_minus: np.ndarray
    w: Optional[SpaceTimeField] = None
    times: List[float] = field(default_factory=list)
    masses: List[float] = field(default_factory=list)
    source_integrals: List[float] = field(default_factory=list)
    last_slice: Optional[TimeSlice] = None

    @property
    def total_mass_history(self):
        return list(zip(self.times, self.masses))

    def conservation_errors(self) -> np.ndarray:
        return conservation_error(self)


def solve_slab(system: SparseSystem, slab_index: Optional[int] = None) -> SpaceTimeField:
    """Solve an assembled slab system and wrap the result as a space-time field"""
    space: ScalarSpace = system.dof_map["space"]
    slab: SlabGeometry = system.dof_map["slab"]
    k: int = system.dof_map["k"]
    try:
        x = lu_solve(system, context=f"surfactant slab {slab_index}")
    except SingularSystemError as exc:
        raise exc.with_context(f"surfactant slab {slab_index}") from exc
    return SpaceTimeField(space, x.reshape(k + 1, space.n_dofs), slab.t_n, slab.dt)


class SurfactantSolver:
    """
    Slab-by-slab solver of surface transport with a prescribed velocity

    Args:
        backend: Level-set backend providing phi at the slab times
        velocity: Transport velocity
        source: Right-hand side f(t, x) or None
        params: Surfactant parameters
        show_progress: Display a progress bar over slabs
    """

    def __init__(self, backend: LevelSetBackend, velocity: VelocitySampler,
                 source: Optional[SourceFunction], params: SurfactantParams,
                 show_progress: bool = False,
                 on_slab: Optional[Callable[[int, "SurfactantState", SlabGeometry], None]] = None):
        self.backend = backend
        self.velocity = velocity
        self.source = source
        self.params = params
        self.show_progress = show_progress
        self.on_slab = on_slab

    def assemble(self, slab: SlabGeometry, w_minus: np.ndarray) -> SparseSystem:
        space = ScalarSpace(slab.mesh, 1, slab.active_elements[0])
        band_values = space.from_global(w_minus)
        if self.params.formulation == "conservative":
            return assemble_conservative(slab, self.velocity, self.source, self.params, band_values, space)
        return assemble_nonconservative(slab, self.velocity, self.source, self.params, band_values, space)

    def initial_state(self, phi0: LevelSetField, w0: Callable[[np.ndarray], np.ndarray]) -> SurfactantState:
        start = build_time_slice(phi0)
        w_minus = np.asarray(w0(phi0.mesh.vertices), dtype=float)
        full = ScalarSpace.full(phi0.mesh, 1)
        mass = interface_integral(full, start, w_minus)
        return SurfactantState(w_minus=w_minus, times=[phi0.time], masses=[mass], last_slice=start)

    def run(self, time_grid: Sequence[float], phi0: LevelSetField,
            w0: Callable[[np.ndarray], np.ndarray]) -> SurfactantState:
        """
        March over the slabs of a time grid

        Args:
            time_grid: Increasing times t_0 < t_1 < ... < t_N
            phi0: Level set at t_0
            w0: Initial surfactant concentration (evaluated at mesh vertices)

        Returns:
            SurfactantState with the last slab's solution and the mass history
        """
        grid = np.asarray(time_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("Time grid must be increasing with at least two entries")
        state = self.initial_state(phi0, w0)
        phi = phi0
        logger.info("Surfactant run: %d slabs on [%g, %g], %s formulation, k=%d",
                    grid.size - 1, grid[0], grid[-1], self.params.formulation, self.params.time_degree)
        slabs = tqdm(range(grid.size - 1), desc="slabs", disable=not self.show_progress)
        for n in slabs:
            t_n, t_next = grid[n], grid[n + 1]
            quadrature = simpson_rule(t_n, t_next - t_n)
            try:
                fields = self.backend.fields_for_slab(phi, list(quadrature.points), quadrature.dt,
                                                      self.velocity, n)
                slab = build_slab_geometry(fields, quadrature, n, start=state.last_slice)
                system = self.assemble(slab, state.w_minus)
                w = solve_slab(system, n)
            except CutFlowError as exc:
                logger.error("Surfactant run failed on slab %d (t=%.6g): %s", n, t_n, exc)
                raise
            end = trace_at(w, t_next)
            state.w = w
            state.w_minus = w.space.to_global(end)
            state.times.append(float(t_next))
            state.masses.append(interface_integral(w.space, slab.end, end))
            state.source_integrals.append(slab_source_integral(slab, self.source))
            state.last_slice = slab.end
            phi = fields[-1]
            logger.debug("Slab %d: t=%.6g band=%d dofs=%d mass=%.15g e_c=%.3e", n, t_next,
                         slab.active_elements[0].size, system.n, state.masses[-1],
                         state.conservation_errors()[-1])
            if self.on_slab is not None:
                self.on_slab(n, state, slab)
        logger.info("Surfactant run finished: M_h(T)=%.15g, max e_c=%.3e",
                    state.masses[-1], state.conservation_errors().max())
        return state
