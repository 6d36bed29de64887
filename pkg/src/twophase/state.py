from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.geometry.slab import SlabGeometry, TimeSlice
from src.levelset.level_set import LevelSetField
from src.spaces.lagrange import n_nodes
from src.spaces.spacetime import SpaceTimeField, trace_at
from src.twophase.forms import PHASES, W_KEY, p_key
from src.twophase.layout import FlowLayout


@dataclass(eq=False)
class FlowState:
    """
    Converged solution of one slab

    ``velocity`` and ``pressure`` hold one space-time field per phase on that
    phase's active mesh; the restricted fields pick phase i on Omega_i(t).
    """
    slab: SlabGeometry = field(repr=False)
    layout: FlowLayout = field(repr=False)
    velocity: Dict[int, SpaceTimeField] = field(repr=False)
    pressure: Dict[int, SpaceTimeField] = field(repr=False)
    surfactant: Optional[SpaceTimeField] = field(default=None, repr=False)
    iterations: int = 0
    residual_history: List[float] = field(default_factory=list)

    @classmethod
    def from_solution(cls, x: np.ndarray, layout: FlowLayout, slab: SlabGeometry,
                      iterations: int = 0, residual_history: Optional[List[float]] = None) -> "FlowState":
        layout.check(x)
        velocity = {phase: SpaceTimeField(layout.velocity[phase - 1], layout.velocity_coeffs(x, phase),
                                          slab.t_n, slab.dt) for phase in PHASES}
        pressure = {phase: SpaceTimeField(layout.pressure[phase - 1], layout.block(x, p_key(phase)),
                                          slab.t_n, slab.dt) for phase in PHASES}
        surfactant = None
        if layout.with_surfactant:
            surfactant = SpaceTimeField(layout.surfactant, layout.block(x, W_KEY), slab.t_n, slab.dt)
        return cls(slab, layout, velocity, pressure, surfactant, iterations, list(residual_history or []))

    @property
    def t_end(self) -> float:
        return self.slab.t_n + self.slab.dt

    def slice_at(self, t: float) -> TimeSlice:
        for time_slice in self.slab.slices:
            if abs(time_slice.time - t) <= 1e-12 * max(1.0, abs(t)):
                return time_slice
        raise ValueError(f"Restricted fields are available at the slab times {list(self.slab.times)}, got {t}")

    def _restricted(self, fields: Dict[int, SpaceTimeField], t: float,
                    elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        phase = self.slice_at(t).phase_value(elements, reference)
        out = None
        for i in PHASES:
            pick = phase == i
            if not pick.any():
                continue
            values = fields[i].evaluate(t, elements[pick], reference[pick])
            if out is None:
                out = np.zeros((len(elements),) + values.shape[1:])
            out[pick] = values
        return out if out is not None else np.zeros(len(elements))

    def restricted_velocity(self, t: float, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        """u~_h at points: the phase is taken from the sign of the level set at slab time t"""
        return self._restricted(self.velocity, t, elements, reference)

    def restricted_pressure(self, t: float, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        return self._restricted(self.pressure, t, elements, reference)

    def velocity_traces(self) -> Dict[int, np.ndarray]:
        """End-of-slab velocity of each phase on all P2 nodes; NaN off the phase's active mesh"""
        return {phase: self.velocity[phase].space.to_global(trace_at(self.velocity[phase], self.t_end))
                for phase in PHASES}

    def velocity_at(self, t: float) -> Dict[int, np.ndarray]:
        """Velocity of each phase at any slab time on all P2 nodes; NaN off the phase's active mesh"""
        return {phase: self.velocity[phase].space.to_global(self.velocity[phase].spatial_coeffs(t))
                for phase in PHASES}

    def pressure_traces(self) -> Dict[int, np.ndarray]:
        return {phase: self.pressure[phase].space.to_global(trace_at(self.pressure[phase], self.t_end))
                for phase in PHASES}

    def surfactant_trace(self) -> Optional[np.ndarray]:
        if self.surfactant is None:
            return None
        return self.surfactant.space.to_global(trace_at(self.surfactant, self.t_end))


def extend_traces(traces: Dict[int, np.ndarray]) -> Dict[int, np.ndarray]:
    """
    Fill each phase's undefined nodal values from the other phase, then with zero

    Used when the next slab's active meshes reach nodes the previous ones did
    not cover.
    """
    extended = {}
    for phase in PHASES:
        other = traces[3 - phase]
        values = np.where(np.isfinite(traces[phase]), traces[phase], other)
        extended[phase] = np.where(np.isfinite(values), values, 0.0)
    return extended


def restricted_nodal_velocity(traces: Dict[int, np.ndarray], phi: LevelSetField) -> np.ndarray:
    """
    Single-valued P2 nodal velocity: phase 1 where phi > 0 and phase 1 is defined, else phase 2

    Args:
        traces: Phase -> (n_p2_nodes, 2) nodal values, NaN where undefined
        phi: P2 level set at the same time

    Returns:
        (n_p2_nodes, 2) values; nodes without any phase value get zero
    """
    if phi.degree != 2 or len(phi.coeffs) != n_nodes(phi.mesh, 2):
        raise ValueError("Restricted nodal velocity needs a P2 level set")
    first, second = traces[1], traces[2]
    defined1 = np.isfinite(first).all(axis=1)
    defined2 = np.isfinite(second).all(axis=1)
    use_first = defined1 & ((phi.coeffs > 0.0) | ~defined2)
    out = np.where(use_first[:, None], first, second)
    return np.where(np.isfinite(out), out, 0.0)
