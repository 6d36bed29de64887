import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.geometry.classification import ElementLabel
from src.geometry.cut_cells import CutDecomposition, decompose_elements
from src.geometry.interface import InterfaceMesh, reconstruct_interface
from src.geometry.quadrature import (
    PointSet, TimeQuadrature, element_point_set, segment_rule, triangle_rule
)
from src.levelset.level_set import LevelSetField, project_to_p1
from src.mesh.background_mesh import BackgroundMesh
from src.utils.errors import GeometryError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TimeSlice:
    """Interface, cut decomposition and quadrature point sets at one time instance"""
    mesh: BackgroundMesh = field(repr=False)
    time: float
    phi: LevelSetField = field(repr=False)
    interface: InterfaceMesh = field(repr=False)
    decomposition: CutDecomposition = field(repr=False)

    @property
    def labels(self) -> np.ndarray:
        return self.interface.labels

    @property
    def cut_elements(self) -> np.ndarray:
        return self.interface.elements

    def bulk_points(self, phase: int) -> PointSet:
        if phase == ElementLabel.PHASE1:
            return self._phase1_points
        if phase == ElementLabel.PHASE2:
            return self._phase2_points
        raise ValueError(f"Phase must be 1 or 2, got {phase}")

    def _phase_points(self, phase: int) -> PointSet:
        full = element_point_set(self.mesh, np.flatnonzero(self.labels == phase))
        pick = self.decomposition.sub_phases == phase
        coords = self.decomposition.sub_triangles[pick]
        if len(coords) == 0:
            return full
        points, weights = triangle_rule(coords)
        owners = np.repeat(self.decomposition.sub_elements[pick], points.shape[1])
        flat = points.reshape(-1, 2)
        return PointSet(
            np.concatenate([full.elements, owners]),
            np.concatenate([full.reference, self.mesh.to_reference(owners, flat)]),
            np.concatenate([full.weights, weights.ravel()]),
            np.concatenate([full.points, flat]),
        )

    @cached_property
    def _phase1_points(self) -> PointSet:
        return self._phase_points(ElementLabel.PHASE1)

    @cached_property
    def _phase2_points(self) -> PointSet:
        return self._phase_points(ElementLabel.PHASE2)

    @cached_property
    def interface_points(self) -> PointSet:
        """Gauss points on the interface segments with their (constant) segment normals"""
        interface = self.interface
        if len(interface) == 0:
            return PointSet.empty(with_normals=True)
        points, weights = segment_rule(interface.endpoints)
        nq = points.shape[1]
        owners = np.repeat(interface.elements, nq)
        flat = points.reshape(-1, 2)
        return PointSet(owners, self.mesh.to_reference(owners, flat), weights.ravel(), flat,
                        np.repeat(interface.normals, nq, axis=0))

    def phase_value(self, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        """Phase (1 or 2) at points, from the sign of the P1 level set"""
        return np.where(self.phi.evaluate(elements, reference) > 0.0,
                        int(ElementLabel.PHASE1), int(ElementLabel.PHASE2))


def build_time_slice(phi: LevelSetField) -> TimeSlice:
    """Classify, cut and sub-triangulate the mesh for one level set"""
    linear = project_to_p1(phi)
    interface = reconstruct_interface(linear)
    decomposition = decompose_elements(interface)
    return TimeSlice(phi.mesh, float(phi.time), linear, interface, decomposition)


@dataclass(frozen=True, eq=False)
class SlabGeometry:
    """
    Geometry of one space-time slab

    ``active_elements[0]`` is the interface band, ``active_elements[i]`` the
    elements meeting phase i at some slab time. ``ghost_faces[i]`` are the
    faces where ghost penalties act on active mesh i.
    """
    mesh: BackgroundMesh = field(repr=False)
    quadrature: TimeQuadrature
    slices: Tuple[TimeSlice, ...] = field(repr=False)
    active_elements: Tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    ghost_faces: Tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    index: Optional[int] = None

    @property
    def times(self) -> np.ndarray:
        return self.quadrature.points

    @property
    def t_n(self) -> float:
        return self.quadrature.t_n

    @property
    def dt(self) -> float:
        return self.quadrature.dt

    @property
    def start(self) -> TimeSlice:
        return self.slices[0]

    @property
    def end(self) -> TimeSlice:
        return self.slices[-1]

    def require_interface(self) -> None:
        for time_slice in self.slices:
            if len(time_slice.interface) == 0:
                raise GeometryError(
                    f"Empty interface at t={time_slice.time:.6g} on slab {self.index}"
                )


def build_slab_sets(slices: Sequence[TimeSlice], quadrature: TimeQuadrature,
                    index: Optional[int] = None) -> SlabGeometry:
    """
    Active meshes and ghost-face sets of a slab from the slices at its quadrature times

    Args:
        slices: TimeSlice per quadrature point, in time order
        quadrature: Time rule of the slab
        index: Slab index used in diagnostics
    """
    if len(slices) != len(quadrature.points):
        raise ValueError(f"Need one slice per quadrature point, got {len(slices)}")
    mesh = slices[0].mesh
    labels = np.stack([s.labels for s in slices])
    cut_any = (labels == ElementLabel.CUT).any(axis=0)
    flips = (labels == ElementLabel.PHASE1).any(axis=0) & (labels == ElementLabel.PHASE2).any(axis=0)
    band = cut_any | flips
    in_phase1 = band | (labels == ElementLabel.PHASE1).any(axis=0)
    in_phase2 = band | (labels == ElementLabel.PHASE2).any(axis=0)

    pair = mesh.face_elements
    interior = pair[:, 1] >= 0
    first, second = pair[:, 0], np.where(interior, pair[:, 1], pair[:, 0])
    touches_band = interior & (band[first] | band[second])
    ghost = (
        np.flatnonzero(interior & band[first] & band[second]),
        np.flatnonzero(touches_band & in_phase1[first] & in_phase1[second]),
        np.flatnonzero(touches_band & in_phase2[first] & in_phase2[second]),
    )
    active = (np.flatnonzero(band), np.flatnonzero(in_phase1), np.flatnonzero(in_phase2))
    logger.debug(
        "Slab %s: band %d, phase-1 %d, phase-2 %d elements; ghost faces %s",
        index, active[0].size, active[1].size, active[2].size, [g.size for g in ghost],
    )
    return SlabGeometry(mesh, quadrature, tuple(slices), active, ghost, index)


def build_slab_geometry(fields: List[LevelSetField], quadrature: TimeQuadrature,
                        index: Optional[int] = None,
                        start: Optional[TimeSlice] = None) -> SlabGeometry:
    """Slices for all slab times (reusing ``start`` for t_n when given) and the slab sets"""
    slices = [start if (k == 0 and start is not None) else build_time_slice(phi)
              for k, phi in enumerate(fields)]
    return build_slab_sets(slices, quadrature, index)
