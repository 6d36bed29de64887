import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from src.mesh.background_mesh import BackgroundMesh
from src.spaces.lagrange import (
    element_dofs, eval_basis, lagrange_nodes, n_local, n_nodes, physical_basis, reference_values
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tabulation:
    """Basis data at a batch of points: local-to-space DOF ids, values and physical gradients"""
    dofs: np.ndarray     # (n, a)
    values: np.ndarray   # (n, a)
    grads: np.ndarray    # (n, a, 2)

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("na,na...->n...", self.values, coeffs[self.dofs])

    def gradient(self, coeffs: np.ndarray) -> np.ndarray:
        local = coeffs[self.dofs]
        if local.ndim == 2:
            return np.einsum("nad,na->nd", self.grads, local)
        return np.einsum("nad,nac->ncd", self.grads, local)


class ScalarSpace:
    """
    Continuous P1/P2 Lagrange space on a set of active elements

    DOFs are the global nodes touched by the active elements, numbered in
    increasing global node id.
    """

    def __init__(self, mesh: BackgroundMesh, degree: int, active_elements: Sequence[int]):
        n_local(degree)
        active = np.unique(np.asarray(active_elements, dtype=np.int64))
        if active.size == 0:
            raise ValueError("Cannot build a space on an empty active element set")
        if active[0] < 0 or active[-1] >= mesh.n_elements:
            raise ValueError("Active element id out of range")
        self.mesh = mesh
        self.degree = degree
        self.active_elements = active
        self.element_nodes = element_dofs(mesh, degree)
        self.node_ids = np.unique(self.element_nodes[active])
        self.global_to_local = -np.ones(n_nodes(mesh, degree), dtype=np.int64)
        self.global_to_local[self.node_ids] = np.arange(self.node_ids.size)
        self.active_mask = np.zeros(mesh.n_elements, dtype=bool)
        self.active_mask[active] = True

    @classmethod
    def full(cls, mesh: BackgroundMesh, degree: int) -> "ScalarSpace":
        return cls(mesh, degree, np.arange(mesh.n_elements))

    @property
    def n_dofs(self) -> int:
        return int(self.node_ids.size)

    @property
    def n_local(self) -> int:
        return n_local(self.degree)

    def dofs_of(self, elements: np.ndarray) -> np.ndarray:
        elements = np.asarray(elements, dtype=np.int64)
        if not np.all(self.active_mask[elements]):
            raise ValueError("Requested DOFs of an element outside the active mesh")
        return self.global_to_local[self.element_nodes[elements]]

    def tabulate(self, elements: np.ndarray, reference: np.ndarray) -> Tabulation:
        values, grads = physical_basis(self.mesh, self.degree, elements, reference)
        return Tabulation(self.dofs_of(elements), values, grads)

    def eval_basis(self, element: int, reference_point) -> Tuple[np.ndarray, np.ndarray]:
        if not self.active_mask[element]:
            raise ValueError(f"Element {element} is not active in this space")
        return eval_basis(self.mesh, self.degree, element, reference_point)

    def nodes(self) -> np.ndarray:
        return lagrange_nodes(self.mesh, self.degree)[self.node_ids]

    def interpolate(self, function: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return np.asarray(function(self.nodes()), dtype=float)

    def evaluate(self, coeffs: np.ndarray, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        values = reference_values(self.degree, reference)
        return np.einsum("na,na...->n...", values, coeffs[self.dofs_of(elements)])

    def to_global(self, coeffs: np.ndarray, fill: float = np.nan) -> np.ndarray:
        """Scatter space coefficients to all mesh nodes; nodes outside the space get ``fill``"""
        out = np.full((len(self.global_to_local),) + coeffs.shape[1:], fill, dtype=float)
        out[self.node_ids] = coeffs
        return out

    def from_global(self, global_values: np.ndarray) -> np.ndarray:
        """Gather nodal values at the DOFs; undefined (NaN) values become zero"""
        local = np.array(global_values[self.node_ids], dtype=float)
        missing = ~np.isfinite(local)
        if missing.any():
            logger.debug("%d transferred nodal values undefined; set to zero", int(missing.sum()))
            local[missing] = 0.0
        return local


def restrict(space: ScalarSpace, active_elements: Sequence[int]) -> ScalarSpace:
    """Restriction of a (background) space to a set of active elements"""
    return ScalarSpace(space.mesh, space.degree, active_elements)


class DoubledSpace:
    """
    Pair of spaces on the active meshes of the two phases

    Functions are double valued on elements active in both phases. With
    ``components`` > 1 each phase carries a vector of that many copies of its
    scalar space, numbered component by component.
    """

    def __init__(self, phase_spaces: Tuple[ScalarSpace, ScalarSpace], components: int = 1):
        if len(phase_spaces) != 2:
            raise ValueError("A doubled space needs exactly two phase spaces")
        self.phase_spaces = tuple(phase_spaces)
        self.components = int(components)

    def space(self, phase: int) -> ScalarSpace:
        if phase not in (1, 2):
            raise ValueError(f"Phase must be 1 or 2, got {phase}")
        return self.phase_spaces[phase - 1]

    def phase_size(self, phase: int) -> int:
        return self.space(phase).n_dofs * self.components

    @property
    def n_dofs(self) -> int:
        return self.phase_size(1) + self.phase_size(2)

    def offset(self, phase: int, component: int = 0) -> int:
        base = 0 if phase == 1 else self.phase_size(1)
        return base + component * self.space(phase).n_dofs

    @property
    def double_valued_elements(self) -> np.ndarray:
        return np.intersect1d(self.phase_spaces[0].active_elements,
                              self.phase_spaces[1].active_elements)
