from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src.mesh.background_mesh import BackgroundMesh
from src.spaces.lagrange import (
    interpolate, interpolate_gradient, lagrange_nodes, n_local, n_nodes
)

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LevelSetField:
    """
    Nodal coefficients of a P1 or P2 level-set function at one time stamp

    The drop is the negative set: Omega_2 = {phi < 0}, Omega_1 = {phi > 0}.
    """
    mesh: BackgroundMesh = field(repr=False)
    degree: int
    coeffs: np.ndarray = field(repr=False)
    time: float

    def __post_init__(self):
        n_local(self.degree)
        expected = n_nodes(self.mesh, self.degree)
        if self.coeffs.shape != (expected,):
            raise ValueError(
                f"Level set of degree {self.degree} needs {expected} coefficients, got {self.coeffs.shape}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("Level-set coefficients must be finite")

    @property
    def vertex_values(self) -> np.ndarray:
        return self.coeffs[: self.mesh.n_vertices]

    def evaluate(self, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        return interpolate(self.mesh, self.degree, self.coeffs, elements, reference)

    def gradient(self, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        return interpolate_gradient(self.mesh, self.degree, self.coeffs, elements, reference)

    def with_coeffs(self, coeffs: np.ndarray, time: float) -> "LevelSetField":
        return LevelSetField(self.mesh, self.degree, np.asarray(coeffs, dtype=float), float(time))


def init_from_function(mesh: BackgroundMesh, degree: int, phi0: PointFunction,
                       t0: float = 0.0) -> LevelSetField:
    """
    Nodal interpolation of a level-set function

    Args:
        mesh: Background mesh
        degree: 1 or 2
        phi0: Vectorized function of (n, 2) points
        t0: Time stamp of the field
    """
    nodes = lagrange_nodes(mesh, degree)
    values = np.asarray(phi0(nodes), dtype=float).reshape(len(nodes))
    return LevelSetField(mesh, degree, values, float(t0))


def project_to_p1(phi: LevelSetField) -> LevelSetField:
    """Vertex-value restriction of a level set; the identity on P1 fields"""
    if phi.degree == 1:
        return phi
    return LevelSetField(phi.mesh, 1, phi.vertex_values.copy(), phi.time)
