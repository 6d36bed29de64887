from abc import ABC, abstractmethod
from typing import Callable, Optional

import numpy as np

from src.mesh.background_mesh import BackgroundMesh
from src.spaces.lagrange import interpolate, interpolate_gradient, n_nodes


class VelocitySampler(ABC):
    """Velocity field u(t, x) sampled at batches of points"""

    @abstractmethod
    def value(self, t: float, points: np.ndarray,
              elements: Optional[np.ndarray] = None) -> np.ndarray:
        """Velocity at (n, 2) points, shape (n, 2)"""

    @abstractmethod
    def gradient(self, t: float, points: np.ndarray,
                 elements: Optional[np.ndarray] = None) -> np.ndarray:
        """Velocity gradient G[n, l, k] = d u_l / d x_k, shape (n, 2, 2)"""


class AnalyticVelocity(VelocitySampler):
    """Closed-form velocity with an optional closed-form gradient"""

    def __init__(self, value_fn: Callable[[float, np.ndarray], np.ndarray],
                 gradient_fn: Optional[Callable[[float, np.ndarray], np.ndarray]] = None):
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn

    def value(self, t, points, elements=None):
        return np.asarray(self._value_fn(t, points), dtype=float).reshape(len(points), 2)

    def gradient(self, t, points, elements=None):
        if self._gradient_fn is None:
            raise ValueError("This velocity sampler does not provide gradients")
        return np.asarray(self._gradient_fn(t, points), dtype=float).reshape(len(points), 2, 2)


class ZeroVelocity(VelocitySampler):
    def value(self, t, points, elements=None):
        return np.zeros((len(points), 2))

    def gradient(self, t, points, elements=None):
        return np.zeros((len(points), 2, 2))


class ConstantVelocity(VelocitySampler):
    def __init__(self, velocity):
        self.velocity = np.asarray(velocity, dtype=float).reshape(2)

    def value(self, t, points, elements=None):
        return np.broadcast_to(self.velocity, (len(points), 2)).copy()

    def gradient(self, t, points, elements=None):
        return np.zeros((len(points), 2, 2))


class NodalVelocity(VelocitySampler):
    """Time-independent finite-element velocity given by nodal values on the whole mesh"""

    def __init__(self, mesh: BackgroundMesh, degree: int, nodal_values: np.ndarray):
        nodal_values = np.asarray(nodal_values, dtype=float)
        if nodal_values.shape != (n_nodes(mesh, degree), 2):
            raise ValueError(f"Nodal velocity has shape {nodal_values.shape}")
        self.mesh = mesh
        self.degree = degree
        self.nodal_values = nodal_values

    def _locate(self, points, elements):
        if elements is None:
            return self.mesh.locate(points)
        return elements, self.mesh.to_reference(elements, points)

    def value(self, t, points, elements=None):
        elements, reference = self._locate(points, elements)
        return interpolate(self.mesh, self.degree, self.nodal_values, elements, reference)

    def gradient(self, t, points, elements=None):
        elements, reference = self._locate(points, elements)
        return interpolate_gradient(self.mesh, self.degree, self.nodal_values, elements, reference)
