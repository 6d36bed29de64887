from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.spaces.scalar_space import ScalarSpace

TIME_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """
    Finite-element function sum_j c_j(x) theta^j on one slab, theta = (t - t_n) / dt

    ``coeffs`` has shape (k + 1, n_dofs) for scalars and (k + 1, n_dofs, c)
    for c-component fields.
    """
    space: ScalarSpace = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    t_n: float
    dt: float

    def __post_init__(self):
        if self.coeffs.shape[0] not in (1, 2):
            raise ValueError(f"Time degree must be 0 or 1, got {self.coeffs.shape[0] - 1}")
        if self.coeffs.shape[1] != self.space.n_dofs:
            raise ValueError("Coefficient count does not match the space")
        if not self.dt > 0.0:
            raise ValueError(f"Slab length must be positive, got {self.dt}")

    @property
    def k(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def t_end(self) -> float:
        return self.t_n + self.dt

    def theta(self, t: float) -> float:
        tol = TIME_TOL * max(1.0, abs(self.t_n) + self.dt)
        if t < self.t_n - tol or t > self.t_end + tol:
            raise ValueError(f"Time {t} outside slab [{self.t_n}, {self.t_end}]")
        return (t - self.t_n) / self.dt

    def spatial_coeffs(self, t: float) -> np.ndarray:
        theta = self.theta(t)
        return sum(self.coeffs[j] * theta ** j for j in range(self.k + 1))

    def time_derivative_coeffs(self) -> np.ndarray:
        if self.k == 0:
            return np.zeros_like(self.coeffs[0])
        return self.coeffs[1] / self.dt

    def evaluate(self, t: float, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        return self.space.evaluate(self.spatial_coeffs(t), elements, reference)

    def time_derivative(self, t: float, elements: np.ndarray, reference: np.ndarray) -> np.ndarray:
        self.theta(t)
        return self.space.evaluate(self.time_derivative_coeffs(), elements, reference)


def _locate(field_: SpaceTimeField, x: np.ndarray):
    points = np.atleast_2d(np.asarray(x, dtype=float))
    elements, reference = field_.space.mesh.locate(points)
    return elements, reference


def spacetime_eval(field_: SpaceTimeField, t: float, x) -> np.ndarray:
    """Value at time t and physical point(s) x"""
    elements, reference = _locate(field_, x)
    values = field_.evaluate(t, elements, reference)
    return values[0] if np.ndim(x) == 1 else values


def spacetime_dt(field_: SpaceTimeField, t: float, x) -> np.ndarray:
    """Time derivative at time t and physical point(s) x"""
    elements, reference = _locate(field_, x)
    values = field_.time_derivative(t, elements, reference)
    return values[0] if np.ndim(x) == 1 else values


def trace_at(field_: SpaceTimeField, t: float) -> np.ndarray:
    """Spatial coefficients at a slab endpoint: c_0 at t_n, sum_j c_j at t_{n+1}"""
    tol = TIME_TOL * max(1.0, abs(field_.t_n) + field_.dt)
    if abs(t - field_.t_n) <= tol:
        return field_.coeffs[0].copy()
    if abs(t - field_.t_end) <= tol:
        return field_.coeffs.sum(axis=0)
    raise ValueError(f"Traces are taken at slab endpoints, got t={t}")


def transfer(global_values: np.ndarray, to_space: ScalarSpace,
             from_space: Optional[ScalarSpace] = None) -> np.ndarray:
    """
    Hand nodal values over to another active space

    Args:
        global_values: Values on all mesh nodes (NaN where undefined), or
            coefficients of ``from_space`` when it is given
        to_space: Receiving space
        from_space: Space the coefficients belong to

    Returns:
        Coefficients of ``to_space``; nodes without a value get zero
    """
    if from_space is not None:
        global_values = from_space.to_global(global_values)
    return to_space.from_global(global_values)


def time_basis(theta: float, k: int) -> np.ndarray:
    """Values of the time modes 1, theta (k = 1) or 1 (k = 0)"""
    return np.array([theta ** j for j in range(k + 1)], dtype=float)


def time_basis_derivative(dt: float, k: int) -> np.ndarray:
    """Time derivatives of the time modes: 0 and 1/dt"""
    return np.array([0.0] + [1.0 / dt] * k, dtype=float)


def spacetime_block(time_matrix: np.ndarray, spatial: sp.spmatrix) -> sp.csr_matrix:
    """
    Space-time block kron(T, S): rows are test modes a, columns trial modes b

    The unknown of time mode j and spatial DOF i sits at j * n_spatial + i.
    """
    return sp.kron(sp.csr_matrix(np.asarray(time_matrix, dtype=float)), spatial, format="csr")
