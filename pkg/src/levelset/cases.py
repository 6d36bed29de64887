"""Analytic level-set, velocity and surfactant data of the registered test cases"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.levelset.velocity import AnalyticVelocity, VelocitySampler, ZeroVelocity

SpaceTimeFunction = Callable[[float, np.ndarray], np.ndarray]
PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AnalyticCase:
    name: str
    domain: Tuple[float, float, float, float]
    phi0: PointFunction
    w0: PointFunction
    phi_exact: Optional[SpaceTimeFunction] = None
    velocity: Optional[VelocitySampler] = None
    initial_velocity: Optional[PointFunction] = None
    w_exact: Optional[SpaceTimeFunction] = None
    source: Optional[SpaceTimeFunction] = None
    drop_center: Tuple[float, float] = (0.0, 0.0)
    drop_bounds: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    metadata: Dict[str, float] = field(default_factory=dict)

    def phi(self, t: float, points: np.ndarray) -> np.ndarray:
        if self.phi_exact is None:
            raise ValueError(f"Case '{self.name}' has no closed-form level set for t > 0")
        return self.phi_exact(t, points)


def circle_distance(center, radius) -> PointFunction:
    cx, cy = center

    def phi(points: np.ndarray) -> np.ndarray:
        return np.hypot(points[:, 0] - cx, points[:, 1] - cy) - radius
    return phi


def _zero(points: np.ndarray) -> np.ndarray:
    return np.zeros(len(points))


def _ones(points: np.ndarray) -> np.ndarray:
    return np.ones(len(points))


# Oscillating ellipse with exact surfactant w = x y exp(-4t)

def _example1_a2(t: float) -> float:
    return 1.0 + 0.25 * np.sin(2.0 * np.pi * t)


def _example1_rate(t: float) -> float:
    return 0.25 * np.pi * np.cos(2.0 * np.pi * t) / _example1_a2(t)


def _example1_phi(t, points):
    return points[:, 0] ** 2 / _example1_a2(t) + points[:, 1] ** 2 - 1.0


def _example1_velocity(t, points):
    return np.column_stack([_example1_rate(t) * points[:, 0], np.zeros(len(points))])


def _example1_velocity_gradient(t, points):
    grad = np.zeros((len(points), 2, 2))
    grad[:, 0, 0] = _example1_rate(t)
    return grad


def _example1_w(t, points):
    return points[:, 0] * points[:, 1] * np.exp(-4.0 * t)


def _example1_source(t, points, diffusion: float = 1.0):
    """Right-hand side making x y exp(-4t) solve the surface transport equation"""
    x, y = points[:, 0], points[:, 1]
    a2 = _example1_a2(t)
    c = _example1_rate(t)
    decay = np.exp(-4.0 * t)
    phi_x, phi_y = 2.0 * x / a2, 2.0 * y
    norm = np.hypot(phi_x, phi_y)
    n1, n2 = phi_x / norm, phi_y / norm
    curvature = (2.0 / a2 * phi_y ** 2 + 2.0 * phi_x ** 2) / norm ** 3
    transport = -4.0 * x * y + c * x * y + x * y * (c - c * n1 ** 2)
    laplace_beltrami = -2.0 * n1 * n2 - curvature * (n1 * y + n2 * x)
    return decay * (transport - diffusion * laplace_beltrami)


# Circle stretched by a linear flow; no source, so surfactant mass is conserved

def _stretch_velocity(t, points):
    return np.column_stack([0.1 * points[:, 0] * np.cos(t), 0.2 * points[:, 1] * np.sin(t)])


def _stretch_velocity_gradient(t, points):
    grad = np.zeros((len(points), 2, 2))
    grad[:, 0, 0] = 0.1 * np.cos(t)
    grad[:, 1, 1] = 0.2 * np.sin(t)
    return grad


def _stretch_phi(t, points):
    x = points[:, 0] * np.exp(-0.1 * np.sin(t))
    y = points[:, 1] * np.exp(-0.2 * (1.0 - np.cos(t)))
    return x ** 2 + y ** 2 - 1.0


def _two_drops(points):
    first = circle_distance((-1.0, 0.25), 0.5)(points)
    second = circle_distance((1.0, -0.25), 0.5)(points)
    return np.minimum(first, second)


CASES: Dict[str, AnalyticCase] = {
    "example1": AnalyticCase(
        name="example1",
        domain=(-2.0, 2.0, -2.0, 2.0),
        phi0=lambda p: _example1_phi(0.0, p),
        w0=lambda p: _example1_w(0.0, p),
        phi_exact=_example1_phi,
        velocity=AnalyticVelocity(_example1_velocity, _example1_velocity_gradient),
        w_exact=_example1_w,
        source=_example1_source,
        drop_bounds=(-1.2, 1.2, -1.0, 1.0),
    ),
    "stretching_circle": AnalyticCase(
        name="stretching_circle",
        domain=(-2.0, 2.0, -2.0, 2.0),
        phi0=lambda p: _stretch_phi(0.0, p),
        w0=lambda p: 1.0 + p[:, 0] * p[:, 1],
        phi_exact=_stretch_phi,
        velocity=AnalyticVelocity(_stretch_velocity, _stretch_velocity_gradient),
        source=lambda t, p: np.zeros(len(p)),
        drop_bounds=(-1.2, 1.2, -1.6, 1.6),
    ),
    "rising_drop": AnalyticCase(
        name="rising_drop",
        domain=(0.0, 1.0, 0.0, 2.0),
        phi0=circle_distance((0.5, 0.5), 0.25),
        w0=_ones,
        initial_velocity=lambda p: np.zeros((len(p), 2)),
        drop_center=(0.5, 0.5),
        drop_bounds=(0.25, 0.75, 0.25, 0.75),
        metadata={"radius": 0.25},
    ),
    "static_drop": AnalyticCase(
        name="static_drop",
        domain=(0.0, 1.0, 0.0, 1.0),
        phi0=circle_distance((0.5, 0.5), 0.25),
        phi_exact=lambda t, p: circle_distance((0.5, 0.5), 0.25)(p),
        w0=_ones,
        velocity=ZeroVelocity(),
        initial_velocity=lambda p: np.zeros((len(p), 2)),
        drop_center=(0.5, 0.5),
        drop_bounds=(0.25, 0.75, 0.25, 0.75),
        metadata={"radius": 0.25},
    ),
    "shear": AnalyticCase(
        name="shear",
        domain=(-5.0, 5.0, -2.0, 2.0),
        phi0=circle_distance((0.0, 0.0), 1.0),
        w0=_ones,
        initial_velocity=lambda p: np.column_stack([0.5 * p[:, 1], np.zeros(len(p))]),
        drop_bounds=(-1.0, 1.0, -1.0, 1.0),
        metadata={"radius": 1.0, "shear_rate": 0.5},
    ),
    "drop_pair": AnalyticCase(
        name="drop_pair",
        domain=(-4.0, 4.0, -1.0, 1.0),
        phi0=_two_drops,
        w0=_ones,
        initial_velocity=lambda p: np.column_stack([p[:, 1], np.zeros(len(p))]),
        drop_bounds=(-1.5, 1.5, -0.75, 0.75),
        metadata={"radius": 0.5, "shear_rate": 1.0},
    ),
}


def get_case(name: str) -> AnalyticCase:
    if name not in CASES:
        raise ValueError(f"Case '{name}' not registered. Available cases: {list(CASES.keys())}")
    return CASES[name]


def translate_case(case: AnalyticCase, offset) -> AnalyticCase:
    """
    Shift the whole problem by ``offset`` relative to the fixed domain

    Every space-dependent function is evaluated at x - offset, so exact
    solutions stay exact while the interface moves relative to the mesh.
    """
    shift = np.asarray(offset, dtype=float).reshape(1, 2)

    def moved(fn):
        return None if fn is None else (lambda p: fn(p - shift))

    def moved_t(fn):
        return None if fn is None else (lambda t, p, **kwargs: fn(t, p - shift, **kwargs))

    velocity = case.velocity
    if isinstance(velocity, AnalyticVelocity):
        velocity = AnalyticVelocity(moved_t(velocity._value_fn), moved_t(velocity._gradient_fn))
    x0, x1, y0, y1 = case.drop_bounds
    dx, dy = shift[0]
    return AnalyticCase(
        name=case.name,
        domain=case.domain,
        phi0=moved(case.phi0),
        w0=moved(case.w0),
        phi_exact=moved_t(case.phi_exact),
        velocity=velocity,
        initial_velocity=case.initial_velocity,
        w_exact=moved_t(case.w_exact),
        source=moved_t(case.source),
        drop_center=(case.drop_center[0] + dx, case.drop_center[1] + dy),
        drop_bounds=(x0 + dx, x1 + dx, y0 + dy, y1 + dy),
        metadata=dict(case.metadata, offset_x=float(dx), offset_y=float(dy)),
    )
