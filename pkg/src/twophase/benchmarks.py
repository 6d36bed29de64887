import logging
from typing import Dict, Optional

import numpy as np

from src.geometry.interface import count_interface_components
from src.geometry.slab import TimeSlice
from src.twophase.state import FlowState
from src.utils.errors import GeometryError

logger = logging.getLogger(__name__)


def benchmark_quantities(state: Optional[FlowState], time_slice: TimeSlice) -> Dict[str, float]:
    """
    Drop benchmark quantities at one slice

    Args:
        state: Flow solution whose slab contains the slice time; without it the
            rise velocity is reported as zero
        time_slice: Slice at the evaluation time

    Returns:
        area, x_c, y_c (centre of mass), rise_velocity (mean vertical
        velocity of the drop), perimeter, circularity (perimeter of the
        equal-area circle over the drop perimeter) and components

    Raises:
        GeometryError: If the drop (phase 2) is empty
    """
    points = time_slice.bulk_points(2)
    area = float(np.sum(points.weights))
    if len(points) == 0 or area <= 0.0:
        raise GeometryError(f"Empty drop at t={time_slice.time:.6g}")
    centre = points.weights @ points.points / area
    rise_velocity = 0.0
    if state is not None:
        velocity = state.velocity[2].evaluate(time_slice.time, points.elements, points.reference)
        rise_velocity = float(points.weights @ velocity[:, 1] / area)
    perimeter = float(time_slice.interface.total_length)
    circularity = 2.0 * np.pi * np.sqrt(area / np.pi) / perimeter if perimeter > 0.0 else float("nan")
    return {
        "t": float(time_slice.time),
        "area": area,
        "x_c": float(centre[0]),
        "y_c": float(centre[1]),
        "rise_velocity": rise_velocity,
        "perimeter": perimeter,
        "circularity": float(circularity),
        "components": int(count_interface_components(time_slice.interface)),
    }


def laplace_young_jump(state: FlowState, time_slice: TimeSlice) -> float:
    """Mean pressure of the drop minus mean pressure of the surrounding fluid"""
    means = []
    for phase in (1, 2):
        points = time_slice.bulk_points(phase)
        values = state.pressure[phase].evaluate(time_slice.time, points.elements, points.reference)
        means.append(float(points.weights @ values / np.sum(points.weights)))
    return means[1] - means[0]


def velocity_l2_norm(state: FlowState, time_slice: TimeSlice) -> float:
    """L2 norm of the restricted velocity over both phases (spurious currents of a static drop)"""
    total = 0.0
    for phase in (1, 2):
        points = time_slice.bulk_points(phase)
        if len(points) == 0:
            continue
        values = state.velocity[phase].evaluate(time_slice.time, points.elements, points.reference)
        total += float(points.weights @ np.sum(values ** 2, axis=1))
    return float(np.sqrt(total))
