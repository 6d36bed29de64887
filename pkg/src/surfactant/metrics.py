from typing import Callable

import numpy as np

from src.geometry.slab import TimeSlice
from src.spaces.spacetime import SpaceTimeField


def conservation_error(state) -> np.ndarray:
    """
    e_c(t_i) = |M_h(t_i) - M_h(t_0) - sum_{n < i} sum_q alpha_q int_{Gamma_h(t_q)} f|

    Args:
        state: Object with ``masses`` (one per time level) and
            ``source_integrals`` (one per slab)
    """
    masses = np.asarray(state.masses, dtype=float)
    supplied = np.concatenate([[0.0], np.cumsum(np.asarray(state.source_integrals, dtype=float))])
    return np.abs(masses - masses[0] - supplied[: len(masses)])


def l2_interface_error(w_h: SpaceTimeField, w_exact: Callable[[float, np.ndarray], np.ndarray],
                       time_slice: TimeSlice) -> float:
    """sqrt of the integral of (w_exact - w_h)^2 over the interface of a slice"""
    points = time_slice.interface_points
    approx = w_h.evaluate(time_slice.time, points.elements, points.reference)
    exact = w_exact(time_slice.time, points.points)
    return float(np.sqrt(points.integrate((exact - approx) ** 2)))
