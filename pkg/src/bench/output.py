import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import meshio
import numpy as np
import pandas as pd
import toml

from src.config.settings import get_settings
from src.geometry.slab import TimeSlice
from src.spaces.spacetime import SpaceTimeField
from src.twophase.state import FlowState

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_csv(records: Union[pd.DataFrame, List[Dict[str, Any]]], path: PathLike,
              precision: Optional[int] = None) -> Path:
    """Comma-separated table with a header row and ``precision`` significant digits"""
    frame = records if isinstance(records, pd.DataFrame) else pd.DataFrame(records)
    precision = precision or get_settings().CSV_PRECISION
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=f"%.{precision}g")
    logger.debug("Wrote %d rows to %s", len(frame), path)
    return path


def _write_vtk(path: Path, mesh: meshio.Mesh) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    meshio.write(str(path), mesh, file_format="vtk42", binary=False)
    return path


def _pad3(vectors: np.ndarray) -> np.ndarray:
    return np.column_stack([vectors, np.zeros(len(vectors))])


def write_interface_vtk(path: PathLike, time_slice: TimeSlice,
                        surfactant: Optional[SpaceTimeField] = None) -> Path:
    """
    Interface polyline of a slice as VTK line cells

    Segment endpoints are written per segment; ``w`` holds the surfactant
    values at the endpoints when a field is given.
    """
    interface = time_slice.interface
    points = interface.endpoints.reshape(-1, 2)
    lines = np.arange(len(points)).reshape(-1, 2)
    point_data = {}
    if surfactant is not None and len(points):
        elements = np.repeat(interface.elements, 2)
        reference = time_slice.mesh.to_reference(elements, points)
        point_data["w"] = surfactant.evaluate(time_slice.time, elements, reference)
    mesh = meshio.Mesh(_pad3(points), [("line", lines)], point_data=point_data,
                       cell_data={"normal": [_pad3(interface.normals)]})
    return _write_vtk(Path(path), mesh)


def phase_cells(time_slice: TimeSlice):
    """
    Triangles of the phase decomposition: uncut elements plus cut sub-triangles

    Returns:
        coords (m, 3, 2), owning element (m,) and phase (m,)
    """
    mesh = time_slice.mesh
    labels = time_slice.labels
    whole = np.flatnonzero(labels != 0)
    decomposition = time_slice.decomposition
    coords = np.concatenate([mesh.vertices[mesh.triangles[whole]], decomposition.sub_triangles])
    elements = np.concatenate([whole, decomposition.sub_elements])
    phases = np.concatenate([labels[whole], decomposition.sub_phases])
    return coords, elements, phases.astype(np.int64)


def write_fields_vtk(path: PathLike, state: FlowState, time_slice: TimeSlice) -> Path:
    """
    Restricted velocity and pressure on the phase decomposition

    Every cell carries its own three points, so fields are piecewise linear per
    cell and double valued across the interface.
    """
    coords, elements, phases = phase_cells(time_slice)
    points = coords.reshape(-1, 2)
    owners = np.repeat(elements, 3)
    point_phase = np.repeat(phases, 3)
    reference = time_slice.mesh.to_reference(owners, points)
    velocity = np.zeros((len(points), 2))
    pressure = np.zeros(len(points))
    for phase in (1, 2):
        pick = point_phase == phase
        if not pick.any():
            continue
        velocity[pick] = state.velocity[phase].evaluate(time_slice.time, owners[pick], reference[pick])
        pressure[pick] = state.pressure[phase].evaluate(time_slice.time, owners[pick], reference[pick])
    mesh = meshio.Mesh(_pad3(points), [("triangle", np.arange(len(points)).reshape(-1, 3))],
                       point_data={"velocity": _pad3(velocity), "pressure": pressure},
                       cell_data={"phase": [phases]})
    return _write_vtk(Path(path), mesh)


def write_manifest(path: PathLike, parameters: Dict[str, Any]) -> Path:
    """TOML record of every resolved parameter of a run"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        toml.dump(_plain(parameters), handle)
    return path


def _plain(value):
    # toml cannot encode numpy scalars, tuples of mixed types or None
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items() if v is not None and not callable(v)}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value
