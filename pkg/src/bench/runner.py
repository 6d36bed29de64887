import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.bench.cases import BenchCase, CaseFactory
from src.bench.output import write_csv, write_fields_vtk, write_interface_vtk, write_manifest
from src.config.run_config import RunConfig
from src.config.settings import get_settings
from src.geometry.classification import SNAP_FACTOR
from src.geometry.slab import SlabGeometry
from src.levelset.backends import LevelSetBackend, LevelSetBackendFactory
from src.levelset.level_set import init_from_function
from src.levelset.redistance import redistance_to_interface
from src.mesh.background_mesh import BackgroundMesh
from src.surfactant.metrics import l2_interface_error
from src.surfactant.solver import SurfactantSolver, SurfactantState
from src.twophase.params import CoupledParams
from src.twophase.solver import TwoPhaseSolver
from src.twophase.state import FlowState
from src.utils.common import log_duration

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Tables and files produced by one run"""
    config: RunConfig
    records: pd.DataFrame
    summary: Dict[str, float]
    files: List[Path] = field(default_factory=list)
    mesh: Optional[BackgroundMesh] = field(default=None, repr=False)


def make_backend(config: RunConfig, case: BenchCase) -> LevelSetBackend:
    redistance = redistance_to_interface if config.redistance else None
    if config.level_set == "prescribed":
        if case.analytic.phi_exact is None:
            raise ValueError(f"Case '{case.name}' has no closed-form level set; use the advected backend")
        return LevelSetBackendFactory.create_backend("prescribed", phi_exact=case.analytic.phi_exact,
                                                     redistance=redistance)
    return LevelSetBackendFactory.create_backend("advected", c_sd=config.c_sd, redistance=redistance)


def summarize_flow(records: pd.DataFrame) -> Dict[str, float]:
    """Extremes of the benchmark quantities and their times"""
    c_min = records["circularity"].idxmin()
    u_max = records["rise_velocity"].idxmax()
    return {
        "c_min": float(records.at[c_min, "circularity"]),
        "t_c_min": float(records.at[c_min, "t"]),
        "u2_c_max": float(records.at[u_max, "rise_velocity"]),
        "t_u2_c_max": float(records.at[u_max, "t"]),
        "y_c_final": float(records["y_c"].iloc[-1]),
        "max_area_error": float(records["area_error"].max()),
        "max_conservation_error": float(records["conservation_error"].max()),
        "final_components": int(records["components"].iloc[-1]),
        "max_newton_iterations": int(records["newton_iterations"].max()),
    }


def summarize_surfactant(records: pd.DataFrame) -> Dict[str, float]:
    summary = {
        "mass_initial": float(records["mass"].iloc[0]),
        "mass_final": float(records["mass"].iloc[-1]),
        "max_conservation_error": float(records["conservation_error"].max()),
    }
    if "l2_error" in records:
        summary["l2_error_final"] = float(records["l2_error"].iloc[-1])
    return summary


def run_surfactant_case(config: RunConfig, case: BenchCase, mesh: BackgroundMesh, grid: np.ndarray,
                        show_progress: bool) -> Tuple[pd.DataFrame, Dict[str, float]]:
    """Surfactant transport on a prescribed velocity; one record per time level and the run summary"""
    analytic = case.analytic
    velocity = analytic.velocity
    if velocity is None:
        raise ValueError(f"Case '{case.name}' has no prescribed velocity")
    w_exact = analytic.w_exact
    records: List[Dict[str, float]] = []

    def on_slab(n: int, state: SurfactantState, slab: SlabGeometry) -> None:
        record = {"t": state.times[-1], "mass": state.masses[-1],
                  "conservation_error": float(state.conservation_errors()[-1]),
                  "band_elements": int(slab.active_elements[0].size)}
        if w_exact is not None:
            record["l2_error"] = l2_interface_error(state.w, w_exact, slab.end)
        records.append(record)

    solver = SurfactantSolver(make_backend(config, case), velocity,
                              case.source(config.surfactant.diffusion), config.surfactant,
                              show_progress=show_progress, on_slab=on_slab)
    phi0 = init_from_function(mesh, 2, analytic.phi0, float(grid[0]))
    state = solver.run(grid, phi0, analytic.w0)
    initial = {"t": state.times[0], "mass": state.masses[0], "conservation_error": 0.0,
               "band_elements": 0}
    if w_exact is not None:
        initial["l2_error"] = float("nan")
    frame = pd.DataFrame([initial] + records)
    return frame, summarize_surfactant(frame)


def _flow_run(config: RunConfig, case: BenchCase, mesh: BackgroundMesh, grid: np.ndarray,
              show_progress: bool, out: Optional[Path], files: List[Path]):

    def on_step(n: int, state: FlowState, record: Dict[str, float]) -> None:
        if out is None or not config.vtk_every or (n + 1) % config.vtk_every:
            return
        end = state.slab.end
        files.append(write_fields_vtk(out / f"fields_{n + 1:05d}.vtk", state, end))
        files.append(write_interface_vtk(out / f"interface_{n + 1:05d}.vtk", end, state.surfactant))

    coupled = CoupledParams(time_degree=config.time_degree, with_surfactant=config.with_surfactant,
                            c_sd=config.c_sd, geometry_updates=config.geometry_updates)
    solver = TwoPhaseSolver(mesh, case.analytic, config.fluid, config.eos, case.walls(config),
                            config.nitsche, config.stab, config.newton, coupled, config.surfactant,
                            make_backend(config, case), show_progress, on_step)
    result = solver.run(grid)
    frame = pd.DataFrame(result.records)
    return frame, summarize_flow(frame)


def resolved_parameters(config: RunConfig, case: BenchCase, mesh: BackgroundMesh,
                        grid: np.ndarray) -> Dict[str, Any]:
    """Every parameter of a run, including the constants fixed in code"""
    parameters: Dict[str, Any] = {
        "run": config.model_dump(exclude={"fluid", "eos", "surfactant", "stab", "nitsche", "newton", "walls"}),
        "mesh": mesh.summary(),
        "time": {"steps": int(grid.size - 1), "dt": float(grid[1] - grid[0]), "t_final": float(grid[-1])},
        "surfactant": config.surfactant.model_dump(),
        "geometry": {"snap_factor": SNAP_FACTOR},
    }
    if case.kind == "flow":
        omega1, omega2 = config.nitsche.weights(config.fluid)
        parameters.update({
            "fluid": config.fluid.model_dump(),
            "eos": config.eos.model_dump(),
            "stab": config.stab.model_dump(),
            "nitsche": dict(config.nitsche.model_dump(), omega1=omega1, omega2=omega2),
            "newton": config.newton.model_dump(),
            "walls": {side: wall.kind for side, wall in case.walls(config).items()},
        })
        parameters["walls"]["shear_rate"] = case.shear_rate
    return parameters


def run_case(config: RunConfig, show_progress: Optional[bool] = None, write: bool = True) -> RunResult:
    """
    Run one configured experiment and write its artifacts

    Args:
        config: Resolved run configuration
        show_progress: Progress bar over slabs (Settings.SHOW_PROGRESS by default)
        write: Write CSV, VTK and manifest files into config.output_dir

    Returns:
        RunResult with the per-step table and the summary
    """
    if show_progress is None:
        show_progress = get_settings().SHOW_PROGRESS
    case = CaseFactory.create_case(config.case)
    mesh = case.build_mesh(config)
    grid = config.time_grid(case.nominal_h(config))
    out = config.output_dir if write else None
    logger.info("Running '%s': %d elements, %d steps of %.6g to T=%g", config.case, mesh.n_elements,
                grid.size - 1, grid[1] - grid[0], grid[-1])
    files: List[Path] = []
    with log_duration(logger, f"run '{config.case}'"):
        if case.kind == "surfactant":
            frame, summary = run_surfactant_case(config, case, mesh, grid, show_progress)
        else:
            frame, summary = _flow_run(config, case, mesh, grid, show_progress, out, files)
    if out is not None:
        files.append(write_csv(frame, out / "steps.csv"))
        parameters = resolved_parameters(config, case, mesh, grid)
        parameters["summary"] = summary
        files.append(write_manifest(out / "manifest.toml", parameters))
    logger.info("Finished '%s': %s", config.case, summary)
    return RunResult(config, frame, summary, files, mesh)
