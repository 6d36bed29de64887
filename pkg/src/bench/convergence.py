import logging
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.bench.cases import BenchCase, CaseFactory
from src.bench.output import write_csv
from src.bench.runner import make_backend, run_case, run_surfactant_case
from src.config.run_config import RunConfig
from src.levelset.cases import translate_case
from src.mesh.background_mesh import BackgroundMesh
from src.twophase.benchmarks import laplace_young_jump, velocity_l2_norm
from src.twophase.params import CoupledParams
from src.twophase.solver import TwoPhaseSolver
from src.utils.errors import CutFlowError

logger = logging.getLogger(__name__)


def observed_orders(h: Sequence[float], errors: Sequence[float]) -> np.ndarray:
    """log(e_{i-1} / e_i) / log(h_{i-1} / h_i), NaN for the first mesh"""
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    orders = np.full(h.shape, np.nan)
    orders[1:] = np.log(errors[:-1] / errors[1:]) / np.log(h[:-1] / h[1:])
    return orders


def convergence_study(config: RunConfig, meshes: Sequence[int], write: bool = True) -> pd.DataFrame:
    """
    Final-time L2 interface errors of a surfactant case on a sequence of uniform meshes

    Args:
        config: Base configuration (time step rule, parameters)
        meshes: Elements per side, coarse to fine
        write: Write convergence.csv into the output directory

    Raises:
        ValueError: Fewer than three meshes, or a case without an exact solution
    """
    meshes = [int(n) for n in meshes]
    if len(meshes) < 3:
        raise ValueError(f"A convergence study needs at least three meshes, got {meshes}")
    if sorted(meshes) != meshes or len(set(meshes)) != len(meshes):
        raise ValueError(f"Meshes must be strictly increasing, got {meshes}")
    case = CaseFactory.create_case(config.case)
    if case.analytic.w_exact is None:
        raise ValueError(f"Case '{config.case}' has no exact surfactant solution")
    rows: List[dict] = []
    for n in meshes:
        run_config = config.model_copy(update={"nx": n, "ny": n})
        result = run_case(run_config, write=False)
        h = case.nominal_h(run_config)
        rows.append({
            "n": n, "h": h, "dt": float(result.records["t"].diff().iloc[1]),
            "steps": len(result.records) - 1,
            "error": result.summary["l2_error_final"],
            "max_conservation_error": result.summary["max_conservation_error"],
        })
        logger.info("Mesh %d: h=%.4g L2 error %.6e", n, h, rows[-1]["error"])
    table = pd.DataFrame(rows)
    table["order"] = observed_orders(table["h"], table["error"])
    if write:
        write_csv(table, config.output_dir / "convergence.csv")
    return table


def robustness_sweep(config: RunConfig, count: int = 20, seed: int = 0,
                     max_shift: Optional[float] = None) -> pd.DataFrame:
    """
    Repeat a case for random interface offsets relative to the mesh

    Surfactant cases run the whole time grid and need an exact solution; flow
    cases solve one slab.

    Args:
        config: Case configuration (example1 or static_drop typically)
        count: Number of offsets
        seed: Seed of the offset generator
        max_shift: Largest offset per direction (half a cell by default)

    Returns:
        One row per offset with the solve status. Surfactant rows carry the
        final L2 error and the largest conservation error; flow rows carry
        Newton iterations, the velocity L2 norm and the drop-minus-outer
        pressure jump.

    Raises:
        ValueError: A surfactant case without an exact solution
    """
    case = CaseFactory.create_case(config.case)
    if case.kind == "surfactant" and case.analytic.w_exact is None:
        raise ValueError(f"Case '{config.case}' has no exact surfactant solution to sweep")
    mesh = case.build_mesh(config)
    h = case.nominal_h(config)
    shift = 0.5 * h if max_shift is None else max_shift
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-shift, shift, size=(count, 2))
    if case.kind == "surfactant":
        rows = _surfactant_sweep(config, case, mesh, config.time_grid(h), offsets)
    else:
        rows = _flow_sweep(config, case, mesh, config.time_step(h), offsets)
    return pd.DataFrame(rows)


def _surfactant_sweep(config: RunConfig, case: BenchCase, mesh: BackgroundMesh, grid: np.ndarray,
                      offsets: np.ndarray) -> List[dict]:
    rows = []
    for offset in offsets:
        moved = replace(case, analytic=translate_case(case.analytic, offset))
        row = {"offset_x": float(offset[0]), "offset_y": float(offset[1]), "solved": False,
               "l2_error": np.nan, "max_conservation_error": np.nan}
        try:
            _, summary = run_surfactant_case(config, moved, mesh, grid, show_progress=False)
        except CutFlowError as exc:
            logger.warning("Offset (%.3e, %.3e) failed: %s", offset[0], offset[1], exc)
        else:
            row.update(solved=True, l2_error=summary["l2_error_final"],
                       max_conservation_error=summary["max_conservation_error"])
        rows.append(row)
    return rows


def _flow_sweep(config: RunConfig, case: BenchCase, mesh: BackgroundMesh, dt: float,
                offsets: np.ndarray) -> List[dict]:
    coupled = CoupledParams(time_degree=config.time_degree, with_surfactant=config.with_surfactant,
                            c_sd=config.c_sd, geometry_updates=config.geometry_updates)
    rows = []
    for offset in offsets:
        moved = replace(case, analytic=translate_case(case.analytic, offset))
        solver = TwoPhaseSolver(mesh, moved.analytic, config.fluid, config.eos, moved.walls(config),
                                config.nitsche, config.stab, config.newton, coupled, config.surfactant,
                                make_backend(config, moved), show_progress=False)
        row = {"offset_x": float(offset[0]), "offset_y": float(offset[1]), "solved": False,
               "newton_iterations": 0, "velocity_l2": np.nan, "pressure_jump": np.nan}
        try:
            result = solver.run([0.0, dt])
        except CutFlowError as exc:
            logger.warning("Offset (%.3e, %.3e) failed: %s", offset[0], offset[1], exc)
        else:
            state = result.final
            row.update(solved=True, newton_iterations=state.iterations,
                       velocity_l2=velocity_l2_norm(state, state.slab.end),
                       pressure_jump=laplace_young_jump(state, state.slab.end))
        rows.append(row)
    return rows


def error_spread(table: pd.DataFrame) -> float:
    """Largest over smallest final L2 error of the solved offsets; NaN if none solved"""
    errors = table.loc[table["solved"].astype(bool), "l2_error"].to_numpy(dtype=float)
    if errors.size == 0 or errors.min() <= 0.0:
        return float("nan")
    return float(errors.max() / errors.min())
