import meshio
import numpy as np
import pandas as pd
import pytest
import toml

from src.bench import (
    CaseFactory, convergence_study, error_spread, make_backend, observed_orders, phase_cells,
    robustness_sweep, run_case, summarize_flow, write_csv, write_interface_vtk, write_manifest
)
from src.config import load_run_config
from src.geometry import build_time_slice
from src.levelset import init_from_function
from src.main import main


def test_case_factory():
    assert "static_drop" in CaseFactory.get_available_cases()
    with pytest.raises(ValueError, match="not supported"):
        CaseFactory.create_case("bubble")
    shear = CaseFactory.create_case("shear_flow")
    assert shear.kind == "flow" and shear.shear_rate == 0.5
    config = load_run_config("shear_flow", overrides={"nx": 10, "ny": 4})
    walls = shear.walls(config)
    values = walls["top"].values(0.0, np.array([[0.0, 2.0]]))
    assert np.allclose(values, [[1.0, 0.0]])
    example = CaseFactory.create_case("example1")
    assert example.kind == "surfactant"
    point = np.array([[1.0, 0.0]])
    assert np.allclose(example.source(2.0)(0.0, point), example.analytic.source(0.0, point, diffusion=2.0))


def test_case_mesh_and_h():
    case = CaseFactory.create_case("rising_drop")
    config = load_run_config("rising_drop", overrides={"nx": 4, "ny": 8, "refine_levels": 0})
    mesh = case.build_mesh(config)
    assert mesh.n_elements == 2 * 4 * 8
    assert case.nominal_h(config) == pytest.approx(0.25)
    refined = case.build_mesh(config.model_copy(update={"refine_levels": 1}))
    assert refined.n_elements > mesh.n_elements


def test_prescribed_backend_needs_closed_form_level_set():
    config = load_run_config("rising_drop", overrides={"level_set": "prescribed"})
    with pytest.raises(ValueError, match="closed-form"):
        make_backend(config, CaseFactory.create_case("rising_drop"))


def test_observed_orders():
    orders = observed_orders([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4])
    assert np.isnan(orders[0])
    assert np.allclose(orders[1:], 2.0)


def test_convergence_study_needs_three_meshes():
    config = load_run_config("example1")
    with pytest.raises(ValueError, match="three meshes"):
        convergence_study(config, [10, 20], write=False)
    with pytest.raises(ValueError, match="increasing"):
        convergence_study(config, [10, 40, 20], write=False)


def test_write_csv(tmp_path):
    path = write_csv([{"t": 0.0, "mass": 1.0 / 3.0}, {"t": 0.5, "mass": 0.25}], tmp_path / "a" / "steps.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["t", "mass"]
    assert frame["mass"].iloc[0] == 1.0 / 3.0


def test_write_interface_vtk(tmp_path, unit_mesh, drop):
    time_slice = build_time_slice(init_from_function(unit_mesh, 2, drop))
    path = write_interface_vtk(tmp_path / "interface.vtk", time_slice)
    written = meshio.read(path)
    assert len(written.points) == 2 * len(time_slice.interface)
    assert written.cells_dict["line"].shape == (len(time_slice.interface), 2)


def test_phase_cells_cover_the_domain(unit_mesh, drop):
    time_slice = build_time_slice(init_from_function(unit_mesh, 2, drop))
    coords, elements, phases = phase_cells(time_slice)
    n_cut = len(time_slice.cut_elements)
    assert len(coords) == unit_mesh.n_elements - n_cut + 3 * n_cut
    e1, e2 = coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 0]
    assert np.sum(0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])) == pytest.approx(1.0)
    assert set(np.unique(phases)) == {1, 2}


def test_write_manifest(tmp_path):
    path = write_manifest(tmp_path / "manifest.toml",
                          {"run": {"nx": np.int64(8), "dt": None, "box": (0.0, 1.0)}, "h": np.float64(0.5)})
    data = toml.load(path)
    assert data["run"] == {"nx": 8, "box": [0.0, 1.0]}
    assert data["h"] == 0.5


def test_summarize_flow():
    records = pd.DataFrame({
        "t": [0.0, 0.1, 0.2], "circularity": [1.0, 0.9, 0.95], "rise_velocity": [0.0, 0.2, 0.1],
        "y_c": [0.5, 0.51, 0.52], "area_error": [0.0, 1e-3, 2e-3], "conservation_error": [0.0, 0.0, 1e-12],
        "components": [1, 1, 1], "newton_iterations": [0, 3, 4],
    })
    summary = summarize_flow(records)
    assert summary["c_min"] == 0.9 and summary["t_c_min"] == 0.1
    assert summary["u2_c_max"] == 0.2 and summary["t_u2_c_max"] == 0.1
    assert summary["y_c_final"] == 0.52
    assert summary["max_newton_iterations"] == 4


def test_run_surfactant_case(tmp_path):
    config = load_run_config("stretching_circle",
                             overrides={"nx": 8, "ny": 8, "t_final": 0.5, "out": str(tmp_path)})
    result = run_case(config, show_progress=False)
    assert len(result.records) == 3
    assert {path.name for path in result.files} == {"steps.csv", "manifest.toml"}
    assert result.summary["max_conservation_error"] < 1e-8 * result.summary["mass_initial"]
    manifest = toml.load(tmp_path / "manifest.toml")
    assert manifest["time"]["steps"] == 2
    assert manifest["run"]["case"] == "stretching_circle"


def test_robustness_sweep():
    config = load_run_config("static_drop", overrides={"nx": 10, "ny": 10})
    table = robustness_sweep(config, count=2, seed=3)
    assert len(table) == 2
    assert table["solved"].all()
    assert (table["newton_iterations"] == 1).all()
    assert (np.abs(table[["offset_x", "offset_y"]].to_numpy()) <= 0.05).all()
    with pytest.raises(ValueError, match="exact surfactant solution"):
        robustness_sweep(load_run_config("stretching_circle"), count=1)


def test_surfactant_robustness_sweep():
    config = load_run_config("example1", overrides={"nx": 16, "ny": 16, "t_final": 0.25})
    table = robustness_sweep(config, count=3, seed=5)
    assert list(table.columns) == ["offset_x", "offset_y", "solved", "l2_error", "max_conservation_error"]
    assert table["solved"].all()
    assert (np.abs(table[["offset_x", "offset_y"]].to_numpy()) <= 0.125).all()
    assert (table["max_conservation_error"] < 1e-11).all()
    assert 1.0 <= error_spread(table) <= 3.0


def test_error_spread():
    table = pd.DataFrame({"solved": [True, True, False], "l2_error": [1e-3, 2.5e-3, np.nan]})
    assert error_spread(table) == pytest.approx(2.5)
    assert np.isnan(error_spread(table.assign(solved=False)))


@pytest.mark.slow
def test_example1_robustness_over_twenty_offsets():
    config = load_run_config("example1", overrides={"nx": 20, "ny": 20, "t_final": 1.0})
    table = robustness_sweep(config, count=20, seed=0)
    assert table["solved"].all()
    assert error_spread(table) <= 3.0


def test_main_runs_a_case(tmp_path):
    code = main(["--log-level", "warning", "run", "--case", "stretching_circle", "--nx", "8", "--ny", "8",
                 "--t-final", "0.25", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "steps.csv").exists()


def test_main_reports_bad_input():
    assert main(["run", "--case", "bubble"]) == 1
    with pytest.raises(SystemExit):
        main(["convergence", "--meshes", "10,x"])


def test_main_sweeps_surfactant_offsets(tmp_path):
    code = main(["--log-level", "warning", "sweep", "--case", "example1", "--nx", "10", "--ny", "10",
                 "--t-final", "0.2", "--count", "2", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "sweep.csv")
    assert len(table) == 2 and table["solved"].all()
    assert error_spread(table) < 3.0
