import json
import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from frats.cases import (
    FractureConfig,
    PureTransportCase,
    RealisticCase,
    ReferenceConfig,
    RegularCase,
)
from frats.cases.realistic import DATA_ENV, LEFT_PRESSURE
from frats.constants import MANIFEST_FILENAME
from frats.exceptions import ConfigurationError
from frats.runner import prepare, run_case, spatial_convergence, temporal_convergence


@pytest.fixture(scope="module")
def regular_result(tmp_path_factory):
    directory = tmp_path_factory.mktemp("umr19")
    config = RegularCase("UMR19").get_config(dt=0.02, end_time=0.1, output_dir=str(directory))
    return run_case(config)


def test_prepare():
    setup = prepare(RegularCase("UMR5").get_config(transport=False))
    assert setup.mesh.n_elements == 25
    assert setup.network.n_edges > 6
    assert setup.face_sets is not None
    assert setup.intersection.fractured.sum() > 0


def test_prepare_missing_file(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False)
    config = replace(config, fractures=FractureConfig(path=str(tmp_path / "missing.csv")))
    with pytest.raises(ConfigurationError):
        prepare(config)


def test_manifest(regular_result):
    manifest = regular_result.manifest
    assert {"name", "config_hash", "mesh", "network", "system", "flux", "transport"} <= set(
        manifest
    )
    assert "errors" not in manifest
    assert manifest["system"]["n_dofs"] == 400
    assert manifest["config_hash"] == regular_result.setup.config.config_hash
    assert manifest["flux"]["defect"] < 1e-8
    assert manifest["timings"]["total"] >= manifest["timings"]["pressure"]


def test_manifest_file(regular_result):
    path = regular_result.directory / MANIFEST_FILENAME
    saved = json.loads(path.read_text(encoding="utf-8"))
    assert saved["name"] == "regular_umr19"
    assert saved["transport"]["n_steps"] == regular_result.transport.n_steps
    assert MANIFEST_FILENAME not in saved["files"]
    for name in saved["files"]:
        assert (regular_result.directory / name).is_file()


@pytest.mark.parametrize(
    "name",
    [
        "config.json",
        "pressure.csv",
        "pressure_line_1.csv",
        "pressure_line_2.csv",
        "fracture_rates.csv",
        "flux.csv",
        "pressure.vtk",
        "traces.vtk",
        "qoi.csv",
        "concentration_0000.csv",
        "concentration_0001_interpreted.vtk",
        "concentration_line_1.csv",
    ],
)
def test_output_files(regular_result, name):
    assert (regular_result.directory / name).is_file()


def test_qoi_file(regular_result):
    table = pd.read_csv(regular_result.directory / "qoi.csv")
    assert list(table.columns) == ["TIME", "QOI_1", "QOI_2"]
    assert len(table) == regular_result.transport.n_steps + 1
    assert np.all(np.diff(table["TIME"]) > 0.0)


def test_transport_bounds(regular_result):
    stats = regular_result.transport.get_stats()
    assert stats["c_min"] >= -1e-10
    assert stats["c_max"] <= 1.0 + 1e-10
    assert regular_result.manifest["transport"]["balance_error"] < 1e-6


def test_config_saved(regular_result):
    config = regular_result.setup.config
    saved = type(config).from_json(regular_result.directory / "config.json")
    assert saved.config_hash == config.config_hash


def test_reproducible_tables(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False)
    first = run_case(config.with_overrides(output=tmp_path / "first"))
    second = run_case(config.with_overrides(output=tmp_path / "second"))
    for name in ("pressure.csv", "flux.csv", "pressure_line_1.csv"):
        assert (first.directory / name).read_bytes() == (second.directory / name).read_bytes()


def test_tpfa_reference_errors(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False, output_dir=str(tmp_path))
    config = replace(config, reference=ReferenceConfig(tpfa=True, cells_across=2, max_level=4))
    result = run_case(config)
    errors = result.manifest["errors"]
    assert 0.0 <= errors["err_matrix"] < 1.0
    assert np.isfinite(result.errors.get_stats()["err_matrix"])


def test_file_reference_errors(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False, output_dir=str(tmp_path / "run"))
    result = run_case(config)
    field = pd.read_csv(result.directory / "pressure.csv")
    reference = pd.DataFrame(
        {
            "X": field["XC"],
            "Y": field["YC"],
            "AREA": np.full(len(field), 0.04),
            "VALUE": field["VALUE"],
        }
    )
    path = tmp_path / "reference.csv"
    reference.to_csv(path, index=False)
    checked = run_case(
        replace(config, reference=ReferenceConfig(path=str(path))).with_overrides(
            output=tmp_path / "checked"
        )
    )
    assert checked.manifest["errors"]["err_matrix"] < 1.0


def test_pure_transport_run(tmp_path):
    config = PureTransportCase("inflow", n=8).get_config(
        dt=0.01, end_time=0.2, output_dir=str(tmp_path)
    )
    result = run_case(config)
    assert result.pressure is None
    assert "system" not in result.manifest
    assert result.manifest["transport"]["profile_error"] >= 0.0
    assert not (tmp_path / "pressure.csv").exists()
    assert not (tmp_path / "qoi.csv").exists()
    assert (tmp_path / "flux.csv").is_file()


def test_spatial_convergence(tmp_path):
    configs = [
        PureTransportCase("outflow", n=n).get_config(
            dt=0.01, end_time=0.1, output_dir=str(tmp_path / str(n))
        )
        for n in (4, 8)
    ]
    study = spatial_convergence(configs)
    assert list(study.table["n_dofs"]) == [16, 64]
    assert "profile_error" in study.slopes
    assert np.isfinite(study.slopes["profile_error"])
    files = study.save(tmp_path / "study")
    assert [path.name for path in files] == ["convergence.csv", "slopes.json"]


def test_temporal_convergence(tmp_path):
    config = PureTransportCase("inflow", n=4).get_config(
        end_time=0.2, stop_at_steady=False, output_dir=str(tmp_path)
    )
    study = temporal_convergence(config, [0.04, 0.02], reference_dt=0.005)
    errors = study.table["l2_difference"].to_numpy()
    assert errors[1] < errors[0]
    assert study.slopes["l2_difference"] < 0.0
    assert (tmp_path / "dt_0" / MANIFEST_FILENAME).is_file()


def test_temporal_convergence_requires_transport(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False, output_dir=str(tmp_path))
    with pytest.raises(ConfigurationError):
        temporal_convergence(config, [0.1], reference_dt=0.01)


def test_print_stats(capsys):
    setup = prepare(RegularCase("UMR5").get_config(transport=False))
    setup.print_stats()
    captured = capsys.readouterr()
    assert "regular_umr5" in captured.out


def test_coarse_mesh_skips_interpretation(caplog, tmp_path):
    config = RegularCase("UMR5").get_config(dt=0.05, end_time=0.1, output_dir=str(tmp_path))
    result = run_case(config)
    assert "Интерпретированная концентрация не сохранена" in caplog.text
    assert (tmp_path / "concentration_0001.vtk").is_file()
    assert not list(tmp_path.glob("*_interpreted.vtk"))
    assert result.transport is not None


@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get(DATA_ENV), reason="Таблица трещин не задана")
def test_realistic_pressure(tmp_path):
    config = RealisticCase(1, 1).get_config(transport=False, output_dir=str(tmp_path))
    result = run_case(config)
    assert result.setup.network.n_edges >= 64
    values = result.pressure.values
    assert values.min() >= -0.05 * LEFT_PRESSURE
    assert values.max() <= 1.05 * LEFT_PRESSURE
    assert result.manifest["flux"]["defect"] < 1e-8 * np.abs(result.flux.values).max()
