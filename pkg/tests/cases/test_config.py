import json
from dataclasses import replace

import pytest

from frats.cases import (
    BoundaryConfig,
    CaseConfig,
    FractureConfig,
    MeshConfig,
    ReferenceConfig,
    SolverConfig,
    TransportSettings,
    VelocityConfig,
)
from frats.exceptions import ConfigurationError


def minimal_dict():
    return {
        "name": "unit",
        "domain": [0, 1, 0, 1],
        "mesh": {"nx": 4, "ny": 4},
        "fractures": {"segments": [[0.0, 0.5, 1.0, 0.5]]},
        "boundary": [
            {"side": "left", "kind": "dirichlet", "value": 2.0},
            {"side": "right", "kind": "dirichlet", "value": 1.0},
            {"side": "bottom", "kind": "neumann"},
            {"side": "top", "kind": "neumann"},
        ],
        "transport": {"dt": 0.01, "end_time": 0.1},
    }


@pytest.fixture(scope="module")
def config():
    return CaseConfig.from_dict(minimal_dict())


def test_from_dict(config):
    assert config.mesh.nx == 4
    assert config.domain == [0.0, 1.0, 0.0, 1.0]
    assert config.transport.dt == 0.01
    assert [segment.kind for segment in config.layout] == [
        "dirichlet",
        "dirichlet",
        "neumann",
        "neumann",
    ]
    assert config.reference is None


def test_dict_round_trip(config):
    assert CaseConfig.from_dict(config.to_dict()) == config


def test_json_round_trip(tmp_path, config):
    path = config.save(tmp_path / "case.json")
    loaded = CaseConfig.from_json(path)
    assert loaded == config
    assert loaded.config_hash == config.config_hash


def test_hash(config):
    assert len(config.config_hash) == 64
    assert CaseConfig.from_dict(minimal_dict()).config_hash == config.config_hash
    changed = replace(config, mesh=MeshConfig(nx=8, ny=8))
    assert changed.config_hash != config.config_hash


@pytest.mark.parametrize(
    "key, value",
    [
        ("unknown", 1),
        ("mesh", {"nx": 4, "cells": 2}),
        ("mesh", [4, 4]),
        ("transport", {"dt": 0.01}),
        ("transport", {"dt": 0.0, "end_time": 1.0}),
        ("solver", {"method": "gmres"}),
        ("domain", [0, 1, 0]),
        ("velocity", {"kind": "sideways"}),
    ],
)
def test_invalid_dict(key, value):
    data = minimal_dict()
    data[key] = value
    with pytest.raises(ConfigurationError):
        CaseConfig.from_dict(data)


def test_missing_name():
    data = minimal_dict()
    del data["name"]
    with pytest.raises(ConfigurationError):
        CaseConfig.from_dict(data)


def test_missing_boundary():
    data = minimal_dict()
    del data["boundary"]
    with pytest.raises(ConfigurationError):
        CaseConfig.from_dict(data)


def test_velocity_requires_transport():
    with pytest.raises(ConfigurationError):
        CaseConfig(name="velocity", velocity=VelocityConfig())


def test_from_json_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        CaseConfig.from_json(tmp_path / "missing.json")
    path = tmp_path / "broken.json"
    path.write_text("{name: ", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        CaseConfig.from_json(path)


def test_to_json_sorted(config):
    data = json.loads(config.to_json())
    assert list(data) == sorted(data)
    assert data["mesh"]["nx"] == 4


def test_with_overrides(config):
    changed = config.with_overrides(output="out", pressure_tol=1e-8, transport_tol=1e-6)
    assert changed.output.directory == "out"
    assert changed.solver.pressure_tol == 1e-8
    assert changed.solver.transport_tol == 1e-6
    assert changed.solver.flux_tol == config.solver.flux_tol
    assert config.output.directory != "out"


def test_with_overrides_sections(config):
    changed = config.with_overrides(transport=TransportSettings(dt=0.02, end_time=0.1))
    assert changed.transport.dt == 0.02
    assert changed.mesh == config.mesh
    assert config.with_overrides() == config


def test_missing_files(tmp_path, config):
    assert config.missing_files() == []
    existing = tmp_path / "fractures.csv"
    existing.write_text("START_X,START_Y,END_X,END_Y\n", encoding="utf-8")
    changed = replace(
        config,
        fractures=FractureConfig(path=str(existing)),
        reference=ReferenceConfig(path=str(tmp_path / "reference.csv")),
    )
    assert [path.name for path in changed.missing_files()] == ["reference.csv"]


@pytest.mark.parametrize(
    "section, kwargs",
    [
        (MeshConfig, {"nx": 0}),
        (MeshConfig, {"fracture_rounds": -1}),
        (MeshConfig, {"fracture_resolution": 0.0}),
        (FractureConfig, {"path": "a.csv", "segments": [[0, 0, 1, 1]]}),
        (FractureConfig, {"segments": [[0, 0, 1]]}),
        (BoundaryConfig, {"side": "front", "kind": "dirichlet"}),
        (BoundaryConfig, {"side": "left", "kind": "robin"}),
        (SolverConfig, {"pressure_tol": 0.0}),
        (ReferenceConfig, {}),
        (ReferenceConfig, {"path": "reference.csv", "tpfa": True}),
    ],
)
def test_section_validation(section, kwargs):
    with pytest.raises(ConfigurationError):
        section(**kwargs)


def test_transport_settings_to_config():
    settings = TransportSettings(dt=0.1, end_time=1.0, output_times=[0.5])
    transport = settings.to_config(tol=1e-6)
    assert transport.output_times == (0.5,)
    assert transport.tol == 1e-6
    assert transport.c_boundary == 1.0


@pytest.mark.parametrize(
    "kind, expected",
    [("inflow", [1.0, 1.1, 1.2]), ("outflow", [1.0, 0.904837418, 0.818730753])],
)
def test_velocity_exact_profile(kind, expected):
    profile = VelocityConfig(kind=kind, rate=10.0).exact_profile([0.0, 0.5, 1.0], aperture=1.0)
    assert profile == pytest.approx(expected, rel=1e-8)
