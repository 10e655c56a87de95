import json

import pytest

from frats.cases import BoundaryConfig, RegularCase
from frats.cli import build_parser, main
from frats.constants import MANIFEST_FILENAME, SIDES


@pytest.fixture
def reference_csv(tmp_path):
    path = tmp_path / "reference.csv"
    path.write_text(
        "X,Y,AREA,VALUE\n0.25,0.25,0.25,1.5\n0.75,0.25,0.25,1.0\n"
        "0.25,0.75,0.25,1.5\n0.75,0.75,0.25,1.0\n",
        encoding="utf-8",
    )
    return path


def test_parser_defaults():
    args = build_parser().parse_args(["run", "--case", "regular"])
    assert args.command == "run"
    assert args.mesh == "UMR37"
    assert args.threads == 1
    assert not args.no_transport
    assert not args.verbose


def test_parser_unknown_case():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--case", "benchmark"])


def test_validate(capsys):
    assert main(["validate", "--case", "regular", "--mesh", "UMR5"]) == 0
    assert "Конфигурация корректна" in capsys.readouterr().out


def test_validate_without_config():
    assert main(["validate"]) == 1


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "missing.json")]) == 1


def test_validate_without_dirichlet(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False)
    config.boundary = [BoundaryConfig(side, "neumann", 0.0) for side in SIDES]
    path = config.save(tmp_path / "neumann.json")
    assert main(["validate", str(path)]) == 1


def test_run(capsys, tmp_path):
    code = main(
        ["run", "--case", "regular", "--mesh", "UMR5", "--no-transport", "--output", str(tmp_path)]
    )
    assert code == 0
    manifest = json.loads((tmp_path / MANIFEST_FILENAME).read_text(encoding="utf-8"))
    assert manifest["name"] == "regular_umr5"
    assert str(tmp_path) in capsys.readouterr().out


def test_run_config_file(tmp_path):
    config = RegularCase("UMR5").get_config(transport=False)
    path = config.save(tmp_path / "case.json")
    output = tmp_path / "run"
    assert main(["run", str(path), "--output", str(output), "--pressure-tol", "1e-9"]) == 0
    saved = json.loads((output / "config.json").read_text(encoding="utf-8"))
    assert saved["solver"]["pressure_tol"] == 1e-9


def test_ingest(capsys, tmp_path, reference_csv):
    output = tmp_path / "checked.csv"
    assert main(["ingest-ref", str(reference_csv), "--output", str(output)]) == 0
    assert output.is_file()
    assert str(output) in capsys.readouterr().out


def test_ingest_error(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("X,Y,VALUE\n0.5,0.5,1.0\n", encoding="utf-8")
    assert main(["ingest-ref", str(path)]) == 1


def test_convergence_requires_study():
    assert main(["convergence", "--case", "regular"]) == 1


def test_convergence_bad_mesh():
    assert main(["convergence", "--case", "regular", "--meshes", "UMR5", "UMR0"]) == 1


def test_convergence_meshes(tmp_path):
    code = main(
        [
            "convergence",
            "--case",
            "pure-transport",
            "--kind",
            "outflow",
            "--meshes",
            "4",
            "8",
            "--output",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert (tmp_path / "convergence.csv").is_file()
    assert (tmp_path / "slopes.json").is_file()
    assert (tmp_path / "pure_transport_outflow_4" / MANIFEST_FILENAME).is_file()
    assert (tmp_path / "pure_transport_outflow_8" / MANIFEST_FILENAME).is_file()
