import numpy as np
import pandas as pd
import pytest

from frats.constants import REFERENCE_STATS_DESC
from frats.exceptions import IngestionError
from frats.reference_data import ReferenceSolution, ingest_reference


def write(tmp_path, text, name="reference.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_ingest_two_cells(tmp_path):
    path = write(tmp_path, "X,Y,AREA,VALUE\n0.25,0.5,0.5,1.0\n0.75,0.5,0.5,0.0\n")
    reference = ingest_reference(path)
    assert reference.n_cells == 2
    assert np.allclose(reference.values, [1.0, 0.0])
    assert not reference.on_fracture.any()
    assert reference.value_range == pytest.approx(1.0)
    assert reference.domain_area == pytest.approx(1.0)


def test_ingest_flags_and_lowercase_header(tmp_path):
    text = "x;y;area;value;on_fracture\n0.1;0.2;0.01;3.0;1\n0.3;0.2;0.01;2.0;false\n"
    reference = ingest_reference(write(tmp_path, text))
    assert list(reference.on_fracture) == [True, False]


def test_ingest_nan_names_row(tmp_path):
    path = write(tmp_path, "X,Y,AREA,VALUE\n0.1,0.1,0.1,1.0\n0.2,0.2,0.1,nan\n")
    with pytest.raises(IngestionError) as error:
        ingest_reference(path)
    assert error.value.rows == [3]


@pytest.mark.parametrize(
    "text",
    [
        "X,Y,AREA,VALUE\n0.1,0.1,-1.0,1.0\n",
        "X,Y,AREA,VALUE\n0.1,abc,0.1,1.0\n",
        "X,Y,AREA,VALUE\n0.1,0.1,0.1,1.0\n0.1,0.1,0,1.0\n",
    ],
)
def test_ingest_malformed_rows(tmp_path, text):
    with pytest.raises(IngestionError) as error:
        ingest_reference(write(tmp_path, text))
    assert error.value.rows


def test_ingest_missing_columns(tmp_path):
    with pytest.raises(IngestionError):
        ingest_reference(write(tmp_path, "X,Y,VALUE\n0.1,0.1,1.0\n"))


def test_ingest_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        ingest_reference(tmp_path / "absent.csv")


def test_ingest_bad_flag(tmp_path):
    path = write(tmp_path, "X,Y,AREA,VALUE,ON_FRACTURE\n0.1,0.1,0.1,1.0,maybe\n")
    with pytest.raises(IngestionError) as error:
        ingest_reference(path)
    assert error.value.rows == [2]


def test_save_and_ingest(tmp_path):
    reference = ReferenceSolution(
        centroids=np.array([[0.25, 0.25], [0.75, 0.25]]),
        areas=np.array([0.25, 0.25]),
        values=np.array([0.1, 1.0 / 3.0]),
        on_fracture=np.array([False, True]),
    )
    loaded = ingest_reference(reference.save(tmp_path / "saved.csv"))
    assert np.array_equal(loaded.values, reference.values)
    assert np.array_equal(loaded.on_fracture, reference.on_fracture)


def test_ingest_data_frame():
    frame = pd.DataFrame({"X": [0.5], "Y": [0.5], "AREA": [1.0], "VALUE": [2.0]})
    assert ingest_reference(frame).values[0] == 2.0


def test_invalid_solution():
    with pytest.raises(IngestionError):
        ReferenceSolution(
            centroids=np.zeros((1, 2)),
            areas=np.array([0.0]),
            values=np.array([1.0]),
            on_fracture=np.array([False]),
        )


def test_print_stats(capsys, tmp_path):
    path = write(tmp_path, "X,Y,AREA,VALUE\n0.25,0.5,0.5,1.0\n0.75,0.5,0.5,0.0\n")
    ingest_reference(path).print_stats()
    captured = capsys.readouterr()
    assert all(desc in captured.out for desc in REFERENCE_STATS_DESC.values())
