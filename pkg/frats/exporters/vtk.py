from typing import Dict, List, Union

import logging
from pathlib import Path

import meshio
import numpy as np

from ..constants import TRACE_WIDTH
from ..fractures import FractureNetwork
from ..interpretation import InterpretedField
from ..mesh import Mesh
from ..pressure import PressureField
from ..transport import ConcentrationField
from ..utils import to_path

logger = logging.getLogger(__name__)


def _points(coordinates: np.ndarray) -> np.ndarray:
    return np.column_stack([coordinates, np.zeros(len(coordinates))])


def _write(path: Union[str, Path], mesh: meshio.Mesh) -> Path:
    path = to_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meshio.write(path, mesh, file_format="vtk", binary=False)
    logger.debug("Файл VTK сохранен: %s", path)
    return path


def _fractured(mesh: Mesh, field: Union[PressureField, ConcentrationField]) -> np.ndarray:
    if isinstance(field, ConcentrationField):
        return field.fractured.astype(np.int64)
    if field.intersection is None:
        return np.zeros(mesh.n_elements, dtype=np.int64)
    return field.intersection.fractured.astype(np.int64)


def write_pressure(pressure: PressureField, path: Union[str, Path]) -> Path:
    """
    Запись давления в файл VTK

    Описание:
        Сетка записывается четырехугольниками, давление - данными в вершинах
        (включая висячие узлы)

    Аргументы:
        pressure (PressureField): Давление
        path (str|Path): Путь к файлу

    Вывод:
        Path: Путь к сохраненному файлу
    """
    mesh = pressure.mesh
    grid = meshio.Mesh(
        _points(mesh.vertices),
        [("quad", mesh.elements)],
        point_data={"pressure": pressure.values},
        cell_data={"fractured": [_fractured(mesh, pressure)], "level": [mesh.levels]},
    )
    return _write(path, grid)


def write_concentration(field: ConcentrationField, path: Union[str, Path]) -> Path:
    """
    Запись кусочно-постоянной концентрации в файл VTK (данные в ячейках)

    Аргументы:
        field (ConcentrationField): Концентрация
        path (str|Path): Путь к файлу

    Вывод:
        Path: Путь к сохраненному файлу
    """
    mesh = field.mesh
    grid = meshio.Mesh(
        _points(mesh.vertices),
        [("quad", mesh.elements)],
        cell_data={"concentration": [field.values], "fractured": [_fractured(mesh, field)]},
    )
    return _write(path, grid)


def write_interpreted(field: InterpretedField, path: Union[str, Path]) -> Path:
    """
    Запись интерпретированной концентрации в файл VTK

    Описание:
        Матричные элементы записываются четырехугольниками, подэлементы трещиноватых
        элементов - веерами треугольников из первой вершины многоугольника, следы
        трещин K∩Γ - отрезками со значением на следе. Каждая ячейка получает номер
        исходного элемента

    Аргументы:
        field (InterpretedField): Интерпретированная концентрация
        path (str|Path): Путь к файлу

    Вывод:
        Path: Путь к сохраненному файлу
    """
    partitioning = field.partitioning
    mesh = partitioning.mesh
    matrix = partitioning.matrix_pieces
    points: List[np.ndarray] = [mesh.vertices]
    offset = mesh.n_vertices
    triangles: List[List[int]] = []
    values: List[float] = []
    owners: List[int] = []
    for element, part in sorted(partitioning.partitions.items()):
        subvalues = field.subelement_values(element)
        for polygon, value in zip(part.polygons, subvalues):
            points.append(polygon)
            for k in range(1, len(polygon) - 1):
                triangles.append([offset, offset + k, offset + k + 1])
                values.append(float(value))
                owners.append(element)
            offset += len(polygon)
    cells = [("quad", mesh.elements[matrix])]
    data: Dict[str, List[np.ndarray]] = {
        "concentration": [field.piece_values[matrix]],
        "element": [matrix],
    }
    if triangles:
        cells.append(("triangle", np.array(triangles, dtype=np.int64)))
        data["concentration"].append(np.array(values))
        data["element"].append(np.array(owners, dtype=np.int64))
    intersection = partitioning.intersection
    n_segments = len(intersection.segment_element)
    if n_segments:
        points.append(intersection.segment_start)
        points.append(intersection.segment_end)
        index = np.arange(n_segments)
        lines = offset + np.column_stack([index, n_segments + index])
        trace_index = np.cumsum(intersection.fractured) - 1
        segment_element = intersection.segment_element
        cells.append(("line", lines))
        data["concentration"].append(field.trace_values[trace_index[segment_element]])
        data["element"].append(np.asarray(segment_element, dtype=np.int64))
    grid = meshio.Mesh(_points(np.vstack(points)), cells, cell_data=data)
    return _write(path, grid)


def write_traces(
    network: FractureNetwork, path: Union[str, Path], width: float = TRACE_WIDTH
) -> Path:
    """
    Запись следов трещин в файл VTK

    Описание:
        Ребра сети записываются отрезками с атрибутами width (ширина линии при
        отображении), aperture и permeability

    Аргументы:
        network (FractureNetwork): Сеть трещин
        path (str|Path): Путь к файлу
        width (float): Ширина линий

    Вывод:
        Path: Путь к сохраненному файлу
    """
    grid = meshio.Mesh(
        _points(network.nodes),
        [("line", np.asarray(network.edges, dtype=np.int64).reshape(-1, 2))],
        cell_data={
            "width": [np.full(network.n_edges, float(width))],
            "aperture": [np.asarray(network.aperture, dtype=float)],
            "permeability": [np.asarray(network.permeability, dtype=float)],
        },
    )
    return _write(path, grid)
