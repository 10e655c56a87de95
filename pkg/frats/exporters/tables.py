from typing import Union

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..constants import FIELD_COLUMNS
from ..flux import FaceFluxField
from ..pressure import PressureField
from ..transport import ConcentrationField, TransportResult
from ..utils import to_path

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def field_table(field: Union[PressureField, ConcentrationField]) -> pd.DataFrame:
    """
    Таблица значений поля по элементам

    Описание:
        Для давления записываются средние значения по вершинам элемента, для концентрации -
        значения элементов (на трещиноватых элементах - концентрация в трещинах)

    Аргументы:
        field (PressureField|ConcentrationField): Поле

    Вывод:
        pd.DataFrame: Таблица со столбцами CELL_ID, XC, YC, LEVEL, IS_FRACTURED, VALUE

    Исключения:
        TypeError: Если передан объект другого типа
    """
    mesh = field.mesh
    if isinstance(field, ConcentrationField):
        values = field.values
        fractured = field.fractured
    elif isinstance(field, PressureField):
        values = field.element_values()
        fractured = (
            field.intersection.fractured
            if field.intersection is not None
            else np.zeros(mesh.n_elements, dtype=bool)
        )
    else:
        raise TypeError("Некорректный тип поля")
    return pd.DataFrame(
        {
            FIELD_COLUMNS[0]: np.arange(mesh.n_elements),
            FIELD_COLUMNS[1]: mesh.centers[:, 0],
            FIELD_COLUMNS[2]: mesh.centers[:, 1],
            FIELD_COLUMNS[3]: mesh.levels,
            FIELD_COLUMNS[4]: fractured.astype(int),
            FIELD_COLUMNS[5]: values,
        }
    )


def flux_table(flux: FaceFluxField) -> pd.DataFrame:
    """
    Таблица расходов через грани

    Вывод:
        pd.DataFrame: Таблица со столбцами FACE_ID, XC, YC, NX, NY, FLUX
    """
    mesh = flux.mesh
    centers = mesh.vertices[mesh.face_vertices].mean(axis=1)
    return pd.DataFrame(
        {
            "FACE_ID": np.arange(mesh.n_faces),
            "XC": centers[:, 0],
            "YC": centers[:, 1],
            "NX": mesh.face_normals[:, 0],
            "NY": mesh.face_normals[:, 1],
            "FLUX": flux.values,
        }
    )


def qoi_table(result: TransportResult) -> pd.DataFrame:
    """
    Ряды целевых величин расчета переноса

    Вывод:
        pd.DataFrame: Таблица со столбцами TIME, QOI_1, ..., QOI_n
    """
    n_values = result.qoi.shape[1] - 1
    columns = ["TIME"] + [f"QOI_{i + 1}" for i in range(n_values)]
    return pd.DataFrame(result.qoi, columns=columns)


def save_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    Сохранение таблицы в файл с разделителями

    Описание:
        Числа записываются с 17 значащими цифрами, поэтому одинаковые расчеты дают
        побайтно одинаковые файлы

    Аргументы:
        frame (pd.DataFrame): Таблица
        path (str|Path): Путь к файлу

    Вывод:
        Path: Путь к сохраненному файлу
    """
    path = to_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug("Таблица сохранена: %s (%d строк)", path, len(frame))
    return path


def save_field(field: Union[PressureField, ConcentrationField], path: Union[str, Path]) -> Path:
    return save_table(field_table(field), path)
