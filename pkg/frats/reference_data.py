from typing import Dict, Union

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .constants import REFERENCE_COLUMNS, REFERENCE_FLAG_COLUMN, REFERENCE_STATS_DESC
from .exceptions import IngestionError
from .utils import to_path

logger = logging.getLogger(__name__)

TRUE_FLAGS = {"1", "1.0", "true", "yes"}
FALSE_FLAGS = {"0", "0.0", "false", "no", ""}


@dataclass(frozen=True)
class ReferenceSolution:
    """
    Эталонное решение на мелкой эквидименсиональной сетке

    Аргументы:
        centroids (np.ndarray): Центры ячеек (n, 2)
        areas (np.ndarray): Площади ячеек
        values (np.ndarray): Значения в ячейках (давление или концентрация)
        on_fracture (np.ndarray): Признак ячеек, лежащих на трещинах

    Исключения:
        IngestionError: Если площади неположительны или значения не конечны

    Методы:
        to_frame(): Таблица pandas в формате центров ячеек
        save(path): Сохранение таблицы в файл
        get_stats(): Получение статистик
        print_stats(): Отображение статистик
    """

    centroids: np.ndarray
    areas: np.ndarray
    values: np.ndarray
    on_fracture: np.ndarray

    def __post_init__(self):
        bad = ~(np.isfinite(self.centroids).all(axis=1) & np.isfinite(self.values))
        bad |= ~(self.areas > 0.0)
        if np.any(bad):
            raise IngestionError("Некорректные ячейки эталонного решения", np.flatnonzero(bad))

    @property
    def n_cells(self) -> int:
        return len(self.values)

    @property
    def value_range(self) -> float:
        """Размах Δ = max - min"""
        return float(self.values.max() - self.values.min())

    @property
    def matrix(self) -> np.ndarray:
        return ~self.on_fracture

    @property
    def domain_area(self) -> float:
        return float(self.areas.sum())

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "X": self.centroids[:, 0],
                "Y": self.centroids[:, 1],
                "AREA": self.areas,
                "VALUE": self.values,
                REFERENCE_FLAG_COLUMN: self.on_fracture.astype(int),
            }
        )
        return frame[REFERENCE_COLUMNS + [REFERENCE_FLAG_COLUMN]]

    def save(self, path: Union[str, Path]) -> Path:
        path = to_path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def get_stats(self) -> Dict[str, Union[int, float]]:
        return {
            "n_cells": self.n_cells,
            "n_fracture_cells": int(self.on_fracture.sum()),
            "area": self.domain_area,
            "value_min": float(self.values.min()),
            "value_max": float(self.values.max()),
        }

    def print_stats(self):
        stats = self.get_stats()
        print(f"{'Статистика':^20}|{'Значение':^12}")
        print("-" * 33)
        for stat, value in REFERENCE_STATS_DESC.items():
            print(f"{value:20}|{stats.get(stat):^12.6g}")


def _parse_flags(column: pd.Series) -> np.ndarray:
    text = column.astype(str).str.strip().str.lower()
    unknown = ~text.isin(TRUE_FLAGS | FALSE_FLAGS)
    if unknown.any():
        raise IngestionError(
            f"Некорректные значения в столбце {REFERENCE_FLAG_COLUMN}",
            np.flatnonzero(unknown.to_numpy()) + 2,
        )
    return text.isin(TRUE_FLAGS).to_numpy()


def ingest_reference(source: Union[str, Path, pd.DataFrame]) -> ReferenceSolution:
    """
    Чтение эталонного решения из таблицы центров ячеек

    Описание:
        Файл с разделителями содержит заголовок X, Y, AREA, VALUE и необязательный столбец
        ON_FRACTURE, по одной ячейке в строке. Номера строк в сообщениях об ошибках
        указаны с учетом заголовка

    Пример использования:
        >>> from frats.reference_data import ingest_reference
        >>> reference = ingest_reference("reference_pressure.csv")
        >>> reference.print_stats()

    Аргументы:
        source (str|Path|DataFrame): Путь к файлу или таблица pandas

    Вывод:
        ReferenceSolution: Проверенное эталонное решение

    Исключения:
        IngestionError: Если файл не найден, отсутствуют столбцы или есть некорректные строки
    """
    if isinstance(source, pd.DataFrame):
        table = source.copy()
    else:
        path = to_path(source)
        if not path.is_file():
            raise IngestionError(f"Файл эталонного решения не найден: {path}")
        table = pd.read_csv(path, sep=None, engine="python", dtype=str)
    table.columns = [str(column).strip().upper() for column in table.columns]
    missing = [column for column in REFERENCE_COLUMNS if column not in table.columns]
    if missing:
        raise IngestionError(f"В таблице эталонного решения отсутствуют столбцы: {missing}")
    if not len(table):
        raise IngestionError("Таблица эталонного решения пуста")

    values = table[REFERENCE_COLUMNS].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values).all(axis=1) | ~(values[:, 2] > 0.0)
    if np.any(bad):
        raise IngestionError("Некорректные значения в строках", np.flatnonzero(bad) + 2)
    if REFERENCE_FLAG_COLUMN in table.columns:
        on_fracture = _parse_flags(table[REFERENCE_FLAG_COLUMN])
    else:
        on_fracture = np.zeros(len(table), dtype=bool)

    reference = ReferenceSolution(
        centroids=values[:, :2],
        areas=values[:, 2],
        values=values[:, 3],
        on_fracture=on_fracture,
    )
    logger.info(
        "Загружено эталонное решение: %d ячеек, %d на трещинах",
        reference.n_cells,
        int(on_fracture.sum()),
    )
    return reference
